#pragma once

#include <span>
#include <vector>

namespace advpara {

/// Next-token log-probabilities over the whole vocabulary. Entries may be
/// -inf for zero-probability tokens; exp() of the vector sums to 1.
struct LogitVector {
  std::vector<double> log_probs;

  std::size_t size() const { return log_probs.size(); }
  std::vector<double> probabilities() const;
};

// In-place log-softmax over arbitrary scores (-inf entries stay -inf).
void log_normalize(std::span<double> scores);

// Throws InvariantError on NaN or when exp-sum deviates from 1 by more than tol.
void check_normalized(const LogitVector& logits, double tol = 1e-9);

}  // namespace advpara
