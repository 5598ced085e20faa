#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "advpara/lm/logits.hpp"
#include "advpara/text/vocabulary.hpp"
#include "advpara/util/rng.hpp"

namespace advpara {

/// Tokens surviving a mask, sorted by descending probability with ties
/// broken by ascending id. `probs` is renormalized over the kept tokens;
/// `source_probs` holds each token's probability in the unmasked input.
struct CandidateSet {
  std::vector<TokenId> token_ids;
  std::vector<double> probs;
  std::vector<double> source_probs;

  std::size_t size() const { return token_ids.size(); }
  bool empty() const { return token_ids.empty(); }
  // Sum of source_probs: the input mass the mask kept.
  double kept_mass() const;
};

class SamplingConfig {
 public:
  static constexpr double kDefaultTopP = 0.99;
  static constexpr std::size_t kDefaultTopK = 50;

  explicit SamplingConfig(double top_p = kDefaultTopP, std::size_t top_k = kDefaultTopK,
                          double temperature = 1.0, std::uint64_t seed = 0);

  double top_p() const { return top_p_; }
  std::size_t top_k() const { return top_k_; }
  double temperature() const { return temperature_; }
  std::uint64_t seed() const { return seed_; }

  SamplingConfig with_seed(std::uint64_t seed) const;

 private:
  double top_p_;
  std::size_t top_k_;
  double temperature_;
  std::uint64_t seed_;
};

// Every nonzero-probability token, sorted.
CandidateSet full_candidates(const LogitVector& logits);

/// Shortest sorted prefix whose cumulative probability reaches p; the token
/// that crosses the threshold is kept.
CandidateSet top_p_mask(const LogitVector& logits, double p);

// First k members of an already sorted set, renormalized.
CandidateSet top_k_mask(const CandidateSet& candidates, std::size_t k);

// log_softmax(log_probs / T); T == 1 returns the input unchanged.
LogitVector apply_temperature(const LogitVector& logits, double temperature);

/// temperature, then top_p, then top_k.
CandidateSet mask_candidates(const LogitVector& logits, const SamplingConfig& cfg);

// Inverse-CDF draw with one uniform01() per call.
TokenId sample_multinomial(const CandidateSet& candidates, Rng& rng);

// Highest-probability member (first in sorted order).
TokenId greedy_pick(const CandidateSet& candidates);

}  // namespace advpara
