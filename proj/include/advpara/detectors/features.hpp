#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "advpara/lm/ngram.hpp"

namespace advpara::detectors {

inline constexpr int kFeatureVersion = 1;
inline constexpr std::size_t kFeatureDim = 9;

// Index order of FeatureVector entries.
enum Feature : std::size_t {
  kMeanLogProb = 0,
  kStdLogProb,
  kFracTop10,
  kFracTop100,
  kFracTop1000,
  kFracRest,
  kMeanLogRank,
  kLogLength,
  kTypeTokenRatio,
};

extern const std::array<std::string_view, kFeatureDim> kFeatureNames;

using FeatureVector = std::array<double, kFeatureDim>;

// Log-probs below this are clamped so features stay finite under add_k = 0.
inline constexpr double kLogProbFloor = -100.0;

/// One token scored against the model's conditional at its position.
/// rank is 0-based: the number of tokens ordered ahead of it (higher
/// probability, or equal probability and a smaller id).
struct TokenObservation {
  double log_prob = 0.0;
  std::size_t rank = 0;
};

/// The model's conditional distribution at one position.
class ConditionalView {
 public:
  ConditionalView(const NGramLM& lm, TokenSpan history);

  const std::vector<double>& log_probs() const { return log_probs_; }
  TokenObservation observe(TokenId token) const;
  // Mean and variance of log p(t) for t drawn from the conditional itself.
  double expected_log_prob() const { return mean_; }
  double log_prob_variance() const { return variance_; }

  // Rank table for every id from one sort; for scoring many candidates.
  std::vector<std::uint32_t> rank_table() const;

 private:
  std::vector<double> log_probs_;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

std::size_t rank_bucket(std::size_t rank);  // 0: <10, 1: <100, 2: <1000, 3: rest

std::vector<TokenObservation> observe_text(const NGramLM& lm, TokenSpan text);

/// From-scratch features (two-pass moments). Requires |text| >= 1.
FeatureVector extract_features(const NGramLM& lm, TokenSpan text);
FeatureVector features_from_observations(std::span<const TokenObservation> obs, TokenSpan text);

/// Running sums over a growing prefix; with_candidate() evaluates the
/// features of prefix + one more token without mutating state.
class FeatureAccumulator {
 public:
  explicit FeatureAccumulator(std::size_t vocab_size) : seen_(vocab_size, 0) {}

  void add(const TokenObservation& obs, TokenId token);
  FeatureVector with_candidate(const TokenObservation& obs, TokenId token) const;
  std::size_t length() const { return n_; }

 private:
  FeatureVector finish(double mean, double m2, const std::array<std::size_t, 4>& buckets, double sum_log_rank,
                       std::size_t n, std::size_t distinct) const;

  // Welford running moments of the log-probs.
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double sum_log_rank_ = 0.0;
  std::array<std::size_t, 4> buckets_{};
  std::size_t distinct_ = 0;
  std::vector<std::uint32_t> seen_;
};

}  // namespace advpara::detectors
