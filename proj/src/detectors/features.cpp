#include "advpara/detectors/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advpara/util/error.hpp"

namespace advpara::detectors {

const std::array<std::string_view, kFeatureDim> kFeatureNames = {
    "mean_log_prob", "std_log_prob", "frac_top10",   "frac_top100",      "frac_top1000",
    "frac_rest",     "mean_log_rank", "log_length", "type_token_ratio",
};

ConditionalView::ConditionalView(const NGramLM& lm, TokenSpan history) : log_probs_(lm.vocab_size()) {
  lm.conditional_into(history, log_probs_, lm.order());
  double mean = 0.0;
  for (double lp : log_probs_) {
    if (lp > -INFINITY) mean += std::exp(lp) * lp;
  }
  double var = 0.0;
  for (double lp : log_probs_) {
    if (lp > -INFINITY) var += std::exp(lp) * (lp - mean) * (lp - mean);
  }
  mean_ = mean;
  variance_ = var;
}

TokenObservation ConditionalView::observe(TokenId token) const {
  if (token >= log_probs_.size()) throw InvariantError("observe: token id out of range");
  const double lp = log_probs_[token];
  std::size_t rank = 0;
  for (std::size_t j = 0; j < log_probs_.size(); ++j) {
    if (log_probs_[j] > lp || (log_probs_[j] == lp && j < token)) ++rank;
  }
  return {std::max(lp, kLogProbFloor), rank};
}

std::vector<std::uint32_t> ConditionalView::rank_table() const {
  std::vector<std::uint32_t> order(log_probs_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return log_probs_[a] != log_probs_[b] ? log_probs_[a] > log_probs_[b] : a < b;
  });
  std::vector<std::uint32_t> rank(order.size());
  for (std::uint32_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos;
  return rank;
}

std::size_t rank_bucket(std::size_t rank) {
  if (rank < 10) return 0;
  if (rank < 100) return 1;
  if (rank < 1000) return 2;
  return 3;
}

std::vector<TokenObservation> observe_text(const NGramLM& lm, TokenSpan text) {
  std::vector<TokenObservation> obs;
  obs.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    ConditionalView view(lm, text.first(i));
    obs.push_back(view.observe(text[i]));
  }
  return obs;
}

FeatureVector features_from_observations(std::span<const TokenObservation> obs, TokenSpan text) {
  if (obs.empty() || obs.size() != text.size()) throw InvariantError("features need a non-empty text");
  const double n = static_cast<double>(obs.size());
  double mean = 0.0;
  for (const auto& o : obs) mean += o.log_prob;
  mean /= n;
  double var = 0.0;
  for (const auto& o : obs) var += (o.log_prob - mean) * (o.log_prob - mean);
  var /= n;

  std::array<double, 4> buckets{};
  double log_rank = 0.0;
  for (const auto& o : obs) {
    buckets[rank_bucket(o.rank)] += 1.0;
    log_rank += std::log1p(static_cast<double>(o.rank));
  }
  std::vector<TokenId> sorted(text.begin(), text.end());
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = static_cast<double>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());

  FeatureVector f{};
  f[kMeanLogProb] = mean;
  f[kStdLogProb] = std::sqrt(var);
  f[kFracTop10] = buckets[0] / n;
  f[kFracTop100] = buckets[1] / n;
  f[kFracTop1000] = buckets[2] / n;
  f[kFracRest] = buckets[3] / n;
  f[kMeanLogRank] = log_rank / n;
  f[kLogLength] = std::log(n);
  f[kTypeTokenRatio] = distinct / n;
  return f;
}

FeatureVector extract_features(const NGramLM& lm, TokenSpan text) {
  return features_from_observations(observe_text(lm, text), text);
}

void FeatureAccumulator::add(const TokenObservation& obs, TokenId token) {
  if (token >= seen_.size()) throw InvariantError("accumulator: token id out of range");
  ++n_;
  const double delta = obs.log_prob - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (obs.log_prob - mean_);
  sum_log_rank_ += std::log1p(static_cast<double>(obs.rank));
  ++buckets_[rank_bucket(obs.rank)];
  if (seen_[token]++ == 0) ++distinct_;
}

FeatureVector FeatureAccumulator::with_candidate(const TokenObservation& obs, TokenId token) const {
  auto buckets = buckets_;
  ++buckets[rank_bucket(obs.rank)];
  const double delta = obs.log_prob - mean_;
  const double mean = mean_ + delta / static_cast<double>(n_ + 1);
  return finish(mean, m2_ + delta * (obs.log_prob - mean), buckets,
                sum_log_rank_ + std::log1p(static_cast<double>(obs.rank)), n_ + 1,
                distinct_ + (seen_.at(token) == 0 ? 1 : 0));
}

FeatureVector FeatureAccumulator::finish(double mean, double m2, const std::array<std::size_t, 4>& buckets,
                                         double sum_log_rank, std::size_t count, std::size_t distinct) const {
  const double n = static_cast<double>(count);
  FeatureVector f{};
  f[kMeanLogProb] = mean;
  f[kStdLogProb] = std::sqrt(std::max(0.0, m2 / n));
  for (std::size_t b = 0; b < 4; ++b) f[kFracTop10 + b] = static_cast<double>(buckets[b]) / n;
  f[kMeanLogRank] = sum_log_rank / n;
  f[kLogLength] = std::log(n);
  f[kTypeTokenRatio] = static_cast<double>(distinct) / n;
  return f;
}

}  // namespace advpara::detectors
