#include "advpara/sampling/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advpara/util/error.hpp"

namespace advpara {
namespace {

// Absorbs exp/log rounding so that e.g. p = 0.5 keeps a token of probability 0.5.
constexpr double kMassTolerance = 1e-12;

CandidateSet renormalized(std::vector<TokenId> ids, std::vector<double> source_probs) {
  CandidateSet out;
  const double total = std::accumulate(source_probs.begin(), source_probs.end(), 0.0);
  out.probs.reserve(source_probs.size());
  for (double p : source_probs) out.probs.push_back(p / total);
  out.token_ids = std::move(ids);
  out.source_probs = std::move(source_probs);
  return out;
}

}  // namespace

double CandidateSet::kept_mass() const { return std::accumulate(source_probs.begin(), source_probs.end(), 0.0); }

SamplingConfig::SamplingConfig(double top_p, std::size_t top_k, double temperature, std::uint64_t seed)
    : top_p_(top_p), top_k_(top_k), temperature_(temperature), seed_(seed) {
  if (!(top_p_ > 0.0 && top_p_ <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
  if (top_k_ < 1) throw ConfigError("top_k must be >= 1");
  if (!(temperature_ > 0.0) || !std::isfinite(temperature_)) throw ConfigError("temperature must be positive");
}

SamplingConfig SamplingConfig::with_seed(std::uint64_t seed) const {
  return SamplingConfig(top_p_, top_k_, temperature_, seed);
}

CandidateSet full_candidates(const LogitVector& logits) {
  std::vector<TokenId> ids;
  ids.reserve(logits.size());
  for (std::size_t t = 0; t < logits.size(); ++t) {
    if (std::isnan(logits.log_probs[t])) throw InvariantError("NaN in logits");
    if (logits.log_probs[t] > -INFINITY) ids.push_back(static_cast<TokenId>(t));
  }
  if (ids.empty()) throw InvariantError("distribution has no nonzero-probability token");
  std::sort(ids.begin(), ids.end(), [&](TokenId a, TokenId b) {
    const double pa = logits.log_probs[a], pb = logits.log_probs[b];
    return pa != pb ? pa > pb : a < b;
  });
  std::vector<double> probs;
  probs.reserve(ids.size());
  for (TokenId t : ids) probs.push_back(std::exp(logits.log_probs[t]));
  return renormalized(std::move(ids), std::move(probs));
}

CandidateSet top_p_mask(const LogitVector& logits, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
  CandidateSet all = full_candidates(logits);
  double cumulative = 0.0;
  std::size_t keep = all.size();
  for (std::size_t i = 0; i < all.size(); ++i) {
    cumulative += all.source_probs[i];
    if (cumulative >= p - kMassTolerance) {
      keep = i + 1;
      break;
    }
  }
  all.token_ids.resize(keep);
  all.source_probs.resize(keep);
  return renormalized(std::move(all.token_ids), std::move(all.source_probs));
}

CandidateSet top_k_mask(const CandidateSet& candidates, std::size_t k) {
  if (k < 1) throw ConfigError("top_k must be >= 1");
  if (candidates.empty()) throw InvariantError("top_k_mask: empty candidate set");
  const std::size_t keep = std::min(k, candidates.size());
  std::vector<TokenId> ids(candidates.token_ids.begin(), candidates.token_ids.begin() + keep);
  std::vector<double> src(candidates.source_probs.begin(), candidates.source_probs.begin() + keep);
  return renormalized(std::move(ids), std::move(src));
}

LogitVector apply_temperature(const LogitVector& logits, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (temperature == 1.0) return logits;
  LogitVector out = logits;
  for (double& lp : out.log_probs) lp /= temperature;
  log_normalize(out.log_probs);
  return out;
}

CandidateSet mask_candidates(const LogitVector& logits, const SamplingConfig& cfg) {
  if (cfg.temperature() == 1.0) return top_k_mask(top_p_mask(logits, cfg.top_p()), cfg.top_k());
  return top_k_mask(top_p_mask(apply_temperature(logits, cfg.temperature()), cfg.top_p()), cfg.top_k());
}

TokenId sample_multinomial(const CandidateSet& candidates, Rng& rng) {
  if (candidates.empty()) throw InvariantError("sample_multinomial: empty candidate set");
  const double u = rng.uniform01();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cumulative += candidates.probs[i];
    if (u < cumulative) return candidates.token_ids[i];
  }
  return candidates.token_ids.back();
}

TokenId greedy_pick(const CandidateSet& candidates) {
  if (candidates.empty()) throw InvariantError("greedy_pick: empty candidate set");
  return candidates.token_ids.front();
}

}  // namespace advpara
