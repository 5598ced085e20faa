#include "advpara/watermark/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "advpara/util/error.hpp"
#include "advpara/util/rng.hpp"

namespace advpara::watermark {

std::string_view to_string(Scheme scheme) { return scheme == Scheme::kgw ? "kgw" : "unigram"; }

Scheme parse_scheme(std::string_view name) {
  if (name == "kgw") return Scheme::kgw;
  if (name == "unigram") return Scheme::unigram;
  throw ConfigError("unknown watermark scheme: " + std::string(name));
}

void WatermarkParams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("watermark gamma must be in (0, 1)");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("watermark delta must be finite and >= 0");
}

std::uint64_t WatermarkParams::key_hash() const { return mix64(mix64(key) ^ 0x6b65792d68617368ULL); }

GreenMask::GreenMask(std::vector<bool> bits) : bits_(std::move(bits)) {
  popcount_ = static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

std::uint64_t kgw_seed(std::uint64_t key, TokenId prev_token) { return mix64(key ^ prev_token); }

GreenMask partition_from_seed(std::uint64_t seed, std::size_t vocab_size, double gamma) {
  if (vocab_size == 0) throw InvariantError("partition over an empty vocabulary");
  std::vector<TokenId> perm(vocab_size);
  std::iota(perm.begin(), perm.end(), TokenId{0});
  Rng rng(seed);
  for (std::size_t i = vocab_size - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i + 1));
    std::swap(perm[i], perm[j]);
  }
  const auto n_green = static_cast<std::size_t>(std::floor(gamma * static_cast<double>(vocab_size)));
  std::vector<bool> bits(vocab_size, false);
  for (std::size_t i = 0; i < n_green; ++i) bits[perm[i]] = true;
  return GreenMask(std::move(bits));
}

GreenMask green_partition_kgw(TokenId prev_token, const WatermarkParams& params, std::size_t vocab_size) {
  params.validate();
  if (prev_token >= vocab_size) throw InvariantError("kgw partition: previous token out of range");
  return partition_from_seed(kgw_seed(params.key, prev_token), vocab_size, params.gamma);
}

GreenMask green_partition_unigram(const WatermarkParams& params, std::size_t vocab_size) {
  params.validate();
  return partition_from_seed(mix64(params.key), vocab_size, params.gamma);
}

LogitVector apply_watermark_bias(const LogitVector& logits, const GreenMask& mask, double delta) {
  if (mask.size() != logits.size()) throw InvariantError("watermark mask size does not match logits");
  if (delta == 0.0) return logits;
  LogitVector out = logits;
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (mask.is_green(static_cast<TokenId>(t))) out.log_probs[t] += delta;
  }
  log_normalize(out.log_probs);
  return out;
}

TokenSequence generate_watermarked(const ConditionalLM& model, TokenSpan prefix, const WatermarkParams& params,
                                   const SamplingConfig& sampling, const GenerationLimits& limits) {
  params.validate();
  if (limits.min_len > limits.max_len || limits.max_len == 0) throw ConfigError("generation limits: need 0 < min <= max");
  const std::size_t v = model.vocab_size();
  const TokenId eos = model.eos_id();
  const GreenMask fixed = params.scheme == Scheme::unigram ? green_partition_unigram(params, v) : GreenMask{};

  Rng rng(sampling.seed());
  TokenSequence context(prefix.begin(), prefix.end());
  TokenSequence generated;
  while (generated.size() < limits.max_len) {
    LogitVector logits = model.next_logits({}, context);
    if (params.scheme == Scheme::kgw) {
      const TokenId prev = context.empty() ? eos : context.back();
      logits = apply_watermark_bias(logits, green_partition_kgw(prev, params, v), params.delta);
    } else {
      logits = apply_watermark_bias(logits, fixed, params.delta);
    }
    if (generated.size() < limits.min_len) {
      logits.log_probs[eos] = -std::numeric_limits<double>::infinity();
      log_normalize(logits.log_probs);
    }
    const TokenId next = sample_multinomial(mask_candidates(logits, sampling), rng);
    if (next == eos) break;
    generated.push_back(next);
    context.push_back(next);
  }
  return generated;
}

double z_score(std::size_t green, std::size_t scored, double gamma) {
  if (scored == 0) return 0.0;
  const double t = static_cast<double>(scored);
  return (static_cast<double>(green) - gamma * t) / std::sqrt(t * gamma * (1.0 - gamma));
}

std::size_t min_detection_length(Scheme scheme) { return scheme == Scheme::kgw ? 2 : 1; }

Detection detect_watermark(TokenSpan text, const WatermarkParams& params, std::size_t vocab_size) {
  params.validate();
  Detection d;
  if (text.size() < min_detection_length(params.scheme)) {
    d.insufficient_length = true;
    return d;
  }
  for (TokenId t : text) {
    if (t >= vocab_size) throw InvariantError("watermark detection: token id out of range");
  }
  if (params.scheme == Scheme::unigram) {
    const GreenMask mask = green_partition_unigram(params, vocab_size);
    for (TokenId t : text) d.green += mask.is_green(t) ? 1 : 0;
    d.scored = text.size();
  } else {
    for (std::size_t i = 1; i < text.size(); ++i) {
      d.green += green_partition_kgw(text[i - 1], params, vocab_size).is_green(text[i]) ? 1 : 0;
    }
    d.scored = text.size() - 1;
  }
  d.z = z_score(d.green, d.scored, params.gamma);
  return d;
}

}  // namespace advpara::watermark
