#include "advpara/lm/paraphraser.hpp"

#include <algorithm>
#include <cmath>

#include "advpara/util/error.hpp"

namespace advpara {

void ParaphraserConfig::validate() const {
  if (!(cache_weight >= 0.0 && cache_weight <= 1.0)) throw ConfigError("cache_weight must be in [0, 1]");
  if (ngram_order < 1) throw ConfigError("ngram_order must be >= 1");
  if (!(eos_ramp >= 0.0 && eos_ramp <= 1.0)) throw ConfigError("eos_ramp must be in [0, 1]");
  if (!(cache_add_k > 0.0) || !std::isfinite(cache_add_k)) throw ConfigError("cache_add_k must be positive");
}

CacheParaphraser::CacheParaphraser(std::shared_ptr<const NGramLM> lm, ParaphraserConfig cfg)
    : lm_(std::move(lm)), cfg_(std::move(cfg)) {
  if (!lm_) throw ConfigError("paraphraser needs a background model");
  cfg_.validate();
}

LogitVector CacheParaphraser::next_logits(TokenSpan source, TokenSpan prefix) const {
  const std::size_t v = lm_->vocab_size();
  std::vector<double> background(v);
  lm_->conditional_into(prefix, background, cfg_.ngram_order);

  const double w = cfg_.cache_weight;
  std::vector<double> mix(v);
  for (std::size_t t = 0; t < v; ++t) mix[t] = (1.0 - w) * std::exp(background[t]);

  if (w > 0.0) {
    std::size_t n = 0;
    std::vector<std::uint32_t> counts(v, 0);
    for (TokenId t : source) {
      if (t >= v) throw InvariantError("source token id out of range");
      if (t == lm_->eos_id()) continue;
      ++counts[t];
      ++n;
    }
    const double denom = static_cast<double>(n) + cfg_.cache_add_k * static_cast<double>(v);
    for (std::size_t t = 0; t < v; ++t) mix[t] += w * (counts[t] + cfg_.cache_add_k) / denom;
  }

  const double extra = static_cast<double>(prefix.size()) - static_cast<double>(source.size());
  const double ramp = cfg_.eos_ramp * std::max(0.0, extra);
  mix[lm_->eos_id()] += ramp;
  const double z = 1.0 + ramp;

  LogitVector out{std::vector<double>(v)};
  for (std::size_t t = 0; t < v; ++t) out.log_probs[t] = std::log(mix[t] / z);
  return out;
}

}  // namespace advpara
