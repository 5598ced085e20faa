#pragma once

#include <memory>
#include <string>

#include "advpara/lm/ngram.hpp"

namespace advpara {

struct ParaphraserConfig {
  // Carried verbatim to bridge backends; the built-in model ignores it.
  std::string system_tag;
  double cache_weight = 0.35;
  std::size_t ngram_order = 3;
  // Added to eos probability per output token beyond the source length.
  double eos_ramp = 0.02;
  double cache_add_k = 0.1;

  void validate() const;
};

/// Built-in desk-scale paraphraser: a source-unigram cache interpolated with
/// a background n-gram,
///   p(t) = w cache(t | source) + (1 - w) ngram(t | prefix),
/// then eos mass raised by eos_ramp * max(0, |prefix| - |source|) and the
/// vector renormalized.
class CacheParaphraser final : public ConditionalLM {
 public:
  CacheParaphraser(std::shared_ptr<const NGramLM> lm, ParaphraserConfig cfg);

  std::size_t vocab_size() const override { return lm_->vocab_size(); }
  TokenId eos_id() const override { return lm_->eos_id(); }
  LogitVector next_logits(TokenSpan source, TokenSpan prefix) const override;

  const ParaphraserConfig& config() const { return cfg_; }
  const NGramLM& background() const { return *lm_; }

 private:
  std::shared_ptr<const NGramLM> lm_;
  ParaphraserConfig cfg_;
};

}  // namespace advpara
