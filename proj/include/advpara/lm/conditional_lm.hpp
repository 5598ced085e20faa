#pragma once

#include <cstddef>

#include "advpara/lm/logits.hpp"
#include "advpara/text/vocabulary.hpp"

namespace advpara {

/// p(. | sys + source + prefix): the next-token distribution of a model that
/// reads a source text and the output generated so far. Implementations must
/// be safe to call concurrently.
class ConditionalLM {
 public:
  virtual ~ConditionalLM() = default;

  virtual std::size_t vocab_size() const = 0;
  virtual TokenId eos_id() const = 0;
  virtual LogitVector next_logits(TokenSpan source, TokenSpan prefix) const = 0;

  virtual double token_log_prob(TokenSpan source, TokenSpan prefix, TokenId token) const {
    return next_logits(source, prefix).log_probs.at(token);
  }
};

/// Sum of log p(seq_i | source, seq_<i). Throws InvariantError on empty seq.
double sequence_log_prob(const ConditionalLM& model, TokenSpan source, TokenSpan seq);

// Log-prob of `seq` continuing after `given` (chain-rule conditional).
double conditional_log_prob(const ConditionalLM& model, TokenSpan source, TokenSpan given, TokenSpan seq);

/// exp(-sequence_log_prob / |seq|).
double perplexity(const ConditionalLM& model, TokenSpan source, TokenSpan seq);

}  // namespace advpara
