#include "advpara/lm/conditional_lm.hpp"

#include <cmath>

#include "advpara/util/error.hpp"

namespace advpara {

double conditional_log_prob(const ConditionalLM& model, TokenSpan source, TokenSpan given, TokenSpan seq) {
  TokenSequence context(given.begin(), given.end());
  context.reserve(given.size() + seq.size());
  double total = 0.0;
  for (TokenId t : seq) {
    total += model.token_log_prob(source, context, t);
    context.push_back(t);
  }
  return total;
}

double sequence_log_prob(const ConditionalLM& model, TokenSpan source, TokenSpan seq) {
  if (seq.empty()) throw InvariantError("sequence_log_prob: empty sequence");
  return conditional_log_prob(model, source, {}, seq);
}

double perplexity(const ConditionalLM& model, TokenSpan source, TokenSpan seq) {
  if (seq.empty()) throw InvariantError("perplexity: empty sequence");
  return std::exp(-sequence_log_prob(model, source, seq) / static_cast<double>(seq.size()));
}

}  // namespace advpara
