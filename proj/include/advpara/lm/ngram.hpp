#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "advpara/lm/conditional_lm.hpp"

namespace advpara {

/// Count-based n-gram model with add-k smoothing applied at query time.
///
/// Each document is scored with `order - 1` eos tokens of left padding and a
/// trailing eos. A query uses the longest context (up to `order - 1` tokens)
/// that was observed during training and backs off to shorter contexts only
/// when the longer one was never seen. The chosen context's distribution is
///   p(t | ctx) = (c(ctx, t) + k) / (c(ctx) + k |V|).
/// As a ConditionalLM it ignores the source text.
class NGramLM final : public ConditionalLM {
 public:
  struct ContextCounts {
    std::uint64_t total = 0;
    std::vector<std::pair<TokenId, std::uint64_t>> next;  // sorted by id
  };

  NGramLM(std::size_t order, double add_k, std::size_t vocab_size, std::uint64_t vocab_hash,
          std::vector<std::unordered_map<std::u32string, ContextCounts>> tables);

  std::size_t order() const { return order_; }
  double add_k() const { return add_k_; }
  std::size_t vocab_size() const override { return vocab_size_; }
  TokenId eos_id() const override { return Vocabulary::kEosId; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }

  // Identity of the serialized model; detectors record it.
  std::uint64_t identity() const { return identity_; }

  LogitVector next_logits(TokenSpan source, TokenSpan prefix) const override;
  double token_log_prob(TokenSpan source, TokenSpan prefix, TokenId token) const override;

  /// Log-probs after `history`, using at most `max_order` (clamped to
  /// [1, order]). Returns the n-gram order actually used after backoff.
  std::size_t conditional_into(TokenSpan history, std::span<double> out, std::size_t max_order) const;

  // Counts of the context the model would use for `history` at `max_order`.
  std::pair<const ContextCounts*, std::size_t> find_context(TokenSpan history, std::size_t max_order) const;

  std::string serialize() const;
  static NGramLM parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static NGramLM load(const std::filesystem::path& path);

 private:
  std::size_t order_;
  double add_k_;
  std::size_t vocab_size_;
  std::uint64_t vocab_hash_;
  // tables_[n - 1]: contexts of length n - 1.
  std::vector<std::unordered_map<std::u32string, ContextCounts>> tables_;
  std::uint64_t identity_ = 0;
};

NGramLM train_lm(std::span<const TokenSequence> corpus, const Vocabulary& vocab, std::size_t order,
                 double add_k = 0.1);

}  // namespace advpara
