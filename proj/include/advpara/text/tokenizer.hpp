#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advpara/text/vocabulary.hpp"

namespace advpara {

struct TokenizerConfig {
  bool lowercase = true;
};

/// Splits raw text into surface tokens. Whitespace separates words; every
/// ASCII punctuation character is a token of its own. The literal `<unk>`
/// marker survives as one token so decoded text re-encodes to the same ids.
std::vector<std::string> segment(std::string_view text, const TokenizerConfig& cfg = {});

/// Tokens with frequency >= min_count, ordered by descending frequency then
/// lexicographically, after the two reserved markers.
Vocabulary build_vocab(std::span<const std::string> corpus, std::size_t min_count,
                       const TokenizerConfig& cfg = {});

TokenSequence encode(const Vocabulary& vocab, std::string_view text,
                     const TokenizerConfig& cfg = {});

/// Joins tokens with single spaces. Closing punctuation attaches to the
/// previous token, opening brackets to the next one; eos renders as "".
std::string decode(const Vocabulary& vocab, TokenSpan seq);

// Whitespace-separated words of raw text (no punctuation splitting).
std::vector<std::string_view> split_words(std::string_view text);

bool is_punctuation_token(std::string_view token);

}  // namespace advpara
