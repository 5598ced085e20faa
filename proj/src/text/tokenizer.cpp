#include "advpara/text/tokenizer.hpp"

#include <algorithm>
#include <map>

#include "advpara/util/error.hpp"

namespace advpara {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && ((u >= 0x21 && u <= 0x2f) || (u >= 0x3a && u <= 0x40) || (u >= 0x5b && u <= 0x60) ||
                      (u >= 0x7b && u <= 0x7e));
}

char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

constexpr std::string_view kAttachLeft = ".,;:!?)]}%'\"";
constexpr std::string_view kAttachRight = "([{";

}  // namespace

bool is_punctuation_token(std::string_view token) { return token.size() == 1 && is_punct(token[0]); }

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

std::vector<std::string> segment(std::string_view text, const TokenizerConfig& cfg) {
  std::vector<std::string> out;
  for (std::string_view word : split_words(text)) {
    std::string current;
    std::size_t i = 0;
    while (i < word.size()) {
      if (word.substr(i, Vocabulary::kUnkToken.size()) == Vocabulary::kUnkToken) {
        if (!current.empty()) out.push_back(std::move(current)), current.clear();
        out.emplace_back(Vocabulary::kUnkToken);
        i += Vocabulary::kUnkToken.size();
        continue;
      }
      const char c = word[i];
      if (is_punct(c)) {
        if (!current.empty()) out.push_back(std::move(current)), current.clear();
        out.emplace_back(1, c);
      } else {
        current.push_back(cfg.lowercase ? to_lower(c) : c);
      }
      ++i;
    }
    if (!current.empty()) out.push_back(std::move(current));
  }
  return out;
}

Vocabulary build_vocab(std::span<const std::string> corpus, std::size_t min_count, const TokenizerConfig& cfg) {
  if (corpus.empty()) throw ConfigError("build_vocab: corpus is empty");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus) {
    for (auto& t : segment(doc, cfg)) {
      if (t == Vocabulary::kUnkToken) continue;
      ++counts[std::move(t)];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= std::max<std::size_t>(min_count, 1) && tok != Vocabulary::kEosToken) kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> content;
  content.reserve(kept.size());
  for (auto& [tok, n] : kept) content.push_back(std::move(tok));
  return Vocabulary(std::move(content));
}

TokenSequence encode(const Vocabulary& vocab, std::string_view text, const TokenizerConfig& cfg) {
  TokenSequence ids;
  for (const auto& t : segment(text, cfg)) ids.push_back(vocab.lookup(t));
  return ids;
}

std::string decode(const Vocabulary& vocab, TokenSpan seq) {
  std::string out;
  bool glue_next = true;
  for (TokenId id : seq) {
    if (id >= vocab.size()) {
      throw InvariantError("decode: token id " + std::to_string(id) + " out of range");
    }
    if (id == vocab.eos_id()) continue;
    const std::string& t = vocab.token(id);
    const bool attach_left = t.size() == 1 && kAttachLeft.find(t[0]) != std::string_view::npos;
    if (!glue_next && !attach_left) out += ' ';
    out += t;
    glue_next = t.size() == 1 && kAttachRight.find(t[0]) != std::string_view::npos;
  }
  return out;
}

}  // namespace advpara
