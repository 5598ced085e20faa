#include "advpara/text/vocabulary.hpp"

#include "advpara/util/error.hpp"
#include "advpara/util/io.hpp"
#include "advpara/util/rng.hpp"

namespace advpara {

Vocabulary::Vocabulary(std::vector<std::string> content) {
  tokens_.reserve(content.size() + 2);
  tokens_.emplace_back(kEosToken);
  tokens_.emplace_back(kUnkToken);
  for (auto& t : content) tokens_.push_back(std::move(t));
  for (std::size_t id = 0; id < tokens_.size(); ++id) {
    const auto& t = tokens_[id];
    if (t.empty() || t.find_first_of(" \t\r\n") != std::string::npos) {
      throw DataError("vocabulary token " + std::to_string(id) + " is empty or contains whitespace");
    }
    if (!index_.emplace(t, static_cast<TokenId>(id)).second) {
      throw DataError("duplicate vocabulary token: " + t);
    }
  }
  hash_ = fnv1a64(serialize());
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw InvariantError("token id " + std::to_string(id) + " out of range for vocabulary of size " +
                         std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

TokenId Vocabulary::lookup(std::string_view surface) const {
  auto it = index_.find(surface);
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view surface) const { return index_.find(surface) != index_.end(); }

std::string Vocabulary::serialize() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::parse(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.emplace_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (lines.size() < 2 || lines[0] != kEosToken || lines[1] != kUnkToken) {
    throw DataError("vocabulary file must start with <eos> and <unk> lines");
  }
  lines.erase(lines.begin(), lines.begin() + 2);
  return Vocabulary(std::move(lines));
}

void Vocabulary::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

Vocabulary Vocabulary::load(const std::filesystem::path& path) { return parse(read_file(path)); }

void validate_sequence(const Vocabulary& vocab, TokenSpan seq) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] >= vocab.size()) {
      throw InvariantError("token id " + std::to_string(seq[i]) + " at position " + std::to_string(i) +
                           " out of range");
    }
    if (seq[i] == vocab.eos_id() && i + 1 != seq.size()) {
      throw InvariantError("eos before the final position (index " + std::to_string(i) + ")");
    }
  }
}

}  // namespace advpara
