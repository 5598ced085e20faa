#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace advpara {

using TokenId = std::uint32_t;

// Token ids over a Vocabulary. At most one eos, and only in the last slot.
using TokenSequence = std::vector<TokenId>;
using TokenSpan = std::span<const TokenId>;

/// Dense id <-> surface-string map. Id 0 is always `<eos>` and id 1 is
/// always `<unk>`; content tokens follow. Immutable after construction.
class Vocabulary {
 public:
  static constexpr std::string_view kEosToken = "<eos>";
  static constexpr std::string_view kUnkToken = "<unk>";
  static constexpr TokenId kEosId = 0;
  static constexpr TokenId kUnkId = 1;

  // `content` must not contain duplicates or the reserved markers.
  explicit Vocabulary(std::vector<std::string> content);

  std::size_t size() const { return tokens_.size(); }
  TokenId eos_id() const { return kEosId; }
  TokenId unk_id() const { return kUnkId; }

  const std::string& token(TokenId id) const;
  // Unknown surface forms map to unk_id().
  TokenId lookup(std::string_view surface) const;
  bool contains(std::string_view surface) const;

  const std::vector<std::string>& tokens() const { return tokens_; }

  // Stable identity over the token list (FNV-1a of the serialized form).
  std::uint64_t hash() const { return hash_; }

  // One token per line, line number = id.
  std::string serialize() const;
  static Vocabulary parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, StringHash, std::equal_to<>> index_;
  std::uint64_t hash_ = 0;
};

// Throws InvariantError when an id is out of range or eos appears before the end.
void validate_sequence(const Vocabulary& vocab, TokenSpan seq);

}  // namespace advpara
