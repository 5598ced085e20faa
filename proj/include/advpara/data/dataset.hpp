#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "advpara/lm/conditional_lm.hpp"
#include "advpara/sampling/sampling.hpp"
#include "advpara/text/tokenizer.hpp"
#include "advpara/watermark/watermark.hpp"

namespace advpara::data {

inline constexpr int kSchemaVersion = 1;

enum class Label { ai, human };

std::string_view to_string(Label label);
Label parse_label(std::string_view s);

struct Record {
  std::string id;
  std::string text;
  Label label = Label::ai;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();

  bool operator==(const Record&) const = default;
};

enum class Format { jsonl, lines };

Format parse_format(std::string_view s);

// Canonical JSONL: {"v":1,"id":...,"label":...,"text":...,"meta":{...}} per line.
std::string serialize_record(const Record& r);
std::string serialize_dataset(std::span<const Record> records);

/// Parses canonical JSONL. Blank lines are skipped. Throws DataError naming
/// the line for malformed input and naming the id for duplicates.
std::vector<Record> parse_dataset(std::string_view text);

/// One raw text per non-blank line; ids are "<stem>-<line>" and every record
/// gets `label`.
std::vector<Record> parse_lines(std::string_view text, std::string_view stem, Label label);

std::vector<Record> load_dataset(const std::filesystem::path& path, Format format = Format::jsonl,
                                 Label lines_label = Label::human);
void save_dataset(const std::filesystem::path& path, std::span<const Record> records);

struct SchemaIssue {
  std::size_t line = 0;
  std::string message;
};

// Every problem in a dataset file, in line order.
std::vector<SchemaIssue> validate_schema(std::string_view text);

struct FilterResult {
  std::vector<Record> kept;
  std::size_t dropped_short = 0;
  std::size_t dropped_long = 0;
};

inline constexpr std::size_t kDefaultMinTokens = 100;
inline constexpr std::size_t kDefaultMaxTokens = 500;

/// Keeps records whose encoded length lies in [min_tokens, max_tokens].
FilterResult filter_by_length(std::span<const Record> records, const Vocabulary& vocab,
                              std::size_t min_tokens = kDefaultMinTokens,
                              std::size_t max_tokens = kDefaultMaxTokens, const TokenizerConfig& tok = {});

// First `n` whitespace-separated words joined by single spaces; empty if the text is shorter.
std::string first_words(std::string_view text, std::size_t n);

struct WatermarkBuildOptions {
  watermark::WatermarkParams params{};
  SamplingConfig sampling{};  // its seed is the global seed
  std::size_t prefix_words = 20;
  watermark::GenerationLimits limits{};
  std::size_t threads = 1;
  TokenizerConfig tokenizer{};
};

struct BuildFailure {
  std::string id;
  std::string message;
};

struct WatermarkBuildResult {
  std::vector<Record> records;
  std::size_t dropped_short = 0;
  std::vector<BuildFailure> failures;
};

/// One watermarked continuation per source, prompted by its first
/// `prefix_words` words. Each record draws from its own stream seeded by
/// (global seed, record id), so results do not depend on order or threads.
/// Record text is the continuation only; meta carries the prefix and
/// everything needed to re-run detection except the key.
WatermarkBuildResult build_watermarked_dataset(std::span<const Record> sources, const ConditionalLM& model,
                                               const Vocabulary& vocab, const WatermarkBuildOptions& opts);

// Hex form used for hashes in metadata.
std::string hex64(std::uint64_t value);

}  // namespace advpara::data
