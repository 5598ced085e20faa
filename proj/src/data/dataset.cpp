#include "advpara/data/dataset.hpp"

#include <charconv>
#include <exception>
#include <set>

#include "advpara/util/error.hpp"
#include "advpara/util/io.hpp"
#include "advpara/util/parallel.hpp"
#include "advpara/util/rng.hpp"

namespace advpara::data {

using nlohmann::ordered_json;

std::string_view to_string(Label label) { return label == Label::ai ? "ai" : "human"; }

Label parse_label(std::string_view s) {
  if (s == "ai") return Label::ai;
  if (s == "human") return Label::human;
  throw DataError("unknown label '" + std::string(s) + "'");
}

Format parse_format(std::string_view s) {
  if (s == "jsonl") return Format::jsonl;
  if (s == "lines") return Format::lines;
  throw ConfigError("unknown dataset format '" + std::string(s) + "'");
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, 16);
  std::string digits(buf, end);
  return std::string(16 - digits.size(), '0') + digits;
}

std::string serialize_record(const Record& r) {
  ordered_json j;
  j["v"] = kSchemaVersion;
  j["id"] = r.id;
  j["label"] = to_string(r.label);
  j["text"] = r.text;
  j["meta"] = r.meta.is_null() ? ordered_json::object() : r.meta;
  return j.dump();
}

std::string serialize_dataset(std::span<const Record> records) {
  std::string out;
  for (const auto& r : records) out += serialize_record(r) + "\n";
  return out;
}

namespace {

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line_no, line);
  }
}

bool is_blank(std::string_view line) { return line.find_first_not_of(" \t") == std::string_view::npos; }

// Empty string when the line is a valid record.
std::string check_record(const ordered_json& j) {
  if (!j.is_object()) return "record is not a JSON object";
  if (!j.contains("v") || !j["v"].is_number_integer()) return "missing integer field 'v'";
  if (j["v"].get<int>() != kSchemaVersion) return "unsupported schema version " + j["v"].dump();
  for (const char* key : {"id", "label", "text"}) {
    if (!j.contains(key) || !j[key].is_string()) return std::string("missing string field '") + key + "'";
  }
  if (j["id"].get<std::string>().empty()) return "empty id";
  const auto label = j["label"].get<std::string>();
  if (label != "ai" && label != "human") return "label must be 'ai' or 'human'";
  if (j.contains("meta") && !j["meta"].is_object()) return "'meta' must be an object";
  for (const auto& [key, _] : j.items()) {
    if (key != "v" && key != "id" && key != "label" && key != "text" && key != "meta") {
      return "unknown field '" + key + "'";
    }
  }
  return {};
}

}  // namespace

std::vector<SchemaIssue> validate_schema(std::string_view text) {
  std::vector<SchemaIssue> issues;
  std::set<std::string, std::less<>> ids;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (is_blank(line)) return;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      issues.push_back({line_no, std::string("invalid JSON: ") + e.what()});
      return;
    }
    if (auto msg = check_record(j); !msg.empty()) {
      issues.push_back({line_no, msg});
      return;
    }
    if (!ids.insert(j["id"].get<std::string>()).second) {
      issues.push_back({line_no, "duplicate id '" + j["id"].get<std::string>() + "'"});
    }
  });
  return issues;
}

std::vector<Record> parse_dataset(std::string_view text) {
  std::vector<Record> records;
  std::set<std::string, std::less<>> ids;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (is_blank(line)) return;
    const auto where = "line " + std::to_string(line_no) + ": ";
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + "invalid JSON: " + e.what());
    }
    if (auto msg = check_record(j); !msg.empty()) throw DataError(where + msg);
    Record r;
    r.id = j["id"].get<std::string>();
    r.label = parse_label(j["label"].get<std::string>());
    r.text = j["text"].get<std::string>();
    if (j.contains("meta")) r.meta = j["meta"];
    if (!ids.insert(r.id).second) throw DataError(where + "duplicate id '" + r.id + "'");
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<Record> parse_lines(std::string_view text, std::string_view stem, Label label) {
  std::vector<Record> records;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (is_blank(line)) return;
    Record r;
    r.id = std::string(stem) + "-" + std::to_string(line_no);
    r.text = std::string(line);
    r.label = label;
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<Record> load_dataset(const std::filesystem::path& path, Format format, Label lines_label) {
  const auto text = read_file(path);
  try {
    if (format == Format::lines) return parse_lines(text, path.stem().string(), lines_label);
    return parse_dataset(text);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_dataset(const std::filesystem::path& path, std::span<const Record> records) {
  write_file_atomic(path, serialize_dataset(records));
}

FilterResult filter_by_length(std::span<const Record> records, const Vocabulary& vocab, std::size_t min_tokens,
                              std::size_t max_tokens, const TokenizerConfig& tok) {
  if (min_tokens == 0 || min_tokens > max_tokens) {
    throw ConfigError("length bounds must satisfy 0 < min <= max");
  }
  FilterResult out;
  for (const auto& r : records) {
    const std::size_t n = encode(vocab, r.text, tok).size();
    if (n < min_tokens) {
      ++out.dropped_short;
    } else if (n > max_tokens) {
      ++out.dropped_long;
    } else {
      out.kept.push_back(r);
    }
  }
  return out;
}

std::string first_words(std::string_view text, std::size_t n) {
  const auto words = split_words(text);
  if (words.size() < n) return {};
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    out += words[i];
  }
  return out;
}

WatermarkBuildResult build_watermarked_dataset(std::span<const Record> sources, const ConditionalLM& model,
                                               const Vocabulary& vocab, const WatermarkBuildOptions& opts) {
  opts.params.validate();
  if (opts.prefix_words == 0) throw ConfigError("prefix_words must be positive");
  if (model.vocab_size() != vocab.size()) throw ConfigError("model and vocabulary sizes differ");

  struct Slot {
    std::optional<Record> record;
    std::string error;
    bool too_short = false;
  };
  std::vector<Slot> slots(sources.size());

  parallel_for(sources.size(), opts.threads, [&](std::size_t i) {
    const Record& src = sources[i];
    const auto prefix_text = first_words(src.text, opts.prefix_words);
    if (prefix_text.empty()) {
      slots[i].too_short = true;
      return;
    }
    const std::uint64_t seed = derive_seed(opts.sampling.seed(), "build-wm-dataset", src.id);
    try {
      const TokenSequence prefix = encode(vocab, prefix_text, opts.tokenizer);
      const TokenSequence cont =
          watermark::generate_watermarked(model, prefix, opts.params, opts.sampling.with_seed(seed), opts.limits);
      Record r;
      r.id = src.id;
      r.label = Label::ai;
      r.text = decode(vocab, cont);
      r.meta["source_id"] = src.id;
      r.meta["prefix"] = prefix_text;
      r.meta["scheme"] = watermark::to_string(opts.params.scheme);
      r.meta["gamma"] = opts.params.gamma;
      r.meta["delta"] = opts.params.delta;
      r.meta["key_hash"] = hex64(opts.params.key_hash());
      r.meta["vocab_hash"] = hex64(vocab.hash());
      r.meta["seed"] = hex64(seed);
      r.meta["tokens"] = cont.size();
      slots[i].record = std::move(r);
    } catch (const std::exception& e) {
      slots[i].error = e.what();
    }
  });

  WatermarkBuildResult out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].too_short) {
      ++out.dropped_short;
    } else if (slots[i].record) {
      out.records.push_back(std::move(*slots[i].record));
    } else {
      out.failures.push_back({sources[i].id, slots[i].error});
    }
  }
  return out;
}

}  // namespace advpara::data
