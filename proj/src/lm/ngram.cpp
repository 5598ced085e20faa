#include "advpara/lm/ngram.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "advpara/util/error.hpp"
#include "advpara/util/io.hpp"
#include "advpara/util/rng.hpp"

namespace advpara {
namespace {

constexpr std::string_view kMagic = "advpara-ngram";
constexpr int kFormatVersion = 1;

// Last `len` tokens of history, left-padded with eos.
std::u32string context_key(TokenSpan history, std::size_t len) {
  std::u32string key(len, static_cast<char32_t>(Vocabulary::kEosId));
  const std::size_t take = std::min(len, history.size());
  for (std::size_t i = 0; i < take; ++i) {
    key[len - take + i] = static_cast<char32_t>(history[history.size() - take + i]);
  }
  return key;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    auto nl = text_.find('\n', pos_);
    if (nl == std::string_view::npos) nl = text_.size();
    line = text_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    ++line_no_;
    return true;
  }

  std::string_view expect(std::string_view what) {
    std::string_view line;
    if (!next(line)) throw DataError("model file truncated: expected " + std::string(what));
    return line;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

template <typename T>
T parse_number(std::string_view s, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError("model file line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return value;
}

std::string_view field(std::string_view line, std::string_view key, std::size_t line_no) {
  if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != ' ') {
    throw DataError("model file line " + std::to_string(line_no) + ": expected '" + std::string(key) + "'");
  }
  return line.substr(key.size() + 1);
}

std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto sp = s.find(' ', pos);
    if (sp == std::string_view::npos) sp = s.size();
    if (sp > pos) parts.push_back(s.substr(pos, sp - pos));
    pos = sp + 1;
  }
  return parts;
}

}  // namespace

NGramLM::NGramLM(std::size_t order, double add_k, std::size_t vocab_size, std::uint64_t vocab_hash,
                 std::vector<std::unordered_map<std::u32string, ContextCounts>> tables)
    : order_(order), add_k_(add_k), vocab_size_(vocab_size), vocab_hash_(vocab_hash), tables_(std::move(tables)) {
  if (order_ < 1) throw ConfigError("n-gram order must be >= 1");
  if (!(add_k_ >= 0.0) || !std::isfinite(add_k_)) throw ConfigError("add_k must be finite and >= 0");
  if (tables_.size() != order_) throw DataError("n-gram table count does not match order");
  for (const auto& table : tables_) {
    for (const auto& [ctx, counts] : table) {
      if (counts.total == 0) throw DataError("n-gram context with zero total count");
      for (auto [id, c] : counts.next) {
        if (id >= vocab_size_) throw DataError("n-gram entry id out of range");
      }
    }
  }
  if (tables_[0].find(std::u32string{}) == tables_[0].end()) throw DataError("n-gram model has no unigram counts");
  identity_ = fnv1a64(serialize());
}

std::pair<const NGramLM::ContextCounts*, std::size_t> NGramLM::find_context(TokenSpan history,
                                                                            std::size_t max_order) const {
  const std::size_t top = std::clamp<std::size_t>(max_order, 1, order_);
  for (std::size_t n = top; n >= 1; --n) {
    const auto& table = tables_[n - 1];
    auto it = table.find(context_key(history, n - 1));
    if (it != table.end()) return {&it->second, n};
  }
  throw InvariantError("n-gram model lost its unigram table");
}

std::size_t NGramLM::conditional_into(TokenSpan history, std::span<double> out, std::size_t max_order) const {
  if (out.size() != vocab_size_) throw InvariantError("conditional_into: output size mismatch");
  auto [ctx, used] = find_context(history, max_order);
  const double denom = static_cast<double>(ctx->total) + add_k_ * static_cast<double>(vocab_size_);
  const double log_denom = std::log(denom);
  const double base = add_k_ > 0.0 ? std::log(add_k_) - log_denom : -std::numeric_limits<double>::infinity();
  std::fill(out.begin(), out.end(), base);
  for (auto [id, c] : ctx->next) out[id] = std::log(static_cast<double>(c) + add_k_) - log_denom;
  return used;
}

LogitVector NGramLM::next_logits(TokenSpan, TokenSpan prefix) const {
  LogitVector v{std::vector<double>(vocab_size_)};
  conditional_into(prefix, v.log_probs, order_);
  return v;
}

double NGramLM::token_log_prob(TokenSpan, TokenSpan prefix, TokenId token) const {
  if (token >= vocab_size_) throw InvariantError("token_log_prob: id out of range");
  auto [ctx, used] = find_context(prefix, order_);
  auto it = std::lower_bound(ctx->next.begin(), ctx->next.end(), token,
                             [](const auto& e, TokenId t) { return e.first < t; });
  const double c = (it != ctx->next.end() && it->first == token) ? static_cast<double>(it->second) : 0.0;
  const double denom = static_cast<double>(ctx->total) + add_k_ * static_cast<double>(vocab_size_);
  if (c + add_k_ == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(c + add_k_) - std::log(denom);
}

std::string NGramLM::serialize() const {
  std::ostringstream out;
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "order " << order_ << '\n';
  out << "add_k " << format_double(add_k_) << '\n';
  out << "vocab_size " << vocab_size_ << '\n';
  out << "vocab_hash " << vocab_hash_ << '\n';
  std::size_t n_contexts = 0;
  for (const auto& t : tables_) n_contexts += t.size();
  out << "contexts " << n_contexts << '\n';
  for (std::size_t n = 1; n <= order_; ++n) {
    std::map<std::u32string, const ContextCounts*> sorted;
    for (const auto& [ctx, counts] : tables_[n - 1]) sorted.emplace(ctx, &counts);
    for (const auto& [ctx, counts] : sorted) {
      out << n << ' ' << counts->total;
      for (char32_t id : ctx) out << ' ' << static_cast<TokenId>(id);
      out << " |";
      for (auto [id, c] : counts->next) out << ' ' << id << ':' << c;
      out << '\n';
    }
  }
  return out.str();
}

NGramLM NGramLM::parse(std::string_view text) {
  LineReader reader(text);
  auto header = reader.expect("header");
  if (header != std::string(kMagic) + " " + std::to_string(kFormatVersion)) {
    throw DataError("not an n-gram model file (bad header)");
  }
  const auto order = parse_number<std::size_t>(field(reader.expect("order"), "order", reader.line_no()),
                                               reader.line_no());
  const auto add_k = parse_number<double>(field(reader.expect("add_k"), "add_k", reader.line_no()),
                                          reader.line_no());
  const auto vocab_size = parse_number<std::size_t>(
      field(reader.expect("vocab_size"), "vocab_size", reader.line_no()), reader.line_no());
  const auto vocab_hash = parse_number<std::uint64_t>(
      field(reader.expect("vocab_hash"), "vocab_hash", reader.line_no()), reader.line_no());
  const auto n_contexts = parse_number<std::size_t>(
      field(reader.expect("contexts"), "contexts", reader.line_no()), reader.line_no());
  if (order < 1 || order > 16) throw DataError("model file: unsupported order");

  std::vector<std::unordered_map<std::u32string, ContextCounts>> tables(order);
  for (std::size_t i = 0; i < n_contexts; ++i) {
    auto line = reader.expect("context line");
    const auto bar = line.find('|');
    if (bar == std::string_view::npos) throw DataError("model file line " + std::to_string(reader.line_no()) + ": missing '|'");
    auto head = split_spaces(line.substr(0, bar));
    auto tail = split_spaces(line.substr(bar + 1));
    if (head.size() < 2) throw DataError("model file line " + std::to_string(reader.line_no()) + ": short context");
    const auto n = parse_number<std::size_t>(head[0], reader.line_no());
    if (n < 1 || n > order || head.size() != n + 1) {
      throw DataError("model file line " + std::to_string(reader.line_no()) + ": bad context length");
    }
    ContextCounts counts;
    counts.total = parse_number<std::uint64_t>(head[1], reader.line_no());
    std::u32string ctx;
    for (std::size_t j = 2; j < head.size(); ++j) {
      ctx.push_back(static_cast<char32_t>(parse_number<TokenId>(head[j], reader.line_no())));
    }
    for (auto entry : tail) {
      const auto colon = entry.find(':');
      if (colon == std::string_view::npos) throw DataError("model file line " + std::to_string(reader.line_no()) + ": bad entry");
      counts.next.emplace_back(parse_number<TokenId>(entry.substr(0, colon), reader.line_no()),
                               parse_number<std::uint64_t>(entry.substr(colon + 1), reader.line_no()));
    }
    if (!std::is_sorted(counts.next.begin(), counts.next.end())) {
      throw DataError("model file line " + std::to_string(reader.line_no()) + ": entries not sorted");
    }
    tables[n - 1].emplace(std::move(ctx), std::move(counts));
  }
  return NGramLM(order, add_k, vocab_size, vocab_hash, std::move(tables));
}

void NGramLM::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

NGramLM NGramLM::load(const std::filesystem::path& path) { return parse(read_file(path)); }

NGramLM train_lm(std::span<const TokenSequence> corpus, const Vocabulary& vocab, std::size_t order, double add_k) {
  if (corpus.empty()) throw ConfigError("train_lm: corpus is empty");
  if (order < 1) throw ConfigError("train_lm: order must be >= 1");
  if (!(add_k >= 0.0)) throw ConfigError("train_lm: add_k must be >= 0");

  std::vector<std::unordered_map<std::u32string, std::unordered_map<TokenId, std::uint64_t>>> raw(order);
  for (const auto& doc : corpus) {
    validate_sequence(vocab, doc);
    TokenSequence seq(doc.begin(), doc.end());
    if (seq.empty() || seq.back() != vocab.eos_id()) seq.push_back(vocab.eos_id());
    for (std::size_t i = 0; i < seq.size(); ++i) {
      TokenSpan history(seq.data(), i);
      for (std::size_t n = 1; n <= order; ++n) ++raw[n - 1][context_key(history, n - 1)][seq[i]];
    }
  }
  std::vector<std::unordered_map<std::u32string, NGramLM::ContextCounts>> tables(order);
  for (std::size_t n = 0; n < order; ++n) {
    for (auto& [ctx, next] : raw[n]) {
      NGramLM::ContextCounts counts;
      counts.next.assign(next.begin(), next.end());
      std::sort(counts.next.begin(), counts.next.end());
      for (auto [id, c] : counts.next) counts.total += c;
      tables[n].emplace(ctx, std::move(counts));
    }
  }
  return NGramLM(order, add_k, vocab.size(), vocab.hash(), std::move(tables));
}

}  // namespace advpara
