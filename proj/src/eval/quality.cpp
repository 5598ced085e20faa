#include "advpara/eval/quality.hpp"

#include <algorithm>
#include <exception>

#include <json.hpp>

#include "advpara/lm/conditional_lm.hpp"
#include "advpara/util/error.hpp"

namespace advpara::eval {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::win: return "win";
    case Verdict::tie: return "tie";
    case Verdict::loss: return "loss";
  }
  return "tie";
}

Verdict parse_verdict(std::string_view name) {
  if (name == "win") return Verdict::win;
  if (name == "tie") return Verdict::tie;
  if (name == "loss") return Verdict::loss;
  throw DataError("unknown verdict: " + std::string(name));
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words{
      "a",     "about", "after", "all",   "across", "also",  "an",    "and",   "any",   "are",   "as",    "at",
      "be",    "been",  "because", "before", "beside", "but",  "by",    "can",   "could", "did",   "do",    "does",  "each",  "every", "for",
      "from",  "had",   "has",   "have",  "he",    "her",   "his",   "how",   "i",     "if",    "in",
      "into",  "is",    "it",    "its",   "may",   "more",  "most",  "much",  "must",  "near",  "no",    "not",
      "of",    "on",    "one",   "or",    "our",   "she",   "should", "so",   "some",  "such",  "than",
      "that",  "the",   "their", "them",  "then",  "there", "these", "they",  "this",  "those", "through",
      "to",    "under", "up",    "very",  "was",   "we",    "were",  "what",  "when",  "where", "which",
      "while", "who",   "will",  "with",  "would", "yet",   "you",   "your"};
  return words;
}

HeuristicJudge::HeuristicJudge(const Vocabulary& vocab, std::shared_ptr<const NGramLM> eval_lm,
                               std::set<std::string> stopwords, TokenizerConfig tokenizer)
    : vocab_(vocab), lm_(std::move(eval_lm)), stopwords_(std::move(stopwords)), tokenizer_(tokenizer) {
  if (!lm_) throw ConfigError("heuristic judge needs an evaluation language model");
  if (lm_->vocab_hash() != vocab_.hash()) throw ConfigError("judge language model was trained on another vocabulary");
}

std::set<std::string> HeuristicJudge::content_words(std::string_view text) const {
  std::set<std::string> out;
  for (auto& tok : segment(text, tokenizer_)) {
    if (is_punctuation_token(tok) || tok == Vocabulary::kEosToken || tok == Vocabulary::kUnkToken) continue;
    if (stopwords_.contains(tok)) continue;
    out.insert(std::move(tok));
  }
  return out;
}

double HeuristicJudge::content_overlap(std::string_view original, std::string_view paraphrase) const {
  const auto a = content_words(original);
  const auto b = content_words(paraphrase);
  std::size_t common = 0;
  for (const auto& w : a) common += b.contains(w) ? 1 : 0;
  const std::size_t uni = a.size() + b.size() - common;
  return uni == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(uni);
}

double HeuristicJudge::perplexity_ratio(std::string_view original, std::string_view paraphrase) const {
  auto ppl = [&](std::string_view text) {
    TokenSequence seq = encode(vocab_, text, tokenizer_);
    seq.push_back(vocab_.eos_id());
    return perplexity(*lm_, {}, seq);
  };
  return ppl(paraphrase) / ppl(original);
}

int HeuristicJudge::rating_from(double overlap, double perplexity_ratio) {
  int rating = overlap >= 0.6 ? 5 : overlap >= 0.45 ? 4 : overlap >= 0.3 ? 3 : overlap >= 0.15 ? 2 : 1;
  if (perplexity_ratio > 2.0) rating = std::max(1, rating - 1);
  return rating;
}

int HeuristicJudge::rate(std::string_view original, std::string_view paraphrase) const {
  if (segment(paraphrase, tokenizer_).empty()) throw DataError("empty paraphrase");
  return rating_from(content_overlap(original, paraphrase), perplexity_ratio(original, paraphrase));
}

Verdict HeuristicJudge::compare(std::string_view original, std::string_view a, std::string_view b) const {
  const int ra = rate(original, a);
  const int rb = rate(original, b);
  return ra > rb ? Verdict::win : ra < rb ? Verdict::loss : Verdict::tie;
}

double QualityReport::win_rate() const {
  const std::size_t n = wins + ties + losses;
  return n == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(n);
}

std::string QualityReport::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["rating"] = r.rating ? nlohmann::ordered_json(*r.rating) : nlohmann::ordered_json(nullptr);
    if (r.verdict) j["verdict"] = to_string(*r.verdict);
    if (!r.error.empty()) j["error"] = r.error;
    out += j.dump() + "\n";
  }
  return out;
}

QualityReport quality_report(std::span<const QualityItem> items, const Judge& judge) {
  QualityReport report;
  double rating_sum = 0.0;
  std::size_t rated = 0;
  for (const auto& item : items) {
    QualityRecord rec;
    rec.id = item.id;
    try {
      rec.rating = judge.rate(item.original, item.paraphrase);
      if (item.rival) rec.verdict = judge.compare(item.original, item.paraphrase, *item.rival);
    } catch (const std::exception& e) {
      rec.rating.reset();
      rec.verdict.reset();
      rec.error = e.what();
    }
    if (rec.rating) {
      rating_sum += *rec.rating;
      ++rated;
      if (rec.verdict) {
        auto& counter = *rec.verdict == Verdict::win ? report.wins
                        : *rec.verdict == Verdict::tie ? report.ties
                                                       : report.losses;
        ++counter;
      }
    } else {
      ++report.failures;
    }
    report.records.push_back(std::move(rec));
  }
  report.mean_rating = rated == 0 ? 0.0 : rating_sum / static_cast<double>(rated);
  return report;
}

}  // namespace advpara::eval
