#pragma once

#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advpara/lm/ngram.hpp"
#include "advpara/text/tokenizer.hpp"

namespace advpara::eval {

enum class Verdict { win, tie, loss };

std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view name);

/// Rates a paraphrase against its original on a 1..5 scale and compares two
/// paraphrases head to head. Implementations may throw to signal a failed
/// judgement for one item.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string id() const = 0;
  virtual int rate(std::string_view original, std::string_view paraphrase) const = 0;
  // Verdict for `a` against `b`.
  virtual Verdict compare(std::string_view original, std::string_view a, std::string_view b) const = 0;
};

const std::set<std::string>& default_stopwords();

/// Content-word Jaccard overlap mapped to a rating (>= 0.6 -> 5, >= 0.45 -> 4,
/// >= 0.3 -> 3, >= 0.15 -> 2, else 1), minus one point (floor 1) when the
/// paraphrase's perplexity under the evaluation model exceeds twice the
/// original's.
class HeuristicJudge final : public Judge {
 public:
  HeuristicJudge(const Vocabulary& vocab, std::shared_ptr<const NGramLM> eval_lm,
                 std::set<std::string> stopwords = default_stopwords(), TokenizerConfig tokenizer = {});

  std::string id() const override { return "heuristic"; }
  int rate(std::string_view original, std::string_view paraphrase) const override;
  Verdict compare(std::string_view original, std::string_view a, std::string_view b) const override;

  double content_overlap(std::string_view original, std::string_view paraphrase) const;
  double perplexity_ratio(std::string_view original, std::string_view paraphrase) const;
  static int rating_from(double overlap, double perplexity_ratio);

 private:
  std::set<std::string> content_words(std::string_view text) const;

  const Vocabulary& vocab_;
  std::shared_ptr<const NGramLM> lm_;
  std::set<std::string> stopwords_;
  TokenizerConfig tokenizer_;
};

struct QualityItem {
  std::string id;
  std::string original;
  std::string paraphrase;
  std::optional<std::string> rival;  // compared head to head when present
};

struct QualityRecord {
  std::string id;
  std::optional<int> rating;
  std::optional<Verdict> verdict;
  std::string error;
};

struct QualityReport {
  std::vector<QualityRecord> records;
  std::size_t failures = 0;
  double mean_rating = 0.0;
  std::size_t wins = 0;
  std::size_t ties = 0;
  std::size_t losses = 0;

  double win_rate() const;
  std::string to_jsonl() const;
};

/// Rates every item; failed items are flagged and left out of the aggregates.
QualityReport quality_report(std::span<const QualityItem> items, const Judge& judge);

}  // namespace advpara::eval
