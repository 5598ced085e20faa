#include "advpara/detectors/zero_shot.hpp"

#include <cmath>
#include <optional>

#include "advpara/util/error.hpp"

namespace advpara::detectors {
namespace {

double top10_fraction(const NGramLM& lm, TokenSpan text) {
  std::size_t hits = 0;
  for (const auto& o : observe_text(lm, text)) hits += o.rank < 10 ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(text.size());
}

class GltrIncremental final : public IncrementalScorer {
 public:
  explicit GltrIncremental(const GltrDetector& det) : det_(det) {}

  void prepare_step() override {
    view_.emplace(det_.lm(), history_);
    ranks_ = view_->rank_table();
  }

  DetectorScore score_candidate(TokenId c) const override {
    if (history_.size() + 1 < det_.min_length()) return DetectorScore::neutral();
    const std::size_t hits = top10_ + (rank(c) < 10 ? 1 : 0);
    const double frac = static_cast<double>(hits) / static_cast<double>(history_.size() + 1);
    return {sigmoid(det_.a() * frac + det_.b()), ScoreFlag::ok};
  }

  void push(TokenId token) override {
    if (!view_) prepare_step();
    top10_ += rank(token) < 10 ? 1 : 0;
    history_.push_back(token);
    view_.reset();
  }

  std::size_t length() const override { return history_.size(); }

 private:
  std::uint32_t rank(TokenId c) const {
    if (!view_) throw InvariantError("incremental scorer used before prepare_step()");
    return ranks_.at(c);
  }

  const GltrDetector& det_;
  TokenSequence history_;
  std::size_t top10_ = 0;
  std::optional<ConditionalView> view_;
  std::vector<std::uint32_t> ranks_;
};

class CurvatureIncremental final : public IncrementalScorer {
 public:
  explicit CurvatureIncremental(const CurvatureDetector& det) : det_(det) {}

  void prepare_step() override { view_.emplace(det_.lm(), history_); }

  DetectorScore score_candidate(TokenId c) const override {
    if (history_.size() + 1 < det_.min_length()) return DetectorScore::neutral();
    return {sigmoid(det_.scale() * extended(c).discrepancy()), ScoreFlag::ok};
  }

  void push(TokenId token) override {
    if (!view_) prepare_step();
    stats_ = extended(token);
    history_.push_back(token);
    view_.reset();
  }

  std::size_t length() const override { return history_.size(); }

 private:
  CurvatureStats extended(TokenId c) const {
    if (!view_) throw InvariantError("incremental scorer used before prepare_step()");
    CurvatureStats s = stats_;
    s.log_likelihood += std::max(view_->log_probs().at(c), kLogProbFloor);
    s.expected += view_->expected_log_prob();
    s.variance += view_->log_prob_variance();
    return s;
  }

  const CurvatureDetector& det_;
  TokenSequence history_;
  CurvatureStats stats_;
  std::optional<ConditionalView> view_;
};

}  // namespace

GltrDetector::GltrDetector(std::string id, std::shared_ptr<const NGramLM> lm, double a, double b)
    : id_(std::move(id)), lm_(std::move(lm)), a_(a), b_(b) {
  if (!lm_) throw ConfigError("GLTR detector needs a reference model");
  if (!std::isfinite(a_) || !std::isfinite(b_)) throw DataError("GLTR detector: non-finite parameters");
}

DetectorScore GltrDetector::score(TokenSpan text) const {
  if (text.size() < kMinLength) return DetectorScore::neutral();
  return {sigmoid(a_ * top10_fraction(*lm_, text) + b_), ScoreFlag::ok};
}

std::unique_ptr<IncrementalScorer> GltrDetector::incremental() const {
  return std::make_unique<GltrIncremental>(*this);
}

GltrDetector calibrate_gltr(std::span<const TokenSequence> positives, std::span<const TokenSequence> negatives,
                            std::shared_ptr<const NGramLM> lm, const LogisticHyperparams& hp, std::string id) {
  if (positives.empty() || negatives.empty()) throw ConfigError("calibrate_gltr: both classes must be non-empty");
  if (!lm) throw ConfigError("calibrate_gltr: missing reference model");
  std::vector<std::vector<double>> raw;
  std::vector<int> labels;
  for (const auto& t : positives) raw.push_back({top10_fraction(*lm, t)}), labels.push_back(1);
  for (const auto& t : negatives) raw.push_back({top10_fraction(*lm, t)}), labels.push_back(0);
  const Standardizer s = Standardizer::fit(raw);
  std::vector<std::vector<double>> rows;
  for (const auto& r : raw) rows.push_back(s.apply(r));
  const LogisticFit fit = fit_logistic(rows, labels, hp);
  const double a = fit.weights[0] / s.scale[0];
  const double b = fit.weights[1] - fit.weights[0] * s.mean[0] / s.scale[0];
  return GltrDetector(std::move(id), std::move(lm), a, b);
}

double CurvatureStats::discrepancy() const {
  if (!(variance > 0.0)) return 0.0;
  return (log_likelihood - expected) / std::sqrt(variance);
}

CurvatureDetector::CurvatureDetector(std::string id, std::shared_ptr<const NGramLM> lm, double scale)
    : id_(std::move(id)), lm_(std::move(lm)), scale_(scale) {
  if (!lm_) throw ConfigError("curvature detector needs a reference model");
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw ConfigError("curvature scale must be positive");
}

CurvatureStats CurvatureDetector::stats(TokenSpan text) const {
  CurvatureStats s;
  for (std::size_t i = 0; i < text.size(); ++i) {
    ConditionalView view(*lm_, text.first(i));
    s.log_likelihood += view.observe(text[i]).log_prob;
    s.expected += view.expected_log_prob();
    s.variance += view.log_prob_variance();
  }
  return s;
}

DetectorScore CurvatureDetector::score(TokenSpan text) const {
  if (text.size() < kMinLength) return DetectorScore::neutral();
  return {sigmoid(scale_ * discrepancy(text)), ScoreFlag::ok};
}

std::unique_ptr<IncrementalScorer> CurvatureDetector::incremental() const {
  return std::make_unique<CurvatureIncremental>(*this);
}

}  // namespace advpara::detectors
