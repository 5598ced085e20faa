#include "advpara/detectors/logistic.hpp"

#include <cmath>
#include <optional>

#include "advpara/util/error.hpp"
#include "advpara/util/rng.hpp"

namespace advpara::detectors {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_design(std::span<const double> weights, std::span<const std::vector<double>> rows,
                  std::span<const int> labels) {
  if (rows.empty() || rows.size() != labels.size()) throw InvariantError("logistic: rows/labels mismatch");
  for (const auto& r : rows) {
    if (r.size() + 1 != weights.size()) throw InvariantError("logistic: weight dimension mismatch");
  }
}

}  // namespace

Standardizer Standardizer::fit(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw InvariantError("standardizer needs at least one row");
  const std::size_t d = rows.front().size();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  s.degenerate.assign(d, false);
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
  }
  for (double& m : s.mean) m /= n;
  std::vector<double> var(d, 0.0);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) var[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / n);
    if (sd > 1e-12) {
      s.scale[j] = sd;
    } else {
      s.degenerate[j] = true;
    }
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != mean.size()) throw InvariantError("standardizer: dimension mismatch");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
  return out;
}

bool Standardizer::has_degenerate() const {
  for (bool d : degenerate) {
    if (d) return true;
  }
  return false;
}

double logistic_logit(std::span<const double> weights, std::span<const double> row) {
  double z = weights.back();
  for (std::size_t j = 0; j < row.size(); ++j) z += weights[j] * row[j];
  return z;
}

double logistic_loss(std::span<const double> weights, std::span<const std::vector<double>> rows,
                     std::span<const int> labels, double l2) {
  check_design(weights, rows, labels);
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double z = logistic_logit(weights, rows[i]);
    total += softplus(z) - labels[i] * z;
  }
  double reg = 0.0;
  for (std::size_t j = 0; j + 1 < weights.size(); ++j) reg += weights[j] * weights[j];
  return total / static_cast<double>(rows.size()) + 0.5 * l2 * reg;
}

std::vector<double> logistic_gradient(std::span<const double> weights, std::span<const std::vector<double>> rows,
                                      std::span<const int> labels, double l2) {
  check_design(weights, rows, labels);
  std::vector<double> g(weights.size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double err = sigmoid(logistic_logit(weights, rows[i])) - labels[i];
    for (std::size_t j = 0; j < rows[i].size(); ++j) g[j] += err * rows[i][j];
    g.back() += err;
  }
  const double n = static_cast<double>(rows.size());
  for (double& v : g) v /= n;
  for (std::size_t j = 0; j + 1 < weights.size(); ++j) g[j] += l2 * weights[j];
  return g;
}

LogisticFit fit_logistic(std::span<const std::vector<double>> rows, std::span<const int> labels,
                         const LogisticHyperparams& hp) {
  if (rows.empty()) throw ConfigError("logistic training needs data");
  if (!(hp.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  const std::size_t d = rows.front().size();
  LogisticFit fit;
  fit.weights.assign(d + 1, 0.0);
  if (hp.init_scale > 0.0) {
    Rng rng(hp.seed);
    for (double& w : fit.weights) w = hp.init_scale * (2.0 * rng.uniform01() - 1.0);
  }
  fit.loss_history.reserve(hp.epochs + 1);
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    fit.loss_history.push_back(logistic_loss(fit.weights, rows, labels, hp.l2));
    const auto g = logistic_gradient(fit.weights, rows, labels, hp.l2);
    for (std::size_t j = 0; j < fit.weights.size(); ++j) fit.weights[j] -= hp.learning_rate * g[j];
  }
  fit.loss_history.push_back(logistic_loss(fit.weights, rows, labels, hp.l2));

  std::size_t correct = 0;
  bool strict = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double z = logistic_logit(fit.weights, rows[i]);
    const bool right = labels[i] == 1 ? z > 0.0 : z < 0.0;
    correct += right ? 1 : 0;
    strict = strict && right;
  }
  fit.train_accuracy = static_cast<double>(correct) / static_cast<double>(rows.size());
  fit.separable = strict;
  return fit;
}

namespace {

class LogisticIncremental final : public IncrementalScorer {
 public:
  explicit LogisticIncremental(const LogisticDetector& det) : det_(det), acc_(det.lm().vocab_size()) {}

  void prepare_step() override {
    view_.emplace(det_.lm(), history_);
    ranks_ = view_->rank_table();
  }

  DetectorScore score_candidate(TokenId c) const override {
    if (history_.size() + 1 < det_.min_length()) return DetectorScore::neutral();
    return det_.score_features(acc_.with_candidate(observation(c), c));
  }

  void push(TokenId token) override {
    if (!view_) prepare_step();
    acc_.add(observation(token), token);
    history_.push_back(token);
    view_.reset();
  }

  std::size_t length() const override { return history_.size(); }

 private:
  TokenObservation observation(TokenId c) const {
    if (!view_) throw InvariantError("incremental scorer used before prepare_step()");
    return {std::max(view_->log_probs().at(c), kLogProbFloor), ranks_[c]};
  }

  const LogisticDetector& det_;
  TokenSequence history_;
  FeatureAccumulator acc_;
  std::optional<ConditionalView> view_;
  std::vector<std::uint32_t> ranks_;
};

}  // namespace

LogisticDetector::LogisticDetector(std::string id, std::shared_ptr<const NGramLM> lm, Standardizer standardizer,
                                   std::vector<double> weights, TrainingInfo info)
    : id_(std::move(id)),
      lm_(std::move(lm)),
      standardizer_(std::move(standardizer)),
      weights_(std::move(weights)),
      info_(info) {
  if (!lm_) throw ConfigError("logistic detector needs a reference model");
  if (weights_.size() != kFeatureDim + 1 || standardizer_.mean.size() != kFeatureDim ||
      standardizer_.scale.size() != kFeatureDim) {
    throw DataError("logistic detector: parameter dimension mismatch");
  }
  for (double w : weights_) {
    if (!std::isfinite(w)) throw DataError("logistic detector: non-finite weight");
  }
  if (standardizer_.degenerate.size() != kFeatureDim) standardizer_.degenerate.assign(kFeatureDim, false);
}

DetectorScore LogisticDetector::score_features(const FeatureVector& f) const {
  const auto z = standardizer_.apply(f);
  return {sigmoid(logistic_logit(weights_, z)), ScoreFlag::ok};
}

DetectorScore LogisticDetector::score(TokenSpan text) const {
  if (text.size() < kMinLength) return DetectorScore::neutral();
  return score_features(extract_features(*lm_, text));
}

std::unique_ptr<IncrementalScorer> LogisticDetector::incremental() const {
  return std::make_unique<LogisticIncremental>(*this);
}

LogisticDetector train_logistic(std::span<const TokenSequence> positives, std::span<const TokenSequence> negatives,
                                std::shared_ptr<const NGramLM> lm, const LogisticHyperparams& hp, std::string id) {
  if (positives.empty() || negatives.empty()) throw ConfigError("train_logistic: both classes must be non-empty");
  if (!lm) throw ConfigError("train_logistic: missing reference model");
  std::vector<std::vector<double>> raw;
  std::vector<int> labels;
  auto add = [&](std::span<const TokenSequence> texts, int label) {
    for (const auto& t : texts) {
      if (t.empty()) throw DataError("train_logistic: empty training text");
      const auto f = extract_features(*lm, t);
      raw.emplace_back(f.begin(), f.end());
      labels.push_back(label);
    }
  };
  add(positives, 1);
  add(negatives, 0);

  Standardizer standardizer = Standardizer::fit(raw);
  std::vector<std::vector<double>> rows;
  rows.reserve(raw.size());
  for (const auto& r : raw) rows.push_back(standardizer.apply(r));

  LogisticFit fit = fit_logistic(rows, labels, hp);
  TrainingInfo info{hp.epochs, hp.learning_rate, hp.seed, fit.loss_history.back(), fit.separable,
                    standardizer.has_degenerate()};
  return LogisticDetector(std::move(id), std::move(lm), std::move(standardizer), std::move(fit.weights), info);
}

}  // namespace advpara::detectors
