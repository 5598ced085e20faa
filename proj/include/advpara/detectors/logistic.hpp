#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "advpara/detectors/detector.hpp"
#include "advpara/detectors/features.hpp"

namespace advpara::detectors {

// Per-feature affine map to mean 0 / std 1 on the training set.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // 1 for constant features

  std::vector<bool> degenerate;

  static Standardizer fit(std::span<const std::vector<double>> rows);
  std::vector<double> apply(std::span<const double> row) const;
  bool has_degenerate() const;
};

struct LogisticHyperparams {
  std::size_t epochs = 500;
  double learning_rate = 0.5;
  double l2 = 0.0;
  std::uint64_t seed = 0;
  // Half-width of a seeded uniform init; 0 starts from zero weights.
  double init_scale = 0.0;
};

/// Logistic regression on a design matrix (rows of features, no bias
/// column). weights.back() is the bias.
struct LogisticFit {
  std::vector<double> weights;
  std::vector<double> loss_history;  // loss before each epoch, plus final
  bool separable = false;
  double train_accuracy = 0.0;
};

double logistic_loss(std::span<const double> weights, std::span<const std::vector<double>> rows,
                     std::span<const int> labels, double l2 = 0.0);
std::vector<double> logistic_gradient(std::span<const double> weights, std::span<const std::vector<double>> rows,
                                      std::span<const int> labels, double l2 = 0.0);
double logistic_logit(std::span<const double> weights, std::span<const double> row);

// Full-batch gradient descent on mean cross-entropy.
LogisticFit fit_logistic(std::span<const std::vector<double>> rows, std::span<const int> labels,
                         const LogisticHyperparams& hp);

struct TrainingInfo {
  std::size_t epochs = 0;
  double learning_rate = 0.0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  bool separable = false;
  bool degenerate_features = false;
};

/// Trained feature classifier: sigmoid(w . standardize(features) + b).
class LogisticDetector final : public Detector {
 public:
  static constexpr std::size_t kMinLength = 5;

  LogisticDetector(std::string id, std::shared_ptr<const NGramLM> lm, Standardizer standardizer,
                   std::vector<double> weights, TrainingInfo info);

  std::string id() const override { return id_; }
  std::string kind() const override { return "logistic"; }
  std::size_t min_length() const override { return kMinLength; }
  DetectorScore score(TokenSpan text) const override;
  std::unique_ptr<IncrementalScorer> incremental() const override;

  DetectorScore score_features(const FeatureVector& f) const;

  const Standardizer& standardizer() const { return standardizer_; }
  const std::vector<double>& weights() const { return weights_; }
  const TrainingInfo& training() const { return info_; }
  const NGramLM& lm() const { return *lm_; }
  std::shared_ptr<const NGramLM> lm_handle() const { return lm_; }

 private:
  std::string id_;
  std::shared_ptr<const NGramLM> lm_;
  Standardizer standardizer_;
  std::vector<double> weights_;
  TrainingInfo info_;
};

/// Positives are AI texts (label 1), negatives human texts (label 0).
LogisticDetector train_logistic(std::span<const TokenSequence> positives, std::span<const TokenSequence> negatives,
                                std::shared_ptr<const NGramLM> lm, const LogisticHyperparams& hp = {},
                                std::string id = "logistic");

}  // namespace advpara::detectors
