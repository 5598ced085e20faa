#pragma once

#include <memory>
#include <span>
#include <string>

#include "advpara/detectors/detector.hpp"
#include "advpara/detectors/features.hpp"
#include "advpara/detectors/logistic.hpp"

namespace advpara::detectors {

/// GLTR-style rank statistic: sigmoid(a * top10_fraction + b).
class GltrDetector final : public Detector {
 public:
  static constexpr std::size_t kMinLength = 5;

  GltrDetector(std::string id, std::shared_ptr<const NGramLM> lm, double a, double b);

  std::string id() const override { return id_; }
  std::string kind() const override { return "gltr"; }
  std::size_t min_length() const override { return kMinLength; }
  DetectorScore score(TokenSpan text) const override;
  std::unique_ptr<IncrementalScorer> incremental() const override;

  double a() const { return a_; }
  double b() const { return b_; }
  const NGramLM& lm() const { return *lm_; }
  std::shared_ptr<const NGramLM> lm_handle() const { return lm_; }

 private:
  std::string id_;
  std::shared_ptr<const NGramLM> lm_;
  double a_;
  double b_;
};

// Fits (a, b) by 1-D logistic regression on a calibration split.
GltrDetector calibrate_gltr(std::span<const TokenSequence> positives, std::span<const TokenSequence> negatives,
                            std::shared_ptr<const NGramLM> lm, const LogisticHyperparams& hp = {},
                            std::string id = "gltr");

struct CurvatureStats {
  double log_likelihood = 0.0;
  double expected = 0.0;   // sum of per-position means
  double variance = 0.0;   // sum of per-position variances
  double discrepancy() const;
};

/// Analytic conditional-probability curvature. With mu_i and sigma_i^2 the
/// exact mean and variance of log p(t) under the model's conditional at
/// position i,
///   d = (sum_i log p(x_i) - sum_i mu_i) / sqrt(sum_i sigma_i^2),
/// and the score is sigmoid(scale * d), so text the model finds typical or
/// better than typical (d >= 0) scores >= 0.5.
class CurvatureDetector final : public Detector {
 public:
  static constexpr std::size_t kMinLength = 5;

  CurvatureDetector(std::string id, std::shared_ptr<const NGramLM> lm, double scale = 1.0);

  std::string id() const override { return id_; }
  std::string kind() const override { return "curvature"; }
  std::size_t min_length() const override { return kMinLength; }
  DetectorScore score(TokenSpan text) const override;
  std::unique_ptr<IncrementalScorer> incremental() const override;

  CurvatureStats stats(TokenSpan text) const;
  double discrepancy(TokenSpan text) const { return stats(text).discrepancy(); }
  double scale() const { return scale_; }
  const NGramLM& lm() const { return *lm_; }
  std::shared_ptr<const NGramLM> lm_handle() const { return lm_; }

 private:
  std::string id_;
  std::shared_ptr<const NGramLM> lm_;
  double scale_;
};

}  // namespace advpara::detectors
