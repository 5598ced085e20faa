#pragma once

#include <string>
#include <vector>

namespace advpara::eval {

/// Detector scores for AI texts (positives) and human texts (negatives).
struct ScoredDataset {
  std::vector<double> positive_scores;
  std::vector<double> negative_scores;
  std::string detector_id;
  std::string attack_id;
  std::string dataset_id;

  // Both classes non-empty, every score finite.
  void validate() const;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the (0, 0) endpoint
};

/// Threshold sweep over the distinct scores in descending order; a text is
/// flagged AI when score >= threshold. Equal scores move together in one
/// step. Starts at (0, 0) and ends at (1, 1).
std::vector<RocPoint> roc_curve(const ScoredDataset& data);

// Trapezoidal area under roc_curve.
double auc(const ScoredDataset& data);

/// Largest TPR among operating points with FPR <= target (no interpolation).
double tpr_at_fpr(const ScoredDataset& data, double target_fpr = 0.01);

struct DetectionMetrics {
  double auc = 0.0;
  double tpr_at_1pct_fpr = 0.0;
};

DetectionMetrics detection_metrics(const ScoredDataset& data);

// "fpr,tpr,threshold" rows.
std::string roc_to_csv(const std::vector<RocPoint>& curve);

}  // namespace advpara::eval
