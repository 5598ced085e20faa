#include "advpara/eval/roc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "advpara/util/error.hpp"
#include "advpara/util/io.hpp"

namespace advpara::eval {

void ScoredDataset::validate() const {
  if (positive_scores.empty() || negative_scores.empty()) {
    throw DataError("scored dataset '" + dataset_id + "' needs both AI and human scores");
  }
  auto finite = [](double x) { return std::isfinite(x); };
  if (!std::ranges::all_of(positive_scores, finite) || !std::ranges::all_of(negative_scores, finite)) {
    throw DataError("scored dataset '" + dataset_id + "' contains a non-finite score");
  }
}

std::vector<RocPoint> roc_curve(const ScoredDataset& data) {
  data.validate();
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(data.positive_scores.size() + data.negative_scores.size());
  for (double s : data.positive_scores) scored.emplace_back(s, true);
  for (double s : data.negative_scores) scored.emplace_back(s, false);
  std::ranges::sort(scored, [](const auto& a, const auto& b) { return a.first > b.first; });

  const double n_pos = static_cast<double>(data.positive_scores.size());
  const double n_neg = static_cast<double>(data.negative_scores.size());
  std::vector<RocPoint> curve{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < scored.size();) {
    const double threshold = scored[i].first;
    for (; i < scored.size() && scored[i].first == threshold; ++i) {
      if (scored[i].second) {
        ++tp;
      } else {
        ++fp;
      }
    }
    curve.push_back({static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos, threshold});
  }
  return curve;
}

double auc(const ScoredDataset& data) {
  const auto curve = roc_curve(data);
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

double tpr_at_fpr(const ScoredDataset& data, double target_fpr) {
  if (!(target_fpr >= 0.0 && target_fpr <= 1.0)) throw ConfigError("target FPR must lie in [0, 1]");
  double best = 0.0;
  for (const auto& p : roc_curve(data)) {
    if (p.fpr <= target_fpr) best = std::max(best, p.tpr);
  }
  return best;
}

DetectionMetrics detection_metrics(const ScoredDataset& data) {
  return {auc(data), tpr_at_fpr(data, 0.01)};
}

std::string roc_to_csv(const std::vector<RocPoint>& curve) {
  std::string out = "fpr,tpr,threshold\n";
  for (const auto& p : curve) {
    out += format_double(p.fpr) + "," + format_double(p.tpr) + ",";
    out += std::isinf(p.threshold) ? std::string("inf") : format_double(p.threshold);
    out += "\n";
  }
  return out;
}

}  // namespace advpara::eval
