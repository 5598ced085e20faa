#include "advpara/lm/logits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "advpara/util/error.hpp"

namespace advpara {

std::vector<double> LogitVector::probabilities() const {
  std::vector<double> p(log_probs.size());
  std::transform(log_probs.begin(), log_probs.end(), p.begin(), [](double lp) { return std::exp(lp); });
  return p;
}

void log_normalize(std::span<double> scores) {
  const double max = *std::max_element(scores.begin(), scores.end());
  if (!std::isfinite(max)) throw InvariantError("log_normalize: no finite score");
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - max);
  const double log_z = max + std::log(sum);
  for (double& s : scores) s -= log_z;
}

void check_normalized(const LogitVector& logits, double tol) {
  double sum = 0.0;
  for (double lp : logits.log_probs) {
    if (std::isnan(lp)) throw InvariantError("log-probability is NaN");
    sum += std::exp(lp);
  }
  if (std::abs(sum - 1.0) > tol) {
    throw InvariantError("distribution not normalized: sum = " + std::to_string(sum));
  }
}

}  // namespace advpara
