#include "advpara/eval/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "advpara/util/error.hpp"

namespace advpara::eval {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvariantError("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) throw InvariantError("standard deviation needs at least two values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

PairedTest paired_t_test_less(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvariantError("paired t-test needs equal sample sizes");
  if (a.size() < 2) throw InvariantError("paired t-test needs at least two pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];

  PairedTest out;
  out.mean_difference = mean(diff);
  const double se = stddev(diff) / std::sqrt(static_cast<double>(diff.size()));
  if (se == 0.0) {
    // Constant differences: the sign alone decides.
    out.t = out.mean_difference < 0.0   ? -std::numeric_limits<double>::infinity()
            : out.mean_difference > 0.0 ? std::numeric_limits<double>::infinity()
                                        : 0.0;
    out.p_value = out.mean_difference < 0.0 ? 0.0 : out.mean_difference > 0.0 ? 1.0 : 0.5;
    return out;
  }
  out.t = out.mean_difference / se;
  boost::math::students_t dist(static_cast<double>(diff.size() - 1));
  out.p_value = boost::math::cdf(dist, out.t);
  return out;
}

}  // namespace advpara::eval
