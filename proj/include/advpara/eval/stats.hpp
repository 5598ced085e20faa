#pragma once

#include <span>

namespace advpara::eval {

double mean(std::span<const double> xs);
// Sample standard deviation (n - 1).
double stddev(std::span<const double> xs);

struct PairedTest {
  double mean_difference = 0.0;  // mean(a - b)
  double t = 0.0;
  double p_value = 1.0;          // one-sided, H1: mean(a - b) < 0
};

/// Paired Student t-test of H1: E[a] < E[b].
PairedTest paired_t_test_less(std::span<const double> a, std::span<const double> b);

}  // namespace advpara::eval
