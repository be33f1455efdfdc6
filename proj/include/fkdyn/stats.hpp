#pragma once

#include <cstdint>
#include <vector>

namespace fkdyn {

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Goodness of fit of counts against probabilities. Bins with expected count below
// min_expected are merged with their successors (in index order) into groups that
// reach it.
ChiSquare chi_square_gof(const std::vector<uint64_t>& counts, const std::vector<double>& probs,
                         double min_expected = 5.0);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  // Two-sided 95% half-width for the slope (Student t).
  double slope_ci95 = 0.0;
};

// Weighted least squares; empty weights means unit weights. With known_variance the
// weights are inverse variances and the slope CI uses the normal quantile.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w = {},
                     bool known_variance = false);

double normal_quantile(double p);
double student_t_quantile(double p, double dof);

}  // namespace fkdyn
