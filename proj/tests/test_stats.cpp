#include <doctest.h>

#include <cmath>

#include "fkdyn/error.hpp"
#include "fkdyn/stats.hpp"

using namespace fkdyn;

TEST_CASE("chi-square groups small bins instead of dropping them") {
  // 1000 equally likely bins, 2000 draws: every bin expects 2
  std::vector<double> probs(1000, 1e-3);
  std::vector<uint64_t> counts(1000, 2);
  ChiSquare c = chi_square_gof(counts, probs);
  CHECK(c.dof == 332);  // 333 groups of 3 bins; the last one absorbs the leftover bin
  CHECK(c.statistic == doctest::Approx(0.0));
  CHECK(c.p_value == doctest::Approx(1.0));
  for (size_t i = 0; i < counts.size(); ++i) counts[i] = i < 500 ? 4 : 0;
  CHECK(chi_square_gof(counts, probs).p_value < 1e-6);
}

TEST_CASE("chi-square on large bins and impossible outcomes") {
  std::vector<double> probs{0.5, 0.25, 0.25, 0.0};
  ChiSquare c = chi_square_gof({500, 250, 250, 0}, probs);
  CHECK(c.dof == 2);
  CHECK(c.statistic == doctest::Approx(0.0));
  c = chi_square_gof({500, 300, 200, 0}, probs);
  CHECK(c.statistic == doctest::Approx(20.0));
  CHECK(c.p_value == doctest::Approx(std::exp(-10.0)).epsilon(1e-9));
  c = chi_square_gof({500, 250, 249, 1}, probs);
  CHECK(c.p_value == 0.0);
  CHECK_THROWS_AS(chi_square_gof({1, 2}, {1.0}), Error);
}

TEST_CASE("linear fit") {
  std::vector<double> x{0, 1, 2, 3, 4}, y;
  for (double v : x) y.push_back(1.5 - 0.25 * v);
  LinearFit f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(-0.25));
  CHECK(f.intercept == doctest::Approx(1.5));
  CHECK(f.slope_se == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(linear_fit({0, 1}, {0, 1}), Error);
}

TEST_CASE("quantiles") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054));
  CHECK(student_t_quantile(0.975, 4) == doctest::Approx(2.776445105197793));
}
