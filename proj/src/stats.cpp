#include "fkdyn/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "fkdyn/error.hpp"

namespace fkdyn {

ChiSquare chi_square_gof(const std::vector<uint64_t>& counts, const std::vector<double>& probs, double min_expected) {
  require(counts.size() == probs.size(), ErrorCode::invalid_argument, "counts and probabilities differ in length");
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  ChiSquare out;
  int bins = 0;
  auto add = [&](double obs, double ex) {
    const double d = obs - ex;
    out.statistic += d * d / ex;
    ++bins;
  };
  // small bins are merged in index order until each group reaches min_expected
  double pool_obs = 0.0, pool_exp = 0.0, last_obs = 0.0, last_exp = 0.0;
  bool have_last = false;
  for (size_t i = 0; i < counts.size(); ++i) {
    const double ex = probs[i] * total;
    if (ex >= min_expected) {
      add(static_cast<double>(counts[i]), ex);
      continue;
    }
    pool_obs += static_cast<double>(counts[i]);
    pool_exp += ex;
    if (pool_exp >= min_expected) {
      if (have_last) add(last_obs, last_exp);
      last_obs = pool_obs;
      last_exp = pool_exp;
      have_last = true;
      pool_obs = pool_exp = 0.0;
    }
  }
  // the remainder joins the last complete group
  if (have_last || pool_exp > 0.0) {
    last_obs += pool_obs;
    last_exp += pool_exp;
    if (last_exp > 0.0) add(last_obs, last_exp);
  }
  for (size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0 && probs[i] <= 0.0) out.statistic = std::numeric_limits<double>::infinity();
  out.dof = bins - 1;
  if (out.dof < 1) {
    if (!std::isfinite(out.statistic)) out.p_value = 0.0;
    return out;
  }
  boost::math::chi_squared dist(out.dof);
  out.p_value = std::isfinite(out.statistic) ? boost::math::cdf(boost::math::complement(dist, out.statistic)) : 0.0;
  return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w,
                     bool known_variance) {
  const size_t n = x.size();
  require(n >= 3 && y.size() == n && (w.empty() || w.size() == n), ErrorCode::invalid_argument,
          "linear fit needs at least three matching points");
  double sw = 0, sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sxx += wi * (x[i] - mx) * (x[i] - mx);
    sxy += wi * (x[i] - mx) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += wi * r * r;
  }
  if (known_variance) {
    f.slope_se = std::sqrt(1.0 / sxx);
    f.slope_ci95 = normal_quantile(0.975) * f.slope_se;
    return f;
  }
  const double dof = static_cast<double>(n) - 2.0;
  f.slope_se = std::sqrt(rss / dof / sxx);
  f.slope_ci95 = student_t_quantile(0.975, dof) * f.slope_se;
  return f;
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }

double student_t_quantile(double p, double dof) { return boost::math::quantile(boost::math::students_t(dof), p); }

}  // namespace fkdyn
