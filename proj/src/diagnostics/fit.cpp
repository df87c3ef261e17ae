#include "pdmp/diagnostics/fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pdmp/diagnostics/stats.hpp"
#include "pdmp/errors.hpp"

namespace pdmp {

LogLogFit fit_loglog_order(std::span<const double> deltas, std::span<const double> errors,
                           std::span<const double> stderrs, double confidence) {
  const std::size_t n = deltas.size();
  if (n < 3 || errors.size() != n) throw InsufficientSignal("order fit needs at least 3 deltas");
  if (!stderrs.empty() && stderrs.size() != n) throw InsufficientSignal("stderrs must match deltas");
  const auto [lo, hi] = std::minmax_element(deltas.begin(), deltas.end());
  if (!(*lo > 0.0) || *hi / *lo < 4.0) throw InsufficientSignal("deltas must span at least a factor of 4");

  bool weighted = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double se = stderrs.empty() ? 0.0 : stderrs[i];
    if (!(errors[i] > 2.0 * se) || !(errors[i] > 0.0)) {
      throw InsufficientSignal("error " + std::to_string(errors[i]) + " at delta " + std::to_string(deltas[i]) +
                               " is not above twice its standard error " + std::to_string(se));
    }
    if (se > 0.0) weighted = true;
  }

  std::vector<double> x(n), y(n), w(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(deltas[i]);
    y[i] = std::log(errors[i]);
    if (weighted) {
      const double rel = stderrs[i] / errors[i];
      w[i] = rel > 0.0 ? 1.0 / (rel * rel) : 0.0;
    }
  }
  if (weighted) {
    double wmax = 0.0;
    for (double v : w) wmax = std::max(wmax, v);
    for (auto& v : w) {
      if (v == 0.0) v = wmax > 0.0 ? wmax : 1.0;
    }
  }

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;

  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += w[i] * r * r;
  }
  const double dof = static_cast<double>(n - 2);
  fit.slope_se = std::sqrt(rss / dof / sxx);
  const double t = student_t_quantile(1.0 - confidence, dof);
  fit.ci_low = fit.slope - t * fit.slope_se;
  fit.ci_high = fit.slope + t * fit.slope_se;
  return fit;
}

}  // namespace pdmp
