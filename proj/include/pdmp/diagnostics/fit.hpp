#pragma once

#include <span>

namespace pdmp {

/// log(error) = intercept + slope log(delta), with a confidence interval.
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Weighted least squares on (log delta, log error) with weights from the
/// relative standard errors (unweighted when `stderrs` is empty or all zero).
/// The interval uses the residual scatter and a Student t quantile.
/// Throws InsufficientSignal with fewer than 3 deltas, a span below a factor
/// of 4, or an error not exceeding twice its standard error.
LogLogFit fit_loglog_order(std::span<const double> deltas, std::span<const double> errors,
                           std::span<const double> stderrs, double confidence = 0.95);

}  // namespace pdmp
