#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pdmp {

/// Streaming mean and variance (Welford), mergeable across blocks.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; 0 with fewer than two samples.
  double variance() const;
  /// Standard error of the mean.
  double sem() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// One RunningStats per index (mesh point, delta, ...).
struct StatsVector {
  std::vector<RunningStats> items;

  StatsVector() = default;
  explicit StatsVector(std::size_t n) : items(n) {}
  RunningStats& operator[](std::size_t i) { return items[i]; }
  const RunningStats& operator[](std::size_t i) const { return items[i]; }
  std::size_t size() const { return items.size(); }
  void merge(const StatsVector& other);
};

double normal_cdf(double x);

/// Two-sided Kolmogorov-Smirnov statistic sup |F_n - F| of `samples` against `cdf`.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Asymptotic p-value P(sqrt(n) D > sqrt(n) d) from the Kolmogorov series.
double ks_pvalue(double d, std::size_t n);

/// Asymptotic critical value of D at level alpha (1.628 / sqrt(n) at 1%).
double ks_critical(std::size_t n, double alpha = 0.01);

/// Two-sided Student t quantile t_{1 - alpha/2, dof}.
double student_t_quantile(double alpha, double dof);

}  // namespace pdmp
