#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "pdmp/state.hpp"

namespace pdmp {

class GaussianPotential;

/// Negative log-density psi of a target pi(x) ~ exp(-psi(x)).
class Potential {
 public:
  virtual ~Potential() = default;

  virtual int dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual void gradient(const Vector& x, Vector& grad) const = 0;

  virtual double partial(const Vector& x, int i) const {
    Vector g(dim());
    gradient(x, g);
    return g(i);
  }

  /// sup_x |u^T Hess psi(x) w|, if known. Used for thinning bounds.
  virtual std::optional<double> curvature_bound(const Vector& u, const Vector& w) const { return std::nullopt; }

  /// Non-null for quadratic potentials psi(x) = (x - mu)^T A (x - mu) / 2.
  virtual const GaussianPotential* as_gaussian() const { return nullptr; }
};

/// psi(x) = (x - mu)^T A (x - mu) / 2, with A either diagonal or dense.
class GaussianPotential final : public Potential {
 public:
  /// Standard Gaussian in dimension d.
  static std::shared_ptr<GaussianPotential> standard(int d);
  static std::shared_ptr<GaussianPotential> diagonal(Vector precision, Vector mean);
  static std::shared_ptr<GaussianPotential> dense(Eigen::MatrixXd precision, Vector mean);

  int dim() const override { return static_cast<int>(mean_.size()); }
  double value(const Vector& x) const override;
  void gradient(const Vector& x, Vector& grad) const override;
  double partial(const Vector& x, int i) const override;
  std::optional<double> curvature_bound(const Vector& u, const Vector& w) const override;
  const GaussianPotential* as_gaussian() const override { return this; }

  bool is_diagonal() const { return diagonal_; }
  const Vector& mean() const { return mean_; }
  const Vector& diag() const { return diag_; }
  /// A w.
  Vector apply(const Vector& w) const;
  /// (A w)_i.
  double apply_row(const Vector& w, int i) const;

 private:
  GaussianPotential() = default;

  bool diagonal_ = true;
  Vector diag_;
  Eigen::MatrixXd dense_;
  Vector mean_;
};

/// A potential written as an average of N terms, psi = (1/N) sum_j psi_j, so
/// that a single uniformly drawn term is an unbiased estimate of psi.
class TermPotential : public Potential {
 public:
  virtual int terms() const = 0;
  virtual double term_value(int j, const Vector& x) const = 0;
  virtual double term_partial(int j, const Vector& x, int i) const = 0;
  /// sup_x |u^T Hess psi_j(x) w|.
  virtual double term_curvature_bound(int j, const Vector& u, const Vector& w) const = 0;
};

/// Bayesian logistic regression with a Gaussian prior N(0, sigma^2 I).
///
/// Term j is N * l_j(x) + |x|^2 / (2 sigma^2), where l_j is the negative
/// log-likelihood of datum j; psi is the mean of the terms.
class LogisticRegression final : public TermPotential {
 public:
  LogisticRegression(Eigen::MatrixXd covariates, Eigen::VectorXd labels, double prior_sd);

  /// Synthetic data: covariates N(0, I) with an intercept column, labels drawn
  /// from the logistic model at `truth`.
  static std::shared_ptr<LogisticRegression> synthetic(int n, int d, std::uint64_t seed, double prior_sd = 10.0);

  int dim() const override { return static_cast<int>(a_.cols()); }
  double value(const Vector& x) const override;
  void gradient(const Vector& x, Vector& grad) const override;
  std::optional<double> curvature_bound(const Vector& u, const Vector& w) const override;

  int terms() const override { return static_cast<int>(a_.rows()); }
  double term_value(int j, const Vector& x) const override;
  double term_partial(int j, const Vector& x, int i) const override;
  double term_curvature_bound(int j, const Vector& u, const Vector& w) const override;

  const Eigen::MatrixXd& covariates() const { return a_; }
  const Eigen::VectorXd& labels() const { return y_; }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd y_;
  double prior_precision_;
};

/// Average of explicitly given potentials.
class TermSum final : public TermPotential {
 public:
  explicit TermSum(std::vector<std::shared_ptr<const Potential>> parts);

  int dim() const override { return parts_.front()->dim(); }
  double value(const Vector& x) const override;
  void gradient(const Vector& x, Vector& grad) const override;
  std::optional<double> curvature_bound(const Vector& u, const Vector& w) const override;

  int terms() const override { return static_cast<int>(parts_.size()); }
  double term_value(int j, const Vector& x) const override { return parts_[j]->value(x); }
  double term_partial(int j, const Vector& x, int i) const override { return parts_[j]->partial(x, i); }
  double term_curvature_bound(int j, const Vector& u, const Vector& w) const override;

 private:
  std::vector<std::shared_ptr<const Potential>> parts_;
};

}  // namespace pdmp
