#include "pdmp/models/potential.hpp"

#include <cmath>

#include "pdmp/errors.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

namespace {

double sigmoid(double r) {
  if (r >= 0.0) return 1.0 / (1.0 + std::exp(-r));
  const double e = std::exp(r);
  return e / (1.0 + e);
}

/// log(1 + e^r) without overflow.
double log1pexp(double r) { return r > 0.0 ? r + std::log1p(std::exp(-r)) : std::log1p(std::exp(r)); }

}  // namespace

std::shared_ptr<GaussianPotential> GaussianPotential::standard(int d) {
  return diagonal(Vector::Ones(d), Vector::Zero(d));
}

std::shared_ptr<GaussianPotential> GaussianPotential::diagonal(Vector precision, Vector mean) {
  if (precision.size() != mean.size()) throw InvalidConfig("precision and mean sizes differ");
  if ((precision.array() <= 0.0).any()) throw InvalidConfig("precision must be positive");
  std::shared_ptr<GaussianPotential> p(new GaussianPotential());
  p->diagonal_ = true;
  p->diag_ = std::move(precision);
  p->mean_ = std::move(mean);
  return p;
}

std::shared_ptr<GaussianPotential> GaussianPotential::dense(Eigen::MatrixXd precision, Vector mean) {
  if (precision.rows() != mean.size() || precision.cols() != mean.size()) {
    throw InvalidConfig("precision matrix shape does not match mean");
  }
  std::shared_ptr<GaussianPotential> p(new GaussianPotential());
  p->diagonal_ = false;
  p->diag_ = precision.diagonal();
  p->dense_ = std::move(precision);
  p->mean_ = std::move(mean);
  return p;
}

double GaussianPotential::value(const Vector& x) const {
  const Vector r = x - mean_;
  return 0.5 * r.dot(apply(r));
}

void GaussianPotential::gradient(const Vector& x, Vector& grad) const { grad = apply(x - mean_); }

double GaussianPotential::partial(const Vector& x, int i) const {
  if (diagonal_) return diag_(i) * (x(i) - mean_(i));
  return dense_.row(i).dot(x - mean_);
}

std::optional<double> GaussianPotential::curvature_bound(const Vector& u, const Vector& w) const {
  return std::abs(u.dot(apply(w)));
}

Vector GaussianPotential::apply(const Vector& w) const {
  if (diagonal_) return diag_.cwiseProduct(w);
  return dense_ * w;
}

double GaussianPotential::apply_row(const Vector& w, int i) const {
  if (diagonal_) return diag_(i) * w(i);
  return dense_.row(i).dot(w);
}

LogisticRegression::LogisticRegression(Eigen::MatrixXd covariates, Eigen::VectorXd labels, double prior_sd)
    : a_(std::move(covariates)), y_(std::move(labels)), prior_precision_(1.0 / (prior_sd * prior_sd)) {
  if (a_.rows() != y_.size() || a_.rows() == 0) throw InvalidConfig("logistic regression: bad data shape");
  if (!(prior_sd > 0.0)) throw InvalidConfig("logistic regression: prior_sd must be positive");
}

std::shared_ptr<LogisticRegression> LogisticRegression::synthetic(int n, int d, std::uint64_t seed, double prior_sd) {
  Rng rng(splitmix64(seed ^ 0x10915ULL));
  Eigen::MatrixXd a(n, d);
  Eigen::VectorXd y(n);
  Vector truth(d);
  for (int k = 0; k < d; ++k) truth(k) = (k % 2 == 0 ? 1.0 : -1.0) * (0.5 + 0.25 * k);
  for (int j = 0; j < n; ++j) {
    a(j, 0) = 1.0;
    for (int k = 1; k < d; ++k) a(j, k) = rng.normal();
    y(j) = rng.uniform() < sigmoid(a.row(j).dot(truth)) ? 1.0 : 0.0;
  }
  return std::make_shared<LogisticRegression>(std::move(a), std::move(y), prior_sd);
}

double LogisticRegression::value(const Vector& x) const {
  double acc = 0.5 * prior_precision_ * x.squaredNorm();
  for (int j = 0; j < a_.rows(); ++j) {
    const double r = a_.row(j).dot(x);
    acc += log1pexp(r) - y_(j) * r;
  }
  return acc;
}

void LogisticRegression::gradient(const Vector& x, Vector& grad) const {
  grad = prior_precision_ * x;
  for (int j = 0; j < a_.rows(); ++j) {
    const double r = a_.row(j).dot(x);
    grad += (sigmoid(r) - y_(j)) * a_.row(j).transpose();
  }
}

std::optional<double> LogisticRegression::curvature_bound(const Vector& u, const Vector& w) const {
  double acc = prior_precision_ * std::abs(u.dot(w));
  for (int j = 0; j < a_.rows(); ++j) acc += 0.25 * std::abs(a_.row(j).dot(u)) * std::abs(a_.row(j).dot(w));
  return acc;
}

double LogisticRegression::term_value(int j, const Vector& x) const {
  const double r = a_.row(j).dot(x);
  return static_cast<double>(a_.rows()) * (log1pexp(r) - y_(j) * r) + 0.5 * prior_precision_ * x.squaredNorm();
}

double LogisticRegression::term_partial(int j, const Vector& x, int i) const {
  const double r = a_.row(j).dot(x);
  return static_cast<double>(a_.rows()) * (sigmoid(r) - y_(j)) * a_(j, i) + prior_precision_ * x(i);
}

double LogisticRegression::term_curvature_bound(int j, const Vector& u, const Vector& w) const {
  return static_cast<double>(a_.rows()) * 0.25 * std::abs(a_.row(j).dot(u)) * std::abs(a_.row(j).dot(w)) +
         prior_precision_ * std::abs(u.dot(w));
}

TermSum::TermSum(std::vector<std::shared_ptr<const Potential>> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw InvalidConfig("TermSum needs at least one term");
  for (const auto& p : parts_) {
    if (p->dim() != parts_.front()->dim()) throw InvalidConfig("TermSum terms differ in dimension");
  }
}

double TermSum::value(const Vector& x) const {
  double acc = 0.0;
  for (const auto& p : parts_) acc += p->value(x);
  return acc / static_cast<double>(parts_.size());
}

void TermSum::gradient(const Vector& x, Vector& grad) const {
  grad = Vector::Zero(dim());
  Vector g(dim());
  for (const auto& p : parts_) {
    p->gradient(x, g);
    grad += g;
  }
  grad /= static_cast<double>(parts_.size());
}

std::optional<double> TermSum::curvature_bound(const Vector& u, const Vector& w) const {
  double acc = 0.0;
  for (const auto& p : parts_) {
    const auto b = p->curvature_bound(u, w);
    if (!b) return std::nullopt;
    acc += *b;
  }
  return acc / static_cast<double>(parts_.size());
}

double TermSum::term_curvature_bound(int j, const Vector& u, const Vector& w) const {
  const auto b = parts_[j]->curvature_bound(u, w);
  if (!b) throw NoSimulationPath("term has no curvature bound");
  return *b;
}

}  // namespace pdmp
