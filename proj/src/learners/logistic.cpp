#include <algorithm>
#include <cmath>
#include <vector>

#include "faultrank/common.hpp"
#include "faultrank/kernels.hpp"
#include "faultrank/learners.hpp"

namespace faultrank::learners {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// Fitting happens on standardized columns; zero-variance columns stay at 0.
class LogisticProblem {
 public:
  LogisticProblem(const FeatureMatrix& x, double l2)
      : n_(x.n_rows), p_(x.n_cols), l2_(l2), mean_(p_, 0.0), scale_(p_, 0.0), xs_(x.values),
        y_(n_), z_(n_), r_(n_) {
    for (std::size_t i = 0; i < n_; ++i) y_[i] = x.labels[i] ? 1.0 : 0.0;
    for (std::size_t j = 0; j < p_; ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < n_; ++i) m += x.at(i, j);
      m /= static_cast<double>(n_);
      double v = 0.0;
      for (std::size_t i = 0; i < n_; ++i) v += (x.at(i, j) - m) * (x.at(i, j) - m);
      double sd = std::sqrt(v / static_cast<double>(n_));
      mean_[j] = m;
      scale_[j] = sd > 0.0 ? sd : 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        xs_[i * p_ + j] = sd > 0.0 ? (x.at(i, j) - m) / sd : 0.0;
      }
    }
  }

  std::size_t dims() const { return p_; }

  // Penalized mean log-likelihood at (w, b); leaves linear scores in z_.
  double objective(const std::vector<double>& w, double b) {
    double ll = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double z = kernels::dot({xs_.data() + i * p_, p_}, w) + b;
      z_[i] = z;
      ll += y_[i] * z - softplus(z);
    }
    return ll / static_cast<double>(n_) - 0.5 * l2_ * kernels::dot(w, w);
  }

  // Gradient at the point of the last objective() call.
  void gradient(const std::vector<double>& w, std::vector<double>& gw, double& gb) {
    kernels::sigmoid(z_, r_);
    for (std::size_t i = 0; i < n_; ++i) r_[i] = y_[i] - r_[i];
    const double inv_n = 1.0 / static_cast<double>(n_);
    std::fill(gw.begin(), gw.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      kernels::axpy(r_[i] * inv_n, {xs_.data() + i * p_, p_}, gw);
    }
    for (std::size_t j = 0; j < p_; ++j) gw[j] -= l2_ * w[j];
    gb = kernels::sum(r_) * inv_n;
  }

  void unscale(const std::vector<double>& w, double b, std::vector<double>& weights,
               double& intercept) const {
    weights.assign(p_, 0.0);
    intercept = b;
    for (std::size_t j = 0; j < p_; ++j) {
      if (scale_[j] == 0.0) continue;
      weights[j] = w[j] / scale_[j];
      intercept -= w[j] * mean_[j] / scale_[j];
    }
  }

 private:
  std::size_t n_, p_;
  double l2_;
  std::vector<double> mean_, scale_, xs_, y_, z_, r_;
};

}  // namespace

TrainedModel train_logistic(const FeatureMatrix& x, const TrainConfig& cfg) {
  cfg.validate(ModelKind::Logistic);
  x.validate();
  if (x.n_rows == 0) throw InputError("logistic regression needs at least one row");

  LogisticProblem prob(x, cfg.logistic_l2);
  const std::size_t p = prob.dims();
  std::vector<double> w(p, 0.0), gw(p), w_try(p);
  double b = 0.0, gb = 0.0;
  double f = prob.objective(w, b);
  prob.gradient(w, gw, gb);

  double eta = 1.0;
  for (int it = 0; it < cfg.logistic_max_iterations; ++it) {
    double g2 = kernels::dot(gw, gw) + gb * gb;
    if (std::sqrt(g2) < cfg.logistic_tolerance) break;
    bool moved = false;
    while (eta > 1e-20) {
      for (std::size_t j = 0; j < p; ++j) w_try[j] = w[j] + eta * gw[j];
      double b_try = b + eta * gb;
      double f_try = prob.objective(w_try, b_try);
      if (f_try >= f + 1e-4 * eta * g2) {
        w.swap(w_try);
        b = b_try;
        f = f_try;
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
    prob.gradient(w, gw, gb);
    eta *= 2.0;
  }

  TrainedModel m;
  m.kind = ModelKind::Logistic;
  m.config = cfg;
  m.n_features = p;
  prob.unscale(w, b, m.weights, m.intercept);
  return m;
}

}  // namespace faultrank::learners
