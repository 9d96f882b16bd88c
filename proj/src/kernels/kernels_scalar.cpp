#include <algorithm>
#include <cmath>

#include "faultrank/kernels.hpp"

namespace faultrank::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void sigmoid_scalar(const double* raw, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = sigmoid(raw[i]);
}

void logistic_grad_hess_scalar(const double* raw, const double* y, double* grad, double* hess,
                               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double p = sigmoid(raw[i]);
    grad[i] = p - y[i];
    hess[i] = std::max(p * (1.0 - p), kMinHessian);
  }
}

double sum_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

}  // namespace

double sigmoid(double raw) {
  double x = std::clamp(raw, -kExpClamp, kExpClamp);
  return 1.0 / (1.0 + std::exp(-x));
}

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", dot_scalar, axpy_scalar, sigmoid_scalar,
                                 logistic_grad_hess_scalar, sum_scalar};
  return table;
}

}  // namespace faultrank::kernels
