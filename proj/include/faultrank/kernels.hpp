#pragma once

// Data-parallel inner loops of the learners. Each kernel has a portable
// scalar reference and, on x86-64, an AVX2+FMA variant chosen at runtime.
// Set FAULTRANK_SIMD=scalar to force the reference path.

#include <cstddef>
#include <span>

namespace faultrank::kernels {

struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[i] = 1 / (1 + exp(-raw[i])), raw clamped to [-708, 708]
  void (*sigmoid)(const double* raw, double* out, std::size_t n);
  // grad = sigmoid(raw) - y; hess = max(p (1 - p), kMinHessian)
  void (*logistic_grad_hess)(const double* raw, const double* y, double* grad, double* hess,
                             std::size_t n);
  double (*sum)(const double* x, std::size_t n);
};

inline constexpr double kMinHessian = 1e-16;
inline constexpr double kExpClamp = 708.0;

const KernelTable& scalar_table();

/// AVX2 table, or nullptr when not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// The table used by the library; resolved once per process.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void sigmoid(std::span<const double> raw, std::span<double> out) {
  active().sigmoid(raw.data(), out.data(), raw.size());
}

inline void logistic_grad_hess(std::span<const double> raw, std::span<const double> y,
                               std::span<double> grad, std::span<double> hess) {
  active().logistic_grad_hess(raw.data(), y.data(), grad.data(), hess.data(), raw.size());
}

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

/// Scalar sigmoid with the same clamping as the vector kernels.
double sigmoid(double raw);

}  // namespace faultrank::kernels
