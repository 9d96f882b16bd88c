// Compiled with -mavx2 -mfma. Only reached through avx2_table() after a
// runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "faultrank/kernels.hpp"

namespace faultrank::kernels::avx2 {

namespace {

constexpr std::size_t kLanes = 4;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

// exp(x) for x in [-708, 708]: Cody-Waite range reduction by ln 2 and a
// degree-13 Taylor polynomial on |r| <= ln2/2 (truncation < 2e-17).
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

  __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);

  static constexpr double kInvFact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
      1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
      1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
      1.0,                1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (std::size_t i = 1; i < std::size(kInvFact); ++i) {
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[i]));
  }

  __m128i k32 = _mm256_cvtpd_epi32(k);
  __m256i k64 = _mm256_cvtepi32_epi64(k32);
  k64 = _mm256_add_epi64(k64, _mm256_set1_epi64x(1023));
  k64 = _mm256_slli_epi64(k64, 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(k64));
}

inline __m256d sigmoid_pd(__m256d raw) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d hi = _mm256_set1_pd(kExpClamp);
  const __m256d lo = _mm256_set1_pd(-kExpClamp);
  __m256d x = _mm256_min_pd(_mm256_max_pd(raw, lo), hi);
  __m256d e = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), x));
  return _mm256_div_pd(one, _mm256_add_pd(one, e));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + kLanes), _mm256_loadu_pd(b + i + kLanes), acc1);
  }
  for (; i + kLanes <= n; i += kLanes) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void sigmoid(const double* raw, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i, sigmoid_pd(_mm256_loadu_pd(raw + i)));
  }
  if (i < n) {
    double in_tail[kLanes] = {0, 0, 0, 0};
    double out_tail[kLanes];
    std::copy(raw + i, raw + n, in_tail);
    _mm256_storeu_pd(out_tail, sigmoid_pd(_mm256_loadu_pd(in_tail)));
    std::copy(out_tail, out_tail + (n - i), out + i);
  }
}

void logistic_grad_hess(const double* raw, const double* y, double* grad, double* hess,
                        std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d floor = _mm256_set1_pd(kMinHessian);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d p = sigmoid_pd(_mm256_loadu_pd(raw + i));
    _mm256_storeu_pd(grad + i, _mm256_sub_pd(p, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(hess + i, _mm256_max_pd(_mm256_mul_pd(p, _mm256_sub_pd(one, p)), floor));
  }
  if (i < n) {
    double p_tail[kLanes];
    double in_tail[kLanes] = {0, 0, 0, 0};
    std::copy(raw + i, raw + n, in_tail);
    _mm256_storeu_pd(p_tail, sigmoid_pd(_mm256_loadu_pd(in_tail)));
    for (std::size_t j = 0; i + j < n; ++j) {
      double p = p_tail[j];
      grad[i + j] = p - y[i + j];
      hess[i + j] = std::max(p * (1.0 - p), kMinHessian);
    }
  }
}

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{"avx2", dot, axpy, sigmoid, logistic_grad_hess, sum};
  return t;
}

}  // namespace faultrank::kernels::avx2
