#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "faultrank/kernels.hpp"

using namespace faultrank::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void expect_close(double a, double b, double rel) {
  EXPECT_LE(std::abs(a - b), rel * std::max({1.0, std::abs(a), std::abs(b)})) << a << " vs " << b;
}

}  // namespace

TEST(Kernels, ScalarSigmoidClamps) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_GT(sigmoid(-1e6), 0.0);
  EXPECT_LT(sigmoid(-1e6), 1e-300);
  EXPECT_EQ(sigmoid(1e6), 1.0);
  EXPECT_FALSE(std::isnan(sigmoid(-INFINITY)));
}

TEST(Kernels, ActiveTableIsUsable) {
  const auto& t = active();
  ASSERT_NE(t.name, nullptr);
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  EXPECT_DOUBLE_EQ(dot(a, b), 32.0);
}

TEST(Kernels, Avx2MatchesScalar) {
  const KernelTable* v = avx2_table();
  if (!v) GTEST_SKIP() << "AVX2 variant unavailable on this machine";
  const KernelTable& s = scalar_table();
  std::mt19937_64 rng(3);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 31u, 64u, 1000u, 1003u}) {
    auto a = random_vec(rng, n, 10.0), b = random_vec(rng, n, 10.0);
    expect_close(s.dot(a.data(), b.data(), n), v->dot(a.data(), b.data(), n), 1e-12);
    expect_close(s.sum(a.data(), n), v->sum(a.data(), n), 1e-12);

    auto y1 = b, y2 = b;
    s.axpy(0.37, a.data(), y1.data(), n);
    v->axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) expect_close(y1[i], y2[i], 1e-15);

    auto raw = random_vec(rng, n, 800.0);  // crosses the clamp
    std::vector<double> p1(n), p2(n);
    s.sigmoid(raw.data(), p1.data(), n);
    v->sigmoid(raw.data(), p2.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_LE(std::abs(p1[i] - p2[i]), 1e-15 + 1e-13 * p1[i]) << raw[i];
      EXPECT_GE(p2[i], 0.0);
      EXPECT_LE(p2[i], 1.0);
    }

    auto small = random_vec(rng, n, 20.0);
    std::vector<double> lab(n), g1(n), g2(n), h1(n), h2(n);
    for (std::size_t i = 0; i < n; ++i) lab[i] = static_cast<double>(rng() % 2);
    s.logistic_grad_hess(small.data(), lab.data(), g1.data(), h1.data(), n);
    v->logistic_grad_hess(small.data(), lab.data(), g2.data(), h2.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(g1[i], g2[i], 1e-14);
      EXPECT_LE(std::abs(h1[i] - h2[i]), 1e-14 * h1[i] + 1e-15);
      EXPECT_GE(h2[i], kMinHessian);
    }
  }
}
