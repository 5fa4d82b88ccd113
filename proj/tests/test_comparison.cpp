#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rim/comparison.hpp"
#include "rim/errors.hpp"

using namespace rim;

namespace {

struct Triple {
  double lh, lc, L;
};

std::vector<Triple> admissible_triples(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lam(-5.0, 5.0), gap(0.05, 6.0), frac(0.0, 0.99);
  std::vector<Triple> out;
  while (static_cast<int>(out.size()) < count) {
    const double lc = lam(rng);
    const double lh = lc + gap(rng);
    const double L = frac(rng) * (lh - lc) / 4.0;
    if (L > 0.0) out.push_back({lh, lc, L});
  }
  return out;
}

// RK4 on the comparison system with the fiber's z.
Eigen::Vector2d integrate_comparison(const EigenData& e, const Fiber& f, double W0, double V0,
                                     double T, int steps) {
  auto M = [&](double t) {
    Eigen::MatrixXd m = oracle::comparison_matrix(e.lambda_hat, e.lambda_check, e.L);
    m += f.z(t) * Eigen::MatrixXd::Identity(2, 2);
    return m;
  };
  Eigen::VectorXd x(2);
  x << W0, V0;
  return oracle::rk4_linear(M, x, 0.0, T, steps);
}

}  // namespace

TEST(Eigen, DeskExample) {
  const EigenData e = eigen(2.0, 0.0, 0.25);
  EXPECT_NEAR(e.lambda_plus, 1.0 + std::sqrt(2.0) / 2.0, 1e-14);
  EXPECT_NEAR(e.lambda_minus, 1.0 - std::sqrt(2.0) / 2.0, 1e-14);
  EXPECT_NEAR(e.e_plus, 3.0 + 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(e.kappa, 3.0 - 2.0 * std::sqrt(2.0), 1e-13);
  EXPECT_NEAR(e.kappa, 0.171573, 1e-6);
  EXPECT_NEAR(e.rate, std::exp(-std::sqrt(2.0)), 1e-14);
}

TEST(Eigen, RandomAdmissibleTriples) {
  for (const auto& t : admissible_triples(100, 1)) {
    const EigenData e = eigen(t.lh, t.lc, t.L);
    const double d = t.lh - t.lc;
    EXPECT_NEAR(e.discriminant, d * (d - 4.0 * t.L), 1e-10 * std::max(1.0, d * d));
    const Eigen::Matrix2d B = oracle::comparison_matrix(t.lh, t.lc, t.L);
    const Eigen::Vector2d pp(e.plus_w(), e.plus_v());
    const Eigen::Vector2d pm(e.minus_w(), e.minus_v());
    EXPECT_LE((B * pp - e.lambda_plus * pp).norm(), 1e-10 * pp.norm());
    EXPECT_LE((B * pm - e.lambda_minus * pm).norm(), 1e-10 * pm.norm());
    EXPECT_NEAR(e.e_plus * e.e_minus, 1.0, 1e-10);
    const Eigen::Vector2d ref = oracle::eigenvalues(t.lh, t.lc, t.L);
    EXPECT_NEAR(e.lambda_plus, ref[0], 1e-10 * std::max(1.0, std::abs(ref[0])));
    EXPECT_NEAR(e.lambda_minus, ref[1], 1e-10 * std::max(1.0, std::abs(ref[1])));
    EXPECT_GT(e.lambda_plus, e.lambda_minus);
  }
}

TEST(Eigen, GapIffRealDistinctRoots) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> lam(-3.0, 3.0), Ld(0.0, 2.0);
  int violations = 0;
  for (int k = 0; k < 200; ++k) {
    const double a = lam(rng), b = lam(rng);
    const double lh = std::max(a, b), lc = std::min(a, b), L = Ld(rng);
    Eigen::EigenSolver<Eigen::Matrix2d> es(oracle::comparison_matrix(lh, lc, L));
    const Eigen::Vector2cd ev = es.eigenvalues();
    const bool real_distinct =
        std::abs(ev[0].imag()) < 1e-12 && std::abs(ev[0].real() - ev[1].real()) > 1e-9;
    const bool gap = lh - lc > 4.0 * L;
    EXPECT_EQ(gap, real_distinct) << lh << ' ' << lc << ' ' << L;
    EXPECT_EQ(gap, characteristic_discriminant(lh, lc, L) > 0.0);
    if (!gap) {
      ++violations;
      EXPECT_THROW(eigen(lh, lc, L), GapViolation);
    }
  }
  EXPECT_GT(violations, 20);
}

TEST(Eigen, ThresholdAndViolationCarryDiscriminant) {
  EXPECT_THROW(eigen(2.0, 0.0, 0.5), GapViolation);
  try {
    eigen(2.0, 0.0, 0.6);
    FAIL();
  } catch (const GapViolation& e) {
    EXPECT_NEAR(e.discriminant(), 2.0 * (2.0 - 2.4), 1e-14);
  }
  EXPECT_THROW(eigen(2.0, 0.0, -0.1), ValidationError);
}

TEST(Eigen, UncoupledLimit) {
  const EigenData e = eigen(1.0, -2.0, 0.0);
  EXPECT_EQ(e.kappa, 0.0);
  EXPECT_TRUE(std::isinf(e.e_plus));
  EXPECT_EQ(e.lambda_plus, 1.0);
  EXPECT_EQ(e.lambda_minus, -2.0);
  EXPECT_EQ(e.plus_w(), 1.0);
  EXPECT_EQ(e.plus_v(), 0.0);
  EXPECT_EQ(e.minus_w(), 0.0);
  EXPECT_EQ(e.minus_v(), 1.0);
}

TEST(Comparison, ClosedFormWithZeroNoise) {
  const EigenData e = eigen(2.0, 0.0, 0.25);
  const Fiber f = Fiber::zero(-1.0, 3.0);
  for (double T : {0.1, 0.5, 1.0, 2.0}) {
    const ComparisonSolution s(e, f, T, e.kappa, 0.0, 1.0);
    EXPECT_NEAR(s.W(0.0), std::exp(-e.lambda_plus * T), 1e-10);
    EXPECT_NEAR(s.V(T), e.kappa, 1e-10);
    EXPECT_NEAR(s.W(T), 1.0, 1e-12);
    EXPECT_NEAR(s.c2(), 0.0, 1e-12);
  }
}

TEST(Comparison, ClosedFormWithSampledNoise) {
  const EigenData e = eigen(2.0, 0.0, 0.25);
  const Fiber f = oracle::sampled_fiber(12, -45.0, 3.0, 0.01);
  const double T = 1.0;
  const ComparisonSolution s(e, f, T, e.kappa, 0.0, 1.0);
  EXPECT_NEAR(s.W(0.0), std::exp(-e.lambda_plus * T - f.z_integral(0.0, T)), 1e-10);
  EXPECT_NEAR(s.V(T), e.kappa, 1e-10);
  // Independent check: integrate the ODE from the computed initial values.
  const Eigen::Vector2d end = integrate_comparison(e, f, s.W(0.0), s.V(0.0), T, 200);
  EXPECT_NEAR(end[0], 1.0, 1e-6);
  EXPECT_NEAR(end[1], e.kappa, 1e-6);
  EXPECT_NEAR(s.V(0.0), e.kappa * s.W(0.0), 1e-12);
}

TEST(Comparison, UnitStepContraction) {
  const EigenData e = eigen(2.0, 0.0, 0.25);
  const Fiber f = Fiber::zero(-1.0, 2.0);
  const ComparisonSolution s(e, f, 1.0, e.kappa, std::exp(-e.lambda_plus), 0.0);
  EXPECT_NEAR(s.V(1.0), e.rate, 1e-12);
  EXPECT_NEAR(s.W(1.0), 0.0, 1e-14);
}

TEST(Comparison, GeneralBoundaryDataAgainstOde) {
  const EigenData e = eigen(1.0, -1.5, 0.3);
  const Fiber f = oracle::sampled_fiber(3, -45.0, 3.0, 0.01);
  const ComparisonSolution s(e, f, 0.8, 0.5 * e.kappa, 0.3, 0.7);
  EXPECT_NEAR(s.V(0.0), 0.5 * e.kappa * s.W(0.0) + 0.3, 1e-12);
  const Eigen::Vector2d end = integrate_comparison(e, f, s.W(0.0), s.V(0.0), 0.8, 160);
  EXPECT_NEAR(end[0], 0.7, 1e-6);
  EXPECT_NEAR(end[1], s.V(0.8), 1e-6);
}

TEST(Comparison, MonotoneInGammaAndC) {
  const EigenData e = eigen(2.0, 0.0, 0.25);
  const Fiber f = oracle::sampled_fiber(4, -45.0, 3.0, 0.01);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> g(0.0, e.kappa), c(0.0, 1.0), T(0.1, 1.0);
  for (int k = 0; k < 50; ++k) {
    double g1 = g(rng), g2 = g(rng), c1 = c(rng), c2 = c(rng);
    if (g1 > g2) std::swap(g1, g2);
    if (c1 > c2) std::swap(c1, c2);
    const double t = T(rng);
    const ComparisonSolution lo(e, f, t, g1, c1, 1.0);
    const ComparisonSolution hi(e, f, t, g2, c2, 1.0);
    EXPECT_TRUE(monotonicity_check(lo, hi)) << g1 << ' ' << g2 << ' ' << c1 << ' ' << c2;
  }
}

TEST(Comparison, RejectsBadData) {
  const EigenData e = eigen(2.0, 0.0, 0.25);
  const Fiber f = Fiber::zero(-1.0, 2.0);
  EXPECT_THROW(ComparisonSolution(e, f, 0.0, 0.1, 0.0, 1.0), ValidationError);
  EXPECT_THROW(ComparisonSolution(e, f, 1.0, -0.1, 0.0, 1.0), ValidationError);
}
