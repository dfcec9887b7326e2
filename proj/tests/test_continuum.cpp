#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"

using namespace jlt;
using namespace testing_support;

namespace {

ContinuumProblem pt(double c, double gamma = 1.5) { return {Potential::poschl_teller(1.0), 12.0, gamma, c}; }

}  // namespace

TEST(Discretize, ZeroPotentialIsFree) {
  for (double c : {0.0, 0.5, 1.0}) {
    const JacobiOperator op = discretize({Potential::square_well(0.0, 1.0), 3.0, 1.5, c}, 8);
    EXPECT_TRUE(is_discrete_schroedinger(op));
    for (double b : op.b) EXPECT_EQ(b, 0.0);
    EXPECT_TRUE(negative_eigenvalues({Potential::square_well(0.0, 1.0), 3.0, 1.5, c}, 8).empty());
  }
}

TEST(Discretize, PureDiagonalScheme) {
  const Index k = 8;
  const JacobiOperator op = discretize(pt(1.0), k);
  EXPECT_TRUE(is_discrete_schroedinger(op));
  for (Index n = op.window_start; n < op.window_end(); ++n) {
    const double x = static_cast<double>(n) / k;
    EXPECT_DOUBLE_EQ(op.b_at(n), -2.0 / std::pow(std::cosh(x), 2) / (k * k));
  }
}

TEST(Discretize, WeightedScheme) {
  const JacobiOperator op = discretize(pt(0.5), 4);
  EXPECT_DOUBLE_EQ(op.a_at(0), -1.03125);
  EXPECT_DOUBLE_EQ(op.b_at(0), 0.5 * (-2.0) / 16.0);
  const ContinuumProblem p = pt(0.3);
  EXPECT_EQ(p.c + 2.0 * p.d(), 1.0);
}

TEST(Discretize, SignLoss) {
  // a repulsive barrier: a = -1 + d V / k^2 turns positive for small k
  const ContinuumProblem deep{Potential::square_well(-100.0, 1.0), 2.0, 0.5, 0.0};
  EXPECT_THROW(discretize(deep, 2), OffDiagonalSignLoss);
  const auto rows = constant_sweep(deep, {0.5}, {2, 64});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].sign_loss);
  EXPECT_FALSE(rows[1].sign_loss);
  EXPECT_THROW(constant_sweep(deep, {0.5}, {64, 32}), DomainError);
}

TEST(Continuum, PoschlTellerGroundState) {
  const auto mu = negative_eigenvalues(pt(0.5), 64);
  ASSERT_EQ(mu.size(), 1u);
  EXPECT_NEAR(mu[0], Potential::poschl_teller(1.0).exact_eigenvalues()->at(0), 1e-2);
  EXPECT_NEAR(mu[0], -1.0, 1e-2);
}

TEST(Continuum, SquareWellMatchesTranscendentalOracle) {
  const auto ref = oracle::finite_well_energies(4.0, 2.0);
  ASSERT_EQ(ref.size(), 2u);
  const auto mu = negative_eigenvalues({Potential::square_well(4.0, 2.0), 6.0, 1.0, 1.0}, 128);
  ASSERT_EQ(mu.size(), ref.size());
  for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_NEAR(mu[i], ref[i], 2e-2 * std::abs(ref[i]));
}

TEST(Continuum, EigenvalueConvergenceOrder) {
  const ContinuumProblem p = pt(0.5);
  const double m16 = negative_eigenvalues(p, 16)[0];
  const double m32 = negative_eigenvalues(p, 32)[0];
  const double m64 = negative_eigenvalues(p, 64)[0];
  EXPECT_NEAR(std::log2(std::abs(m16 - m32) / std::abs(m32 - m64)), 2.0, 0.3);
  EXPECT_LT(std::abs(richardson(m32, m64) + 1.0), std::abs(m64 + 1.0));
}

TEST(Continuum, SharpConstantAtThreeHalves) {
  const auto rows = constant_sweep(pt(0.5), {1.5}, {16, 32, 64});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(Potential::poschl_teller(1.0).negative_part_integral(2.0), 16.0 / 3.0, 1e-13);
  const ConvergenceRow& r = rows.back();
  EXPECT_EQ(r.k, 64);
  EXPECT_NEAR(r.ratio, 3.0 / 16.0, 0.02 * 3.0 / 16.0);
  for (const auto& row : rows) {
    EXPECT_LE(row.ratio, 3.0 / 16.0 * 1.02);
    EXPECT_DOUBLE_EQ(row.bound, 3.0 / 16.0);
  }
}

TEST(Continuum, PureDiagonalSchemeBound) {
  for (const auto& row : constant_sweep(pt(1.0), {1.5}, {16, 32, 64})) {
    EXPECT_DOUBLE_EQ(row.bound, 0.375);
    EXPECT_LE(row.ratio, 0.375);
  }
}

TEST(Continuum, DeltaLimitAtOneHalf) {
  const double w = 1.0 / 16.0;
  const ContinuumProblem p{Potential::square_well(2.0 / w, w), 2.0, 0.5, 0.5};
  const auto rows = constant_sweep(p, {0.5}, {256});
  const double ratio = rows[0].ratio;
  EXPECT_NEAR(ratio, 0.5, 0.05 * 0.5);
  EXPECT_LE(ratio, 0.5 * 1.05);
  // the delta well with strength g has the single eigenvalue -g^2/4
  ASSERT_EQ(rows[0].eigenvalues.size(), 1u);
  EXPECT_NEAR(rows[0].eigenvalues[0], -1.0, 0.1);
}

TEST(Continuum, SchemeConstantTaylorLimit) {
  for (double c : {0.5, 1.0, 1.0 / 3.0}) {
    const double d = 0.5 * (1.0 - c);
    EXPECT_NEAR(scheme_constant(pt(c), 128) / (0.375 * (c * c + 4.0 * d * d)), 1.0, 1e-2) << c;
  }
}

TEST(Continuum, SchemeConstantMinimizedAtOneHalf) {
  double best = INFINITY, arg = -1.0;
  for (double c : {0.0, 0.25, 1.0 / 3.0, 0.5, 0.75, 1.0}) {
    const double v = scheme_constant(pt(c), 64);
    if (v < best) {
      best = v;
      arg = c;
    }
  }
  EXPECT_EQ(arg, 0.5);
}

TEST(Continuum, DiscretizedOperatorsPassChecks) {
  for (double c : {0.0, 0.5, 1.0}) {
    const JacobiOperator op = discretize(pt(c), 16);
    EXPECT_TRUE(check(op, InequalityName::final).passed);
    EXPECT_TRUE(check(op, InequalityName::hsmain).passed);
  }
}

TEST(Continuum, SchemeBounds) {
  EXPECT_EQ(scheme_bound(0.5, 0.2), 0.5);
  EXPECT_DOUBLE_EQ(scheme_bound(1.5, 0.5), 3.0 / 16.0);
  EXPECT_DOUBLE_EQ(scheme_bound(1.5, 1.0), 0.375);
  EXPECT_DOUBLE_EQ(scheme_bound(2.5, 0.5), semiclassical_constant(2.5));
  EXPECT_DOUBLE_EQ(scheme_bound(1.0, 1.0), d_gamma(1.0));
  EXPECT_DOUBLE_EQ(scheme_bound(1.0, 1.0 / 3.0), d_gamma(1.0));
  EXPECT_TRUE(std::isnan(scheme_bound(1.0, 0.5)));
}

TEST(Continuum, TabulatedPotential) {
  std::vector<double> x, v;
  for (int i = -1200; i <= 1200; ++i) {
    x.push_back(i / 100.0);
    v.push_back(-2.0 / std::pow(std::cosh(i / 100.0), 2));
  }
  const Potential tab = Potential::tabulated(x, v);
  EXPECT_NEAR(tab(0.005), -2.0 / std::pow(std::cosh(0.005), 2), 1e-8);
  EXPECT_NEAR(tab.negative_part_integral(2.0, 12.0), 16.0 / 3.0, 1e-6);
  const auto mu = negative_eigenvalues({tab, 12.0, 1.5, 0.5}, 32);
  ASSERT_EQ(mu.size(), 1u);
  EXPECT_NEAR(mu[0], negative_eigenvalues(pt(0.5), 32)[0], 1e-6);
}

TEST(Continuum, GaussianIntegral) {
  const Potential g = Potential::gaussian(2.0, 0.7);
  const double ref = std::pow(2.0, 1.5) * 0.7 * std::sqrt(2.0 * std::numbers::pi / 1.5);
  EXPECT_NEAR(g.negative_part_integral(1.5), ref, 1e-13);
  const auto mu = negative_eigenvalues({g, 8.0, 1.0, 1.0}, 32);
  EXPECT_FALSE(mu.empty());
}
