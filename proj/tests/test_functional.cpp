#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"

using namespace jlt;
using namespace testing_support;

namespace {
const double e = std::exp(1.0);
}

TEST(Special, GammaAndBetaAgainstStdlib) {
  for (double x = 0.05; x <= 30.0; x += 0.173) {
    EXPECT_LT(rel(gamma_fn(x), std::tgamma(x)), 1e-13) << x;
  }
  EXPECT_LT(rel(beta_fn(0.5, 2.0), std::tgamma(0.5) * std::tgamma(2.0) / std::tgamma(2.5)), 1e-13);
  EXPECT_THROW(beta_fn(0.0, 1.0), DomainError);
}

TEST(Special, LiebThirringConstants) {
  for (double g : {0.5, 1.0, 1.5, 2.5}) {
    const double lcl = std::tgamma(g + 1.0) / (std::sqrt(4.0 * std::numbers::pi) * std::tgamma(g + 1.5));
    EXPECT_LT(rel(semiclassical_constant(g), lcl), 1e-13);
    EXPECT_LT(rel(d_gamma(g), 2.0 * lcl), 1e-13);
    const double c = std::pow(3.0, g - 0.5) * 0.5 * std::tgamma(g + 1.0) / (std::tgamma(g + 1.5) * std::tgamma(1.5));
    EXPECT_LT(rel(c_gamma(g), c), 1e-13);
  }
  EXPECT_NEAR(semiclassical_constant(1.5), 3.0 / 16.0, 1e-15);
  EXPECT_NEAR(d_gamma(0.5), 0.5, 1e-15);
}

TEST(KFunctional, Values) {
  EXPECT_EQ(k_functional(1.0), 0.0);
  EXPECT_NEAR(k_functional(e), e * e - 1.0 / (e * e) - 4.0, 1e-13);
  EXPECT_NEAR(k_functional(e), 3.2537206, 1e-6);
  EXPECT_EQ(k_functional(-3.0), k_functional(3.0));
  EXPECT_THROW(k_functional(0.5), DomainError);
}

TEST(KFunctional, NearBandAgainstExtendedPrecision) {
  // k - 1/k and k + 1/k written without cancellation in d = k - 1
  for (double d0 : {1e-6, 1e-5, 1e-4, 1e-3, 0.1, 1.0, 3.0}) {
    const double x = 1.0 + d0;
    const long double d = static_cast<long double>(x - 1.0);
    const long double minus = d * (2.0L + d) / (1.0L + d);
    const long double plus = 2.0L + d * d / (1.0L + d);
    const long double ref = minus * plus - 4.0L * std::log1p(d);
    EXPECT_LT(rel(k_functional(x), static_cast<double>(ref)), 1e-6) << d0;
  }
  // leading behaviour: (8/3) delta^3
  const double d = 1e-6;
  EXPECT_NEAR(k_functional(1.0 + d) / (8.0 / 3.0 * d * d * d), 1.0, 1e-3);
}

TEST(GGamma, LinkToKFunctionalAtReflectionlessPoint) {
  const double lambda = 2.0 * std::cosh(1.0);
  EXPECT_NEAR(g_gamma(1.5, lambda), 0.5 * (e * e - 1.0 / (e * e) - 4.0), 1e-12);
  EXPECT_NEAR(g_gamma(1.5, lambda), 1.6268603, 1e-6);
  EXPECT_NEAR(g_gamma_closed(1.5, e), 1.6268603, 1e-6);
}

TEST(GGamma, AgainstMidpointOracle) {
  EXPECT_LT(rel(g_gamma(1.0, 2.5), oracle::g_gamma_midpoint(1.0, 2.5)), 1e-8);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ug(0.6, 4.0), ul(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double g = ug(rng);
    const double lambda = 2.0 + std::pow(10.0, -3.0 + 5.0 * ul(rng));
    EXPECT_LT(rel(g_gamma(g, lambda), oracle::g_gamma_midpoint(g, lambda, 400000)), 1e-8)
        << "gamma=" << g << " lambda=" << lambda;
  }
}

TEST(GGamma, DomainAndEndpoint) {
  EXPECT_THROW(g_gamma(0.5, 3.0), DomainError);
  EXPECT_THROW(g_gamma(1.0, 1.9), DomainError);
  EXPECT_EQ(g_gamma(1.0, 2.0), 0.0);
  for (double g : {0.75, 1.0, 2.0}) EXPECT_LT(g_gamma(g, 2.0 + 1e-12), 10.0 * std::pow(1e-12, g));
}

TEST(GGamma, ClosedForms) {
  EXPECT_LT(rel(g_gamma_closed(2.5, 2.0), g_gamma(2.5, 2.5)), 1e-9);
  for (double g : {1.5, 2.5, 3.5}) EXPECT_LT(g_gamma_closed(g, 1.0 + 1e-9), 1e-20);
  EXPECT_THROW(g_gamma_closed(1.0, 2.0), UnsupportedGamma);
  EXPECT_THROW(g_gamma_closed(1.5, 1.0), DomainError);
  // the lambda form cancels near the band edge; compare away from it
  for (double l : {2.5, 7.0, 100.0}) {
    const double k = SpectralPoint::k_from_lambda(-l);
    EXPECT_LT(rel(g_gamma_lambda_form(1.5, l), g_gamma_closed(1.5, k)), 1e-9) << l;
    EXPECT_LT(rel(g_gamma_lambda_form(2.5, l), g_gamma_closed(2.5, k)), 1e-9) << l;
  }
}

TEST(GGamma, QuadratureMatchesClosedFormOnRandomPoints) {
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double g : {1.5, 2.5, 3.5}) {
    for (int i = 0; i < 50; ++i) {
      const double lambda = 2.0 + std::pow(10.0, -2.0 + 3.7 * u(rng));
      const double k = SpectralPoint::k_from_lambda(-lambda);
      EXPECT_LT(rel(g_gamma(g, lambda), g_gamma_closed(g, k)), 1e-9) << g << " " << lambda;
    }
  }
}

TEST(GGamma, ComparisonBounds) {
  std::mt19937_64 rng(400);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    const double g = 0.6 + 3.4 * u(rng);
    const double lambda = 2.0 + std::pow(10.0, -3.0 + 6.0 * u(rng));
    const double G = g_gamma(g, lambda);
    const double h = lambda - 2.0;
    EXPECT_GE(G, 2.0 * beta_fn(g - 0.5, 1.5) * std::pow(h, g)) << g << " " << lambda;
    EXPECT_GE(G, beta_fn(g - 0.5, 2.0) * std::pow(h, g + 0.5)) << g << " " << lambda;
    EXPECT_LE(G, beta_fn(g - 0.5, 2.0) * std::pow(lambda, g + 0.5)) << g << " " << lambda;
  }
}

TEST(GGamma, AsymptoticSlopes) {
  for (double g : {0.75, 1.0, 2.0, 3.5}) {
    std::vector<double> eps, G;
    for (double x = 1e-8; x <= 1e-6; x *= 1.5) {
      eps.push_back(x);
      G.push_back(g_gamma(g, 2.0 + x));
    }
    EXPECT_NEAR(loglog_slope(eps, G), g, 1e-2);
    std::vector<double> lam, H;
    for (double x = 1e7; x <= 1e9; x *= 1.5) {
      lam.push_back(x);
      H.push_back(g_gamma(g, x));
    }
    EXPECT_NEAR(loglog_slope(lam, H), g + 0.5, 1e-2);
  }
}

TEST(PowerBoundRatios, RatiosAtLeastOneAndLimits) {
  for (double l = 2.001; l <= 100.0; l *= 1.07) {
    const PowerBoundRatios r = power_bound_ratios(l);
    EXPECT_GE(r.R1, 1.0) << l;
    EXPECT_GE(r.R2, 1.0) << l;
  }
  EXPECT_NEAR(power_bound_ratios(2.001).R1, 1.0, 1e-2);
  EXPECT_NEAR(power_bound_ratios(1000.0).R2, 1.0, 1e-2);
  EXPECT_THROW(power_bound_ratios(2.0), DomainError);
}

TEST(Rhs, FreeOperatorIsZero) {
  for (auto n : {InequalityName::final, InequalityName::hsmain, InequalityName::hs1, InequalityName::hs2,
                 InequalityName::orderalpha, InequalityName::hsfree, InequalityName::hsfree2}) {
    EXPECT_EQ(rhs_scalar(free_operator(), n, {.gamma = 1.0}).total, 0.0);
  }
}

TEST(Rhs, ReflectionlessFinalEqualsSharpValue) {
  const JacobiOperator op = reflectionless_auto(1.0);
  EXPECT_NEAR(rhs_scalar(op, InequalityName::final).total, e * e - 1.0 / (e * e) - 4.0, 1e-6);
}

TEST(Rhs, SingleSiteHsmain) {
  for (double beta : {0.1, 3.0}) EXPECT_DOUBLE_EQ(rhs_scalar(single_site(-beta), InequalityName::hsmain).total, beta);
}

TEST(Rhs, PowerSumsAndConstants) {
  const JacobiOperator op = make_scalar(0, {-1.2, -0.7}, {-2.0, 0.5});
  const double g = 1.3, p = g + 0.5;
  const double sb = std::pow(2.0, p) + std::pow(0.5, p);
  const double sa = 4.0 * (std::pow(0.2, p) + std::pow(0.3, p));
  EXPECT_NEAR(rhs_scalar(op, InequalityName::hs1, {.gamma = g}).total, c_gamma(g) * (sb + sa), 1e-12);
  EXPECT_NEAR(rhs_scalar(op, InequalityName::hs2, {.gamma = g}).total, std::pow(3.0, g - 0.5) * (sb + sa), 1e-12);
  const RhsBreakdown f = rhs_scalar(op, InequalityName::final);
  EXPECT_NEAR(f.potential_term, 4.25, 1e-15);
  EXPECT_NEAR(f.offdiag_term, 2.0 * ((1.44 - 1.0 - std::log(1.44)) + (0.49 - 1.0 - std::log(0.49))), 1e-14);
  EXPECT_GE(f.offdiag_term, 0.0);
  EXPECT_THROW(rhs_scalar(op, InequalityName::hsfree), DomainError);
  EXPECT_THROW(rhs_scalar(op, InequalityName::hs1, {.gamma = 0.4}), DomainError);
  EXPECT_THROW(rhs_scalar(op, InequalityName::hs1, {.gamma = 1.0, .free_constants = true}), DomainError);
  const JacobiOperator fr = make_scalar(0, {-1.0}, {-2.0});
  EXPECT_NEAR(rhs_scalar(fr, InequalityName::hs1, {.gamma = 1.0, .free_constants = true}).total,
              d_gamma(1.0) * std::pow(2.0, 1.5), 1e-13);
}

TEST(Rhs, BlockForms) {
  const BlockJacobiOperator free2 = block_site(diag2(-1.0, 2.0));
  EXPECT_EQ(rhs_block(free2).offdiag_term, 0.0);
  EXPECT_NEAR(rhs_block(free2).potential_term, 5.0, 1e-14);
  const BlockJacobiOperator a = make_block(2, 0, {-diag2(1.2, 0.9)}, {Matrix::Zero(2, 2)});
  const double ref = 2.0 * ((1.44 - 1.0 - std::log(1.44)) + (0.81 - 1.0 - std::log(0.81)));
  EXPECT_NEAR(rhs_block(a).offdiag_term, ref, 1e-14);
  EXPECT_NEAR(rhs_block(a).offdiag_term, 0.192157, 2e-6);
  RandomOperatorSpec spec{2, 3, 2.0, 0.5, 1};
  for (std::uint64_t t = 0; t < 20; ++t) {
    const JacobiOperator op = random_scalar(spec, t);
    EXPECT_NEAR(rhs_block(to_block(op)).total, rhs_scalar(op, InequalityName::final).total, 1e-12);
  }
}

TEST(Names, RoundTrip) {
  for (auto n : {InequalityName::final, InequalityName::finalmatrix, InequalityName::hsmain, InequalityName::hs1,
                 InequalityName::hs2, InequalityName::orderalpha, InequalityName::hsfree, InequalityName::hsfree2}) {
    EXPECT_EQ(inequality_from_string(to_string(n)), n);
  }
  EXPECT_THROW(inequality_from_string("nope"), InputError);
}
