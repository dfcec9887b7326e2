#include <gtest/gtest.h>

#include <cstdlib>

#include "oracles.hpp"
#include "support.hpp"

using namespace jlt;
using namespace testing_support;

namespace {

const std::vector<InequalityName> kScalarNames = {InequalityName::final, InequalityName::hsmain, InequalityName::hs1,
                                                  InequalityName::hs2, InequalityName::orderalpha};
const std::vector<InequalityName> kFreeNames = {InequalityName::hsfree, InequalityName::hsfree2,
                                                InequalityName::orderalpha, InequalityName::final};

}  // namespace

TEST(Check, FreeOperator) {
  for (auto n : kScalarNames) {
    const InequalityReport r = check(free_operator(), n, 1.0);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
    EXPECT_TRUE(r.passed);
  }
}

TEST(Check, DeltaSharpnessOfHsmain) {
  for (double beta : {0.1, 1.0, 3.0, 10.0}) {
    const InequalityReport r = check(single_site(-beta), InequalityName::hsmain);
    ASSERT_EQ(r.spectrum.count(), 1u);
    const double lambda = r.spectrum.points[0].lambda;
    EXPECT_LT(rel(std::sqrt(lambda * lambda - 4.0), beta), 1e-10);
    EXPECT_LT(rel(r.lhs, beta), 1e-10);
    EXPECT_TRUE(r.passed);
  }
}

TEST(Check, ReflectionlessSharpness) {
  for (double w : {0.25, 0.5, 1.0, 2.0}) {
    const InequalityReport r = check(reflectionless_auto(w), InequalityName::final);
    EXPECT_LE(std::abs(r.slack) / r.rhs, 1e-6) << w;
    EXPECT_LT(rel(r.lhs, std::exp(2 * w) - std::exp(-2 * w) - 4 * w), 1e-9) << w;
    EXPECT_TRUE(r.passed);
  }
}

TEST(Check, BlockDimensionOneMatchesScalar) {
  RandomOperatorSpec spec{14, 4, 2.0, 0.4, 1};
  for (std::uint64_t t = 0; t < 30; ++t) {
    const JacobiOperator op = random_scalar(spec, t);
    const InequalityReport s = check(op, InequalityName::final);
    const InequalityReport b = check(to_block(op), InequalityName::finalmatrix);
    EXPECT_NEAR(s.lhs, b.lhs, 1e-10);
    EXPECT_NEAR(s.rhs, b.rhs, 1e-10);
    EXPECT_EQ(b.name, InequalityName::finalmatrix);
  }
}

TEST(RandomOperators, RespectSpec) {
  RandomOperatorSpec spec{1, 3, 2.0, 0.85, 1};
  for (std::uint64_t t = 0; t < 50; ++t) {
    const JacobiOperator op = random_scalar(spec, t);
    EXPECT_EQ(op.size(), 7);
    for (double a : op.a) {
      EXPECT_LT(a, 0.0);
      EXPECT_LE(std::abs(a + 1.0), 0.85);
    }
    for (double b : op.b) EXPECT_LE(std::abs(b), 2.0);
  }
  EXPECT_EQ(random_scalar(spec, 3), random_scalar(spec, 3));
  EXPECT_NE(random_scalar(spec, 3), random_scalar(spec, 4));
  spec.offdiag_jitter = 0.95;
  EXPECT_THROW(random_scalar(spec, 0), DomainError);
}

TEST(Fuzz, ScalarCorpusHasNoViolations) {
  const FuzzSummary s = fuzz({1000, 5, 2.0, 0.5, 1}, kScalarNames, 1000, 1.0);
  EXPECT_EQ(s.total_failures(), 0u);
  for (const auto& st : s.stats) {
    EXPECT_EQ(st.checks, 1000u) << to_string(st.name);
    EXPECT_GE(st.min_relative_slack, -1e-8);
  }
}

TEST(Fuzz, FreeCorpusHasNoViolations) {
  const FuzzSummary s = fuzz({7, 5, 3.0, 0.0, 1}, kFreeNames, 1000, 1.5);
  EXPECT_EQ(s.total_failures(), 0u);
  for (const auto& st : s.stats) EXPECT_EQ(st.checks, 1000u) << to_string(st.name);
}

TEST(Fuzz, BlockCorpusHasNoViolations) {
  const FuzzSummary s = fuzz({2024, 3, 2.0, 0.3, 2}, {InequalityName::final}, 1000);
  EXPECT_EQ(s.total_failures(), 0u);
  ASSERT_EQ(s.stats.size(), 1u);
  EXPECT_EQ(s.stats[0].name, InequalityName::finalmatrix);
  EXPECT_EQ(s.stats[0].checks, 1000u);
}

TEST(Fuzz, DeterministicAcrossThreadCounts) {
  const RandomOperatorSpec spec{99, 4, 2.0, 0.3, 1};
  ::setenv("JACOBI_LT_THREADS", "1", 1);
  const std::string one = to_json(fuzz(spec, kScalarNames, 64)).dump();
  ::setenv("JACOBI_LT_THREADS", "4", 1);
  const std::string four = to_json(fuzz(spec, kScalarNames, 64)).dump();
  ::unsetenv("JACOBI_LT_THREADS");
  EXPECT_EQ(one, four);
}

TEST(Fuzz, ParallelForRethrowsFirstError) {
  ::setenv("JACOBI_LT_THREADS", "3", 1);
  EXPECT_THROW(parallel_for(10,
                            [](std::size_t i) {
                              if (i == 7) throw NoConvergence("seven");
                              if (i == 2) throw DomainError("two");
                            }),
               DomainError);
  ::unsetenv("JACOBI_LT_THREADS");
}

TEST(Scaling, HsmainRatioTendsToOne) {
  const JacobiOperator op = make_scalar(0, {-1, -1, -1}, {-1.0, 0.5, -0.7});
  const auto rows = coupling_scan(op, InequalityName::hsmain, {1e3});
  EXPECT_NEAR(rows[0].ratio, 1.0, 0.05);
}

// The fitted slope carries a pre-asymptotic bias of order 2/(eta |b|) from the
// band edge; couplings of a few units keep it inside the tolerance.
TEST(Scaling, Hs1RatioDecaysLikeInverseSqrt) {
  const JacobiOperator op = make_scalar(0, {-1, -1, -1}, {-3.0, 1.5, -2.1});
  std::vector<double> etas;
  for (double e = 10.0; e <= 1000.0 * 1.0001; e *= std::pow(10.0, 0.25)) etas.push_back(e);
  const auto rows = coupling_scan(op, InequalityName::hs1, etas);
  std::vector<double> r;
  for (const auto& row : rows) r.push_back(row.ratio);
  EXPECT_NEAR(loglog_slope(etas, r), -0.5, 0.05);
}

TEST(Dominance, SingleSiteOrdering) {
  const DominanceTable t = dominance_table(single_site(-3.0), 1.0);
  EXPECT_TRUE(t.dominates_hsfree);
  EXPECT_TRUE(t.dominates_hsfree2);
  const double lambda = std::sqrt(13.0);
  EXPECT_NEAR(t.value(InequalityName::hsfree2), std::pow(lambda - 2.0, 1.5), 1e-10);
  EXPECT_NEAR(t.value(InequalityName::hsfree), (lambda - 2.0) / d_gamma(1.0), 1e-10);
}

TEST(Dominance, AsymptoticEqualities) {
  const DominanceTable weak = dominance_table(single_site(-0.05), 1.0);
  EXPECT_NEAR(weak.value(InequalityName::orderalpha) / weak.value(InequalityName::hsfree), 1.0, 1e-2);
  const DominanceTable strong = dominance_table(single_site(-50.0), 1.0);
  EXPECT_NEAR(strong.value(InequalityName::orderalpha) / strong.value(InequalityName::hsfree2), 1.0, 0.1);
  EXPECT_TRUE(weak.dominates_hsfree && weak.dominates_hsfree2);
  EXPECT_TRUE(strong.dominates_hsfree && strong.dominates_hsfree2);
}

TEST(Dominance, NeedsFreeOffDiagonal) {
  EXPECT_THROW(dominance_table(make_scalar(0, {-1.1}, {-3.0}), 1.0), DomainError);
}

TEST(Dominance, HoldsOnFreeCorpus) {
  const RandomOperatorSpec spec{55, 5, 3.0, 0.0, 1};
  for (std::uint64_t t = 0; t < 300; ++t) {
    const DominanceTable d = dominance_table(random_scalar(spec, t), 1.0);
    EXPECT_TRUE(d.dominates_hsfree) << t;
    EXPECT_TRUE(d.dominates_hsfree2) << t;
  }
}
