#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "cmfomp/generators.hpp"
#include "cmfomp/gram.hpp"
#include "cmfomp/rng.hpp"

using namespace cmfomp;

namespace {

CmfSpec random_family(Rng& rng) {
  const double lambda = rng.uniform(0.3, 4.0);
  return rng.index(2) == 0 ? CmfSpec::laplace(lambda) : CmfSpec::inverse_linear(lambda);
}

}  // namespace

TEST(Gram, TwoByTwoClosedForm) {
  const KernelSpec k = KernelSpec::cmf(CmfSpec::laplace(1.0), 1.0, 2);
  const Support s({Point{0.0, 0.0}, Point{1.0, 1.0}});
  const GramMatrix g = build_gram(k, s);
  EXPECT_DOUBLE_EQ(g.entries()(0, 1), std::exp(-2.0));
  EXPECT_EQ(g.entries()(0, 0), 1.0);
  const double r = erc_ratio(g, correlation_vector(k, s, Point{0.0, 1.0}));
  EXPECT_NEAR(r, 2.0 * std::exp(-1.0) / (1.0 + std::exp(-2.0)), 1e-14);
  EXPECT_NEAR(r, 0.64806, 1e-5);
}

TEST(Gram, OneDimensionalMidpointProbe) {
  const KernelSpec k = KernelSpec::cmf(CmfSpec::laplace(1.0), 1.0, 1);
  const Support s({Point{0.0}, Point{2.0}});
  const double r = erc_ratio(GramMatrix(k, s), correlation_vector(k, s, Point{1.0}));
  EXPECT_NEAR(r, 2.0 * std::exp(-1.0) / (1.0 + std::exp(-2.0)), 1e-14);
}

TEST(Gram, SolveMatchesDenseInverse) {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const std::size_t k = 1 + rng.index(6);
    const std::size_t dim = 1 + rng.index(3);
    const KernelSpec kern = KernelSpec::cmf(random_family(rng), rng.uniform(0.2, 1.0), dim);
    const Support s = random_support(rng, k, dim, -3.0, 3.0, 0.05);
    const GramMatrix g(kern, s);
    Eigen::VectorXd rhs = Eigen::VectorXd::Random(static_cast<Eigen::Index>(k));
    const Eigen::VectorXd x = solve_gram(g, rhs);
    const Eigen::VectorXd oracle = g.entries().fullPivLu().solve(rhs);
    EXPECT_LE((x - oracle).norm(), 1e-9 * std::max(1.0, oracle.norm()));
  }
}

TEST(Gram, RejectsNearDuplicateAtoms) {
  const Support s({Point{0.0}, Point{1e-6}});
  EXPECT_THROW(GramMatrix(KernelSpec::gaussian(), s), DegenerateSupportError);
}

TEST(Gram, RejectsBadInput) {
  const KernelSpec k = KernelSpec::cmf(CmfSpec::laplace(1.0), 1.0, 1);
  EXPECT_THROW(GramMatrix(k, Support()), ParameterError);
  EXPECT_THROW(GramMatrix(k, Support({Point{0.0, 1.0}})), ParameterError);
  const GramMatrix g(k, Support({Point{0.0}, Point{1.0}}));
  EXPECT_THROW(g.solve(Eigen::VectorXd::Ones(3)), ParameterError);
  EXPECT_THROW(erc_ratio(g, Eigen::VectorXd::Ones(1)), ParameterError);
}

TEST(Gram, CmfEntriesInUnitInterval) {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const std::size_t dim = 1 + rng.index(3);
    const KernelSpec kern = KernelSpec::cmf(random_family(rng), rng.uniform(0.2, 1.0), dim);
    const GramMatrix g(kern, random_support(rng, 1 + rng.index(6), dim, -3.0, 3.0, 0.05));
    EXPECT_GE(g.entries().minCoeff(), 0.0);
    EXPECT_LE(g.entries().maxCoeff(), 1.0);
    EXPECT_GE(g.min_pivot(), kPivotFloor);
  }
}

TEST(Gram, QuadraticFormNonnegative) {
  Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    const std::size_t dim = 1 + rng.index(3);
    const KernelSpec kern = KernelSpec::cmf(random_family(rng), rng.uniform(0.2, 1.0), dim);
    const std::size_t k = 1 + rng.index(6);
    const GramMatrix g(kern, random_support(rng, k, dim, -3.0, 3.0, 0.01));
    Eigen::VectorXd w(static_cast<Eigen::Index>(k));
    for (auto& x : w) x = rng.normal();
    EXPECT_GE(residual_norm_sq(g, w), 0.0);
  }
}

TEST(Gram, OneDimensionalNonnegativityAndErcBelowOne) {
  Rng rng(33);
  for (int i = 0; i < 300; ++i) {
    const std::size_t k = 1 + rng.index(6);
    const KernelSpec kern = KernelSpec::cmf(random_family(rng), rng.uniform(0.2, 1.0), 1);
    const Support s = random_support(rng, k, 1, -5.0, 5.0, 0.01);
    const GramMatrix g(kern, s);
    const Eigen::VectorXd ones = g.solve(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k)));
    EXPECT_GE(ones.minCoeff(), -1e-10);
    for (int j = 0; j < 10; ++j) {
      const Point probe{rng.uniform(-7.0, 7.0)};
      const Eigen::VectorXd v = g.solve(correlation_vector(kern, s, probe));
      EXPECT_GE(v.minCoeff(), -1e-10);
      bool near = false;
      for (const auto& p : s) near = near || std::abs(p[0] - probe[0]) < 1e-3;
      if (!near) {
        EXPECT_LT(v.lpNorm<1>(), 1.0 - 1e-10);
      }
    }
  }
}

TEST(Gram, ErcRatioContinuous) {
  const KernelSpec kern = KernelSpec::cmf(CmfSpec::inverse_linear(1.0), 0.5, 2);
  const Support s({Point{0.0, 0.0}, Point{1.0, 0.5}, Point{-0.5, 2.0}});
  const GramMatrix g(kern, s);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const Point base{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    const double r0 = erc_ratio(g, correlation_vector(kern, s, base));
    double prev = INFINITY;
    for (double h : {1e-2, 1e-4, 1e-6, 1e-8}) {
      const double diff = std::abs(erc_ratio(g, correlation_vector(kern, s, Point{base[0] + h, base[1]})) - r0);
      EXPECT_LE(diff, prev + 1e-12);
      prev = diff;
    }
    EXPECT_LT(prev, 1e-3);
  }
}

TEST(Gram, ClosedFormEntries) {
  const KernelSpec k = KernelSpec::cmf(CmfSpec::laplace(1.0), 1.0, 1);
  const GramMatrix g2(k, Support({Point{0.0}, Point{2.0}}));
  EXPECT_DOUBLE_EQ(g2.entries()(1, 0), std::exp(-2.0));
  const GramMatrix g3(k, Support({Point{0.0}, Point{1.0}, Point{2.0}}));
  EXPECT_DOUBLE_EQ(g3.entries()(0, 1), std::exp(-1.0));
  EXPECT_DOUBLE_EQ(g3.entries()(1, 2), std::exp(-1.0));
  EXPECT_DOUBLE_EQ(g3.entries()(0, 2), std::exp(-2.0));
  const GramMatrix g1(k, Support({Point{4.0}}));
  EXPECT_EQ(g1.entries()(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(g1.solve(Eigen::VectorXd::Constant(1, 3.0))(0), 3.0);
}

TEST(Gram, ErcSingletonAndOnSupport) {
  const KernelSpec k = KernelSpec::cmf(CmfSpec::laplace(1.0), 1.0, 1);
  const Support s1({Point{0.0}});
  EXPECT_NEAR(erc_ratio(GramMatrix(k, s1), correlation_vector(k, s1, Point{1.0})), std::exp(-1.0), 1e-16);
  const Support s3({Point{0.0}, Point{0.7}, Point{2.0}});
  const GramMatrix g(k, s3);
  for (std::size_t l = 0; l < 3; ++l) {
    const Eigen::VectorXd col = g.entries().col(static_cast<Eigen::Index>(l));
    const Eigen::VectorXd e = g.solve(col);
    EXPECT_NEAR(e(static_cast<Eigen::Index>(l)), 1.0, 1e-12);
    EXPECT_NEAR(e.lpNorm<1>(), 1.0, 1e-12);
  }
}

TEST(Gram, ResidualNormExamples) {
  const KernelSpec k = KernelSpec::cmf(CmfSpec::laplace(1.0), 1.0, 1);
  const GramMatrix g1(k, Support({Point{0.0}}));
  EXPECT_DOUBLE_EQ(residual_norm_sq(g1, Eigen::VectorXd::Constant(1, -3.0)), 9.0);
  const Support s({Point{0.0}, Point{1.0}, Point{2.5}});
  const GramMatrix g(k, s);
  EXPECT_EQ(residual_norm_sq(g, Eigen::VectorXd::Zero(3)), 0.0);
  // y = sum c_l a(theta_l) minus its exact LS fit over the full support.
  const Eigen::Vector3d c(1.0, -2.0, 0.5);
  const Eigen::VectorXd fit = g.solve(g.entries() * c);
  EXPECT_LE(residual_norm_sq(g, c - fit), 1e-18);
  EXPECT_THROW(residual_norm_sq(g, Eigen::VectorXd::Zero(2)), ParameterError);
}
