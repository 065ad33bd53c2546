#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "cmfomp/generators.hpp"
#include "cmfomp/param_space.hpp"
#include "cmfomp/rng.hpp"

using namespace cmfomp;

TEST(Point, RejectsNonFinite) {
  EXPECT_THROW(Point({0.0, std::nan("")}), ParameterError);
  EXPECT_THROW(Point({INFINITY}), ParameterError);
}

TEST(Point, LexicographicOrder) {
  EXPECT_LT(Point({0.0, 5.0}), Point({1.0, 0.0}));
  EXPECT_LT(Point({1.0, 0.0}), Point({1.0, 0.5}));
  EXPECT_EQ(Point::zeros(3), Point({0.0, 0.0, 0.0}));
}

TEST(LpPseudoNorm, KnownValues) {
  const std::vector<double> v{3.0, -4.0};
  EXPECT_DOUBLE_EQ(lp_pseudo_norm(v, 1.0), 7.0);
  EXPECT_NEAR(lp_pseudo_norm(v, 0.5), std::sqrt(3.0) + 2.0, 1e-15);
  EXPECT_EQ(lp_pseudo_norm(std::vector<double>{0.0, 0.0}, 0.5), 0.0);
}

TEST(LpPseudoNorm, RejectsBadExponent) {
  const std::vector<double> v{1.0};
  EXPECT_THROW(lp_pseudo_norm(v, 0.0), ParameterError);
  EXPECT_THROW(lp_pseudo_norm(v, 1.5), ParameterError);
  EXPECT_THROW(lp_pseudo_norm(v, -1.0), ParameterError);
}

TEST(LpPseudoNorm, TriangleInequalityForPthPower) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double p = rng.uniform(0.05, 1.0);
    const std::size_t dim = 1 + rng.index(4);
    std::vector<double> u(dim), v(dim), w(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      u[d] = rng.normal() * 3.0;
      v[d] = rng.normal() * 3.0;
      w[d] = u[d] + v[d];
    }
    EXPECT_LE(lp_pseudo_norm(w, p), lp_pseudo_norm(u, p) + lp_pseudo_norm(v, p) + 1e-12);
  }
}

TEST(Support, RejectsDuplicatesAndMixedDimensions) {
  EXPECT_THROW(Support({Point{0.0}, Point{0.0}}), ParameterError);
  EXPECT_THROW(Support({Point{0.0}, Point{1e-13}}), ParameterError);
  EXPECT_NO_THROW(Support({Point{0.0}, Point{1e-11}}));
  EXPECT_THROW(Support({Point{0.0}, Point{1.0, 2.0}}), ParameterError);
}

TEST(Support, Find) {
  const Support s({Point{0.0, 1.0}, Point{2.0, 3.0}});
  EXPECT_EQ(s.find(Point{2.0, 3.0}), 1u);
  EXPECT_FALSE(s.find(Point{2.0, 3.1}).has_value());
  EXPECT_EQ(s.find(Point{2.0, 3.1}, 0.2), 1u);
}

TEST(SetAug, TwoPointExample) {
  const Support s({Point{0.0, 0.0}, Point{1.0, 1.0}});
  const CartesianGrid g = set_aug(s);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g.points()[0], Point({0.0, 0.0}));
  EXPECT_EQ(g.points()[1], Point({0.0, 1.0}));
  EXPECT_EQ(g.points()[2], Point({1.0, 0.0}));
  EXPECT_EQ(g.points()[3], Point({1.0, 1.0}));
}

TEST(SetAug, SharedCoordinatesCollapse) {
  const Support s({Point{0.0, 0.0}, Point{0.0, 1.0}, Point{1.0, 1.0}});
  const CartesianGrid g = set_aug(s);
  EXPECT_EQ(g.size(), 4u);
  EXPECT_EQ(g.axis(0), (std::vector<double>{0.0, 1.0}));
}

TEST(SetAug, OneDimensionalIsIdentity) {
  const Support s({Point{2.0}, Point{-1.0}, Point{0.5}});
  const CartesianGrid g = set_aug(s);
  EXPECT_EQ(g.size(), 3u);
  EXPECT_EQ(g.axis(0), (std::vector<double>{-1.0, 0.5, 2.0}));
}

TEST(SetAug, RejectsEmpty) {
  EXPECT_THROW(set_aug(std::span<const Point>()), ParameterError);
  EXPECT_THROW(CartesianGrid({}), ParameterError);
}

TEST(SetAug, IdempotentAndContainsSupport) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const std::size_t dim = 1 + rng.index(3);
    const std::size_t k = 1 + rng.index(6);
    const Support s = random_support(rng, k, dim, -5.0, 5.0, 0.0);
    const CartesianGrid g = set_aug(s);
    const CartesianGrid g2 = set_aug(std::span<const Point>(g.points()));
    EXPECT_EQ(g.axes(), g2.axes());
    EXPECT_EQ(g.points(), g2.points());
    for (const auto& p : s) EXPECT_TRUE(g.contains(p));
    EXPECT_TRUE(std::is_sorted(g.points().begin(), g.points().end()));
  }
}

TEST(CartesianGrid, Distances) {
  const CartesianGrid g({{0.0, 1.0}, {0.0, 2.0}});
  EXPECT_DOUBLE_EQ(g.distance_to_grid(Point{0.25, 1.5}), 0.5);
  EXPECT_DOUBLE_EQ(g.distance_to_grid(Point{1.0, 2.0}), 0.0);
  EXPECT_DOUBLE_EQ(g.distance_to_axis(1, 0.75), 0.75);
  EXPECT_THROW(g.distance_to_grid(Point{0.0}), ParameterError);
}

TEST(MinAxisSeparation, Examples) {
  EXPECT_DOUBLE_EQ(*min_axis_separation(Support({Point{0.0, 0.0}, Point{0.5, 2.0}})), 0.5);
  EXPECT_DOUBLE_EQ(*min_axis_separation(Support({Point{0.0, 0.0}, Point{0.0, 3.0}})), 3.0);
  EXPECT_THROW(min_axis_separation(Support({Point{0.0}})), ParameterError);
}

TEST(MinAxisSeparation, InvariantUnderPermutationAndTranslation) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const std::size_t dim = 1 + rng.index(3);
    const std::size_t k = 2 + rng.index(5);
    const Support s = random_support(rng, k, dim, -5.0, 5.0, 0.0);
    std::vector<std::size_t> perm(dim);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::vector<double> shift(dim);
    for (auto& x : shift) x = rng.uniform(-1.0, 1.0);
    std::vector<Point> moved;
    for (const auto& p : s) {
      std::vector<double> c(dim);
      for (std::size_t d = 0; d < dim; ++d) c[d] = p[perm[d]] + shift[d];
      moved.emplace_back(std::move(c));
    }
    std::vector<Point> reordered(s.points().rbegin(), s.points().rend());
    const double base = *min_axis_separation(s);
    EXPECT_NEAR(*min_axis_separation(Support(moved)), base, 1e-12);
    EXPECT_EQ(*min_axis_separation(Support(reordered)), base);
  }
}

TEST(LpPseudoNorm, UnitEntries) { EXPECT_DOUBLE_EQ(lp_pseudo_norm(std::vector<double>{1.0, 1.0}, 0.5), 2.0); }

TEST(SetAug, ThreeGenericPointsGiveNine) {
  const Support s({Point{0.0, 0.3}, Point{1.1, 2.0}, Point{-0.7, 1.4}});
  const CartesianGrid g = set_aug(s);
  EXPECT_EQ(g.size(), 9u);
  std::size_t augmented = 0;
  for (const auto& p : g.points()) augmented += s.find(p) ? 0 : 1;
  EXPECT_EQ(augmented, 6u);
  EXPECT_EQ(set_aug(Support({Point{5.0}})).points(), std::vector<Point>{Point{5.0}});
}

TEST(MinAxisSeparation, MoreExamples) {
  EXPECT_DOUBLE_EQ(*min_axis_separation(Support({Point{0.0, 0.0}, Point{1.0, 0.0}, Point{1.0, 3.0}})), 1.0);
  EXPECT_DOUBLE_EQ(*min_axis_separation(Support({Point{0.0}, Point{2.0}})), 2.0);
  EXPECT_DOUBLE_EQ(*min_axis_separation(Support({Point{0.0, 0.0}, Point{0.0, 5.0}})), 5.0);
}
