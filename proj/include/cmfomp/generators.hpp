#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "cmfomp/certify.hpp"
#include "cmfomp/errors.hpp"
#include "cmfomp/gram.hpp"
#include "cmfomp/kernels.hpp"
#include "cmfomp/param_space.hpp"
#include "cmfomp/rng.hpp"

namespace cmfomp {

// k points uniform in [lo, hi]^D whose coordinates differ by at least min_gap on
// every axis. With tight = true, one pair is placed exactly min_gap apart on axis 0.
inline Support random_support(Rng& rng, std::size_t k, std::size_t dim, double lo, double hi, double min_gap,
                              bool tight = false) {
  if (k == 0) return Support();
  if (!(hi > lo) || min_gap < 0.0 || dim == 0) throw ParameterError("random_support: bad box or gap");
  if (min_gap * static_cast<double>(k) > hi - lo) throw ParameterError("random_support: gap too large for box");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<std::vector<double>> coords(k, std::vector<double>(dim));
    for (auto& p : coords) {
      for (auto& x : p) x = rng.uniform(lo, hi);
    }
    if (tight && k >= 2) {
      const double base = coords[0][0];
      coords[1][0] = base + min_gap <= hi ? base + min_gap : base - min_gap;
    }
    bool ok = true;
    for (std::size_t d = 0; d < dim && ok; ++d) {
      for (std::size_t i = 0; i < k && ok; ++i) {
        for (std::size_t j = i + 1; j < k && ok; ++j) {
          ok = std::abs(coords[i][d] - coords[j][d]) >= min_gap * (1.0 - 1e-12);
        }
      }
    }
    if (!ok) continue;
    std::vector<Point> pts;
    for (auto& c : coords) pts.emplace_back(std::move(c));
    return Support(std::move(pts));
  }
  throw ParameterError("random_support: rejection sampling did not converge");
}

// k distinct points whose smallest nonzero per-axis coordinate gap is exactly delta0.
// Axis values are spaced by delta0 * (1 + U[0, spread)) with one gap of exactly delta0.
inline Support separated_support(Rng& rng, std::size_t k, std::size_t dim, double delta0, double spread = 1.0) {
  if (k < 2 || dim == 0 || !(delta0 > 0.0)) throw ParameterError("separated_support: need k >= 2, D >= 1, delta0 > 0");
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<std::vector<double>> axes(dim);
    std::size_t exact_idx = 0;
    for (std::size_t d = 0; d < dim; ++d) {
      const std::size_t n = d == 0 ? (dim == 1 ? k : 2 + rng.index(k - 1)) : 1 + rng.index(k);
      const std::size_t exact = rng.index(std::max<std::size_t>(n - 1, 1));
      if (d == 0) exact_idx = exact;
      double v = rng.uniform(-2.0, 2.0);
      axes[d].push_back(v);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        v += d == 0 && i == exact ? delta0 : delta0 * (1.0 + spread * rng.uniform01());
        axes[d].push_back(v);
      }
    }
    // Points 0 and 1 straddle the exact gap on axis 0.
    std::vector<Point> pts;
    bool distinct = true;
    for (std::size_t l = 0; l < k && distinct; ++l) {
      std::vector<double> c(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        if (dim == 1) {
          c[d] = axes[d][l];
        } else if (d == 0 && l < 2) {
          c[d] = axes[d][exact_idx + l];
        } else {
          c[d] = axes[d][rng.index(axes[d].size())];
        }
      }
      Point p(std::move(c));
      for (const auto& q : pts) distinct = distinct && !same_point(p, q);
      pts.push_back(std::move(p));
    }
    if (distinct) return Support(std::move(pts));
  }
  throw ParameterError("separated_support: could not draw distinct points");
}

// Signed coefficients with magnitudes uniform in [lo, hi].
inline std::vector<double> random_coefficients(Rng& rng, std::size_t k, double lo, double hi, bool positive = false) {
  std::vector<double> c(k);
  for (auto& x : c) x = (positive ? 1.0 : rng.sign()) * rng.uniform(lo, hi);
  return c;
}

// Coefficients G^{-1} sign(G^{-1} g_theta) at the grid probe with the largest ERC
// ratio. This is the converse witness when the ratio is >= 1 and the hardest
// first-iteration input of that form otherwise. Empty when the support grid has no
// point outside the support or the construction yields a zero coefficient.
inline std::vector<double> adversarial_coefficients(const KernelSpec& kernel, const Support& truth) {
  const RestrictedErc erc = restricted_erc(kernel, truth);
  if (!erc.argmax) return {};
  const GramMatrix g(kernel, truth);
  const Eigen::VectorXd v = g.solve(correlation_vector(kernel, truth, *erc.argmax));
  Eigen::VectorXd s(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) s(i) = v(i) >= 0.0 ? 1.0 : -1.0;
  const Eigen::VectorXd c = g.solve(s);
  std::vector<double> out(c.data(), c.data() + c.size());
  for (double x : out) {
    if (!(std::isfinite(x) && x != 0.0)) return {};
  }
  return out;
}

}  // namespace cmfomp
