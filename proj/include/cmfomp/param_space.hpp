#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmfomp/errors.hpp"

namespace cmfomp {

// Two coordinates closer than this are the same coordinate.
inline constexpr double kCoordEqTol = 1e-12;

// A parameter in R^D identifying one atom.
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {
    for (double c : coords_) {
      if (!std::isfinite(c)) throw ParameterError("Point: non-finite coordinate");
    }
  }
  Point(std::initializer_list<double> coords) : Point(std::vector<double>(coords)) {}

  static Point zeros(std::size_t dim) { return Point(std::vector<double>(dim, 0.0)); }

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t d) const { return coords_[d]; }
  std::span<const double> coords() const { return coords_; }

  Point with_coord(std::size_t d, double value) const {
    auto c = coords_;
    c[d] = value;
    return Point(std::move(c));
  }

  // Lexicographic order; used for canonical tie-breaking.
  auto operator<=>(const Point& other) const = default;
  bool operator==(const Point& other) const = default;

 private:
  std::vector<double> coords_;
};

// Largest per-coordinate gap between two points of the same dimension.
inline double max_abs_diff(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) throw ParameterError("max_abs_diff: dimension mismatch");
  double m = 0.0;
  for (std::size_t d = 0; d < a.dim(); ++d) m = std::max(m, std::abs(a[d] - b[d]));
  return m;
}

inline bool same_point(const Point& a, const Point& b, double tol = kCoordEqTol) {
  return max_abs_diff(a, b) <= tol;
}

// Returns sum_d |v_d|^p, the p-th power of the l_p quasi-norm.
inline double lp_pseudo_norm(std::span<const double> v, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("lp_pseudo_norm: p must lie in (0,1]");
  double s = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw ParameterError("lp_pseudo_norm: non-finite entry");
    const double a = std::abs(x);
    s += (p == 1.0) ? a : std::pow(a, p);
  }
  return s;
}

// Ordered set of pairwise-distinct points sharing one dimension.
class Support {
 public:
  Support() = default;

  explicit Support(std::vector<Point> points) : points_(std::move(points)) {
    if (points_.empty()) return;
    dim_ = points_.front().dim();
    if (dim_ == 0) throw ParameterError("Support: zero-dimensional point");
    for (const auto& p : points_) {
      if (p.dim() != dim_) throw ParameterError("Support: points have mixed dimensions");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      for (std::size_t j = i + 1; j < points_.size(); ++j) {
        if (same_point(points_[i], points_[j])) {
          throw ParameterError("Support: points " + std::to_string(i) + " and " +
                               std::to_string(j) + " coincide");
        }
      }
    }
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  std::size_t dim() const { return dim_; }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const { return points_; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  // Index of a member within tol of q, if any.
  std::optional<std::size_t> find(const Point& q, double tol = kCoordEqTol) const {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (same_point(points_[i], q, tol)) return i;
    }
    return std::nullopt;
  }

 private:
  std::vector<Point> points_;
  std::size_t dim_ = 0;
};

namespace detail {

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v) {
    if (out.empty() || x - out.back() > kCoordEqTol) out.push_back(x);
  }
  return out;
}

}  // namespace detail

// Product of D sorted one-dimensional sets, materialized in lexicographic order.
class CartesianGrid {
 public:
  explicit CartesianGrid(std::vector<std::vector<double>> axes) {
    if (axes.empty()) throw ParameterError("CartesianGrid: no axes");
    for (auto& a : axes) {
      if (a.empty()) throw ParameterError("CartesianGrid: empty axis");
      for (double x : a) {
        if (!std::isfinite(x)) throw ParameterError("CartesianGrid: non-finite axis value");
      }
      axes_.push_back(detail::sorted_unique(std::move(a)));
    }
    materialize();
  }

  std::size_t dim() const { return axes_.size(); }
  std::size_t size() const { return points_.size(); }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<double>& axis(std::size_t d) const { return axes_[d]; }
  const std::vector<Point>& points() const { return points_; }

  bool contains(const Point& q, double tol = kCoordEqTol) const {
    return distance_to_grid(q) <= tol;
  }

  // Chebyshev distance from q to the nearest grid point; separable per axis.
  double distance_to_grid(const Point& q) const {
    if (q.dim() != dim()) throw ParameterError("CartesianGrid: dimension mismatch");
    double worst = 0.0;
    for (std::size_t d = 0; d < dim(); ++d) {
      worst = std::max(worst, distance_to_axis(d, q[d]));
    }
    return worst;
  }

  double distance_to_axis(std::size_t d, double t) const {
    const auto& a = axes_[d];
    auto it = std::lower_bound(a.begin(), a.end(), t);
    double best = std::numeric_limits<double>::infinity();
    if (it != a.end()) best = std::min(best, std::abs(*it - t));
    if (it != a.begin()) best = std::min(best, std::abs(*std::prev(it) - t));
    return best;
  }

 private:
  void materialize() {
    std::size_t total = 1;
    for (const auto& a : axes_) total *= a.size();
    points_.reserve(total);
    std::vector<std::size_t> idx(axes_.size(), 0);
    std::vector<double> c(axes_.size());
    for (std::size_t n = 0; n < total; ++n) {
      for (std::size_t d = 0; d < axes_.size(); ++d) c[d] = axes_[d][idx[d]];
      points_.emplace_back(c);
      for (std::size_t d = axes_.size(); d-- > 0;) {
        if (++idx[d] < axes_[d].size()) break;
        idx[d] = 0;
      }
    }
  }

  std::vector<std::vector<double>> axes_;
  std::vector<Point> points_;
};

// Smallest Cartesian grid containing every point of the set.
inline CartesianGrid set_aug(std::span<const Point> pts) {
  if (pts.empty()) throw ParameterError("set_aug: empty support");
  const std::size_t dim = pts.front().dim();
  std::vector<std::vector<double>> axes(dim);
  for (const auto& p : pts) {
    if (p.dim() != dim) throw ParameterError("set_aug: mixed dimensions");
    for (std::size_t d = 0; d < dim; ++d) axes[d].push_back(p[d]);
  }
  return CartesianGrid(std::move(axes));
}

inline CartesianGrid set_aug(const Support& s) { return set_aug(std::span<const Point>(s.points())); }

// Smallest nonzero per-axis coordinate gap over all pairs of the support.
// Empty when no coordinate pair differs, which a valid support of >= 2 points rules out.
inline std::optional<double> min_axis_separation(const Support& s) {
  if (s.size() < 2) throw ParameterError("min_axis_separation: need at least 2 points");
  std::optional<double> best;
  for (std::size_t d = 0; d < s.dim(); ++d) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        const double gap = std::abs(s[i][d] - s[j][d]);
        if (gap > kCoordEqTol && (!best || gap < *best)) best = gap;
      }
    }
  }
  return best;
}

}  // namespace cmfomp
