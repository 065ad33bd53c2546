#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "cmfomp/errors.hpp"
#include "cmfomp/kernels.hpp"
#include "cmfomp/param_space.hpp"

namespace cmfomp {

struct OptimizerConfig {
  // Samples per one-dimensional section.
  std::size_t grid_points_per_axis = 512;
  // Cap on coordinate-ascent sweeps per start.
  std::size_t refine_iterations = 60;
  // Relative: candidates with value >= best * (1 - tie_tolerance) are tied.
  double tie_tolerance = 1e-9;
  // Level used for the search radius when no positive lower bound is known.
  double exclusion_epsilon = 1e-12;
  // Upper bound on the D-dimensional uniform seed lattice (D >= 2 only).
  std::size_t lattice_budget = 4096;
  // Number of best seeds refined by coordinate ascent (D >= 2 only).
  std::size_t refine_starts = 24;
  // Grid seeds built from the anchors are skipped beyond this many points.
  std::size_t max_grid_seeds = 1u << 15;
  // Tied maximizers closer than this (relative to their magnitude) are merged.
  double merge_radius = 1e-9;

  void validate() const {
    if (grid_points_per_axis < 4 || refine_iterations == 0 || refine_starts == 0 || lattice_budget == 0 ||
        max_grid_seeds == 0) {
      throw ParameterError("OptimizerConfig: counts must be positive (grid_points_per_axis >= 4)");
    }
    if (!(tie_tolerance > 0.0 && tie_tolerance < 1.0)) throw ParameterError("OptimizerConfig: tie_tolerance in (0,1)");
    if (!(exclusion_epsilon > 0.0 && exclusion_epsilon < 1.0)) {
      throw ParameterError("OptimizerConfig: exclusion_epsilon in (0,1)");
    }
    if (!(merge_radius >= 0.0)) throw ParameterError("OptimizerConfig: merge_radius must be >= 0");
  }
};

// theta -> |sum_l w_l kappa(theta, anchor_l)|
class CorrelationFunction {
 public:
  CorrelationFunction(KernelSpec kernel, std::vector<Point> anchors, std::vector<double> weights)
      : kernel_(std::move(kernel)), anchors_(std::move(anchors)), weights_(std::move(weights)) {
    if (anchors_.size() != weights_.size()) throw ParameterError("CorrelationFunction: |anchors| != |weights|");
    for (const auto& a : anchors_) {
      if (a.dim() != kernel_.dim()) throw ParameterError("CorrelationFunction: anchor dimension mismatch");
    }
    for (double w : weights_) {
      if (!std::isfinite(w)) throw ParameterError("CorrelationFunction: non-finite weight");
    }
  }

  const KernelSpec& kernel() const { return kernel_; }
  const std::vector<Point>& anchors() const { return anchors_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t dim() const { return kernel_.dim(); }

  double weight_l1() const {
    double s = 0.0;
    for (double w : weights_) s += std::abs(w);
    return s;
  }

  // Signed sum.
  double signed_value(const Point& theta) const {
    if (theta.dim() != dim()) throw ParameterError("CorrelationFunction: dimension mismatch");
    double s = 0.0;
    for (std::size_t l = 0; l < anchors_.size(); ++l) {
      s += weights_[l] * kernel_.eval_unchecked(theta.coords(), anchors_[l].coords());
    }
    return s;
  }

  double operator()(const Point& theta) const { return std::abs(signed_value(theta)); }

 private:
  KernelSpec kernel_;
  std::vector<Point> anchors_;
  std::vector<double> weights_;
};

struct ArgmaxResult {
  // Tied maximizers in lexicographic order; front() is the canonical selection.
  std::vector<Point> maximizers;
  double value = 0.0;
  // Per-coordinate search radius around the anchors' bounding box and the
  // resulting bound on |f| outside it: weight_l1 * outer(radius^q).
  double radius = 0.0;
  double exterior_bound = 0.0;
  std::size_t evaluations = 0;

  const Point& canonical() const { return maximizers.front(); }
};

struct SectionResult {
  // Section coordinates t (relative to base[axis]), ascending.
  std::vector<double> maximizers;
  double value = 0.0;
  double radius = 0.0;
  double exterior_bound = 0.0;
  bool identically_zero = false;
  std::size_t evaluations = 0;
};

namespace detail {

inline void check_finite(double v) {
  if (!std::isfinite(v)) throw NumericError("optimizer: non-finite correlation value");
}

// Search radius R with weight_l1 * outer(R^q) < lower_bound.
inline double exclusion_radius(const KernelSpec& k, double weight_l1, double lower_bound, double eps) {
  double level = lower_bound / (2.0 * weight_l1);
  if (!(level > 0.0)) level = eps;
  level = std::min(level, 0.5);
  return k.radius_for(level);
}

// One axis-parallel section t -> |sum_l w_l outer(r_l + |t - s_l|^q)|, where r_l
// collects the other coordinates' terms and s_l is the anchor's coordinate on the axis.
class Section {
 public:
  Section(const CorrelationFunction& f, const Point& base, std::size_t axis) : kernel_(f.kernel()) {
    const auto& anchors = f.anchors();
    const auto& w = f.weights();
    const bool separable = kernel_.is_gaussian() || kernel_.phi().family() == CmfSpec::Family::Laplace;
    separable_ = separable;
    for (std::size_t l = 0; l < anchors.size(); ++l) {
      double r = 0.0;
      for (std::size_t d = 0; d < kernel_.dim(); ++d) {
        if (d != axis) r += kernel_.coord_term(base[d] - anchors[l][d]);
      }
      pos_.push_back(anchors[l][axis]);
      if (separable) {
        // outer(r + x) = outer(r) outer(x) for exponential profiles.
        weight_.push_back(w[l] * kernel_.outer(r));
        offset_.push_back(0.0);
      } else {
        weight_.push_back(w[l]);
        offset_.push_back(r);
      }
      scale_ += std::abs(w[l]) * kernel_.outer(r);
    }
  }

  double operator()(double t) const {
    ++evaluations;
    double s = 0.0;
    for (std::size_t l = 0; l < pos_.size(); ++l) {
      const double x = kernel_.coord_term(t - pos_[l]);
      s += weight_[l] * kernel_.outer(separable_ ? x : offset_[l] + x);
    }
    return std::abs(s);
  }

  const std::vector<double>& positions() const { return pos_; }
  // Sum of |w_l| outer(r_l): the size of the individual terms on the section.
  double term_scale() const { return scale_; }

  mutable std::size_t evaluations = 0;

 private:
  const KernelSpec& kernel_;
  bool separable_ = false;
  std::vector<double> pos_;
  std::vector<double> weight_;
  std::vector<double> offset_;
  double scale_ = 0.0;
};

// Golden-section search for a maximum of h on [a, b] bracketing the sample at c.
template <class Fn>
std::pair<double, double> golden_max(const Fn& h, double a, double b, double c, double hc) {
  constexpr double kInvPhi = 0.6180339887498949;
  double best_t = c;
  double best_v = hc;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = h(x1);
  double f2 = h(x2);
  for (int it = 0; it < 200; ++it) {
    if (f1 > best_v) best_v = f1, best_t = x1;
    if (f2 > best_v) best_v = f2, best_t = x2;
    if (b - a <= 1e-13 * std::max(1.0, std::abs(a) + std::abs(b))) break;
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = h(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = h(x2);
    }
  }
  return {best_t, best_v};
}

struct Candidate1d {
  double t;
  double value;
};

// Maximizes a section over absolute coordinates. Every anchor coordinate (where
// CMF kernels have their kinks) is evaluated exactly; the smooth pieces in
// between are sampled and local maxima are refined by golden section.
inline SectionResult maximize_section(const Section& sec, double weight_l1, const KernelSpec& kernel,
                                      const OptimizerConfig& cfg) {
  SectionResult out;
  std::vector<double> breaks = detail::sorted_unique(sec.positions());
  std::vector<Candidate1d> cands;
  double lower = 0.0;
  for (double b : breaks) {
    const double v = sec(b);
    check_finite(v);
    cands.push_back({b, v});
    lower = std::max(lower, v);
  }
  const double radius = exclusion_radius(kernel, weight_l1, lower, cfg.exclusion_epsilon);
  out.radius = radius;

  const double lo = breaks.front() - radius;
  const double hi = breaks.back() + radius;
  const std::size_t n_total = cfg.grid_points_per_axis;
  constexpr std::size_t kMinPerSegment = 16;

  auto scan = [&](const std::vector<double>& ts) {
    std::vector<double> vs(ts.size());
    for (std::size_t j = 0; j < ts.size(); ++j) {
      vs[j] = sec(ts[j]);
      check_finite(vs[j]);
    }
    for (std::size_t j = 1; j + 1 < ts.size(); ++j) {
      if (vs[j] > 0.0 && vs[j] >= vs[j - 1] && vs[j] >= vs[j + 1] && (vs[j] > vs[j - 1] || vs[j] > vs[j + 1])) {
        auto [t, v] = golden_max(sec, ts[j - 1], ts[j + 1], ts[j], vs[j]);
        check_finite(v);
        cands.push_back({t, v});
      }
    }
  };

  // Interior segments between consecutive anchor coordinates.
  const double span = breaks.back() - breaks.front();
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    const auto share = static_cast<std::size_t>(std::ceil(static_cast<double>(n_total) * (b - a) / span));
    const std::size_t n = std::max(kMinPerSegment, share);
    std::vector<double> ts(n + 1);
    for (std::size_t j = 0; j <= n; ++j) ts[j] = a + (b - a) * static_cast<double>(j) / static_cast<double>(n);
    ts.back() = b;
    scan(ts);
  }
  // Outer segments, sampled quadratically denser near the outermost anchor.
  const std::size_t n_out = std::max(kMinPerSegment, n_total / 2);
  for (int side = -1; side <= 1; side += 2) {
    const double origin = side < 0 ? breaks.front() : breaks.back();
    std::vector<double> ts(n_out + 1);
    for (std::size_t j = 0; j <= n_out; ++j) {
      const double u = static_cast<double>(j) / static_cast<double>(n_out);
      ts[j] = origin + side * radius * u * u;
    }
    if (side < 0) std::reverse(ts.begin(), ts.end());
    scan(ts);
  }

  double best = 0.0;
  for (const auto& c : cands) best = std::max(best, c.value);
  out.value = best;
  out.exterior_bound = weight_l1 * kernel.outer(kernel.coord_term(radius));
  out.identically_zero = !(best > 1e-13 * sec.term_scale());

  // Refined interior points that collapsed onto an anchor coordinate are that kink.
  auto near_break = [&](double t) {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    auto it = std::lower_bound(breaks.begin(), breaks.end(), t);
    if (it != breaks.end() && std::abs(*it - t) <= tol && *it != t) return true;
    if (it != breaks.begin() && std::abs(*std::prev(it) - t) <= tol && *std::prev(it) != t) return true;
    return false;
  };
  std::vector<Candidate1d> ties;
  for (const auto& c : cands) {
    if (c.value >= best * (1.0 - cfg.tie_tolerance) && !near_break(c.t) && c.t >= lo && c.t <= hi) ties.push_back(c);
  }
  if (ties.empty()) {
    for (const auto& c : cands) {
      if (c.value == best) ties.push_back(c);
    }
  }
  std::sort(ties.begin(), ties.end(), [](const auto& x, const auto& y) { return x.t < y.t; });
  for (const auto& c : ties) {
    if (!out.maximizers.empty() &&
        std::abs(c.t - out.maximizers.back()) <= std::max(kCoordEqTol, cfg.merge_radius * std::max(1.0, std::abs(c.t)))) {
      continue;
    }
    out.maximizers.push_back(c.t);
  }
  out.evaluations = sec.evaluations;
  return out;
}

}  // namespace detail

// Global maximization of |sum_l w_l kappa(theta, theta_l)| over one
// axis-parallel line through base. Returned coordinates are offsets from base[axis].
inline SectionResult argmax_1d_section(const CorrelationFunction& f, const Point& base, std::size_t axis,
                                       const OptimizerConfig& cfg = {}) {
  cfg.validate();
  if (base.dim() != f.dim()) throw ParameterError("argmax_1d_section: dimension mismatch");
  if (axis >= f.dim()) throw ParameterError("argmax_1d_section: axis out of range");
  const double l1 = f.weight_l1();
  if (!(l1 > 0.0)) throw EmptyResidualError("argmax_1d_section: all weights are zero");
  detail::Section sec(f, base, axis);
  SectionResult r = detail::maximize_section(sec, l1, f.kernel(), cfg);
  for (auto& t : r.maximizers) t -= base[axis];
  return r;
}

namespace detail {

struct Candidate {
  Point theta;
  double value;
};

inline void sort_desc(std::vector<Candidate>& c) {
  std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.theta < b.theta;
  });
}

}  // namespace detail

// Global maximizers of |f| over R^D. Seeds: every anchor, the grid spanned by
// the anchors' coordinates and a uniform lattice; the best seeds are refined by
// cyclic coordinate ascent, each step maximizing one axis-parallel section.
// The search box is the anchors' bounding box inflated by a radius outside of
// which |f| provably stays below the best value found.
inline ArgmaxResult global_argmax(const CorrelationFunction& f, const OptimizerConfig& cfg = {}) {
  cfg.validate();
  const double l1 = f.weight_l1();
  if (!(l1 > 0.0)) throw EmptyResidualError("global_argmax: all weights are zero");
  if (f.anchors().empty()) throw EmptyResidualError("global_argmax: no anchors");
  const std::size_t dim = f.dim();
  ArgmaxResult out;

  std::vector<detail::Candidate> cands;
  auto eval = [&](const Point& p) {
    ++out.evaluations;
    const double v = f(p);
    detail::check_finite(v);
    return v;
  };

  if (dim == 1) {
    detail::Section sec(f, Point::zeros(1), 0);
    SectionResult r = detail::maximize_section(sec, l1, f.kernel(), cfg);
    out.value = r.value;
    out.radius = r.radius;
    out.exterior_bound = r.exterior_bound;
    out.evaluations = r.evaluations;
    for (double t : r.maximizers) out.maximizers.push_back(Point{t});
    return out;
  }

  double lower = 0.0;
  for (const auto& a : f.anchors()) {
    cands.push_back({a, eval(a)});
    lower = std::max(lower, cands.back().value);
  }
  {
    std::size_t grid_size = 1;
    std::vector<std::vector<double>> axes(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      for (const auto& a : f.anchors()) axes[d].push_back(a[d]);
      axes[d] = detail::sorted_unique(axes[d]);
      grid_size *= axes[d].size();
    }
    if (grid_size <= cfg.max_grid_seeds) {
      CartesianGrid grid(axes);
      for (const auto& g : grid.points()) {
        cands.push_back({g, eval(g)});
        lower = std::max(lower, cands.back().value);
      }
    }
  }

  const double radius = detail::exclusion_radius(f.kernel(), l1, lower, cfg.exclusion_epsilon);
  out.radius = radius;
  out.exterior_bound = l1 * f.kernel().outer(f.kernel().coord_term(radius));

  std::vector<double> box_lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> box_hi(dim, -std::numeric_limits<double>::infinity());
  for (const auto& a : f.anchors()) {
    for (std::size_t d = 0; d < dim; ++d) {
      box_lo[d] = std::min(box_lo[d], a[d] - radius);
      box_hi[d] = std::max(box_hi[d], a[d] + radius);
    }
  }
  {
    auto n = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(cfg.lattice_budget), 1.0 / dim) + 1e-9));
    n = std::clamp<std::size_t>(n, 2, cfg.grid_points_per_axis);
    std::vector<std::vector<double>> axes(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      for (std::size_t j = 0; j < n; ++j) {
        axes[d].push_back(box_lo[d] + (box_hi[d] - box_lo[d]) * (static_cast<double>(j) + 0.5) / static_cast<double>(n));
      }
    }
    CartesianGrid lattice(axes);
    for (const auto& g : lattice.points()) cands.push_back({g, eval(g)});
  }

  detail::sort_desc(cands);
  std::vector<Point> starts;
  for (const auto& c : cands) {
    if (starts.size() >= cfg.refine_starts) break;
    bool dup = false;
    for (const auto& s : starts) {
      if (same_point(s, c.theta)) {
        dup = true;
        break;
      }
    }
    if (!dup) starts.push_back(c.theta);
  }

  for (const auto& start : starts) {
    Point x = start;
    double val = eval(x);
    for (std::size_t sweep = 0; sweep < cfg.refine_iterations; ++sweep) {
      double moved = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        detail::Section sec(f, x, d);
        SectionResult r = detail::maximize_section(sec, l1, f.kernel(), cfg);
        out.evaluations += r.evaluations;
        if (r.maximizers.empty() || !(r.value > val)) continue;
        const double t = r.maximizers.front();
        moved = std::max(moved, std::abs(t - x[d]));
        x = x.with_coord(d, t);
        val = eval(x);
      }
      if (moved < 1e-12) break;
    }
    cands.push_back({x, val});
  }

  double best = 0.0;
  for (const auto& c : cands) best = std::max(best, c.value);
  out.value = best;

  std::vector<detail::Candidate> ties;
  for (const auto& c : cands) {
    if (c.value >= best * (1.0 - cfg.tie_tolerance)) ties.push_back(c);
  }
  detail::sort_desc(ties);
  // Merge near-duplicates, keeping the better-valued representative.
  std::vector<Point> kept;
  for (const auto& c : ties) {
    bool dup = false;
    for (const auto& k : kept) {
      double mag = 1.0;
      for (std::size_t d = 0; d < dim; ++d) mag = std::max(mag, std::abs(k[d]));
      if (max_abs_diff(k, c.theta) <= std::max(kCoordEqTol, cfg.merge_radius * mag)) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(c.theta);
  }
  std::sort(kept.begin(), kept.end());
  out.maximizers = std::move(kept);
  return out;
}

}  // namespace cmfomp
