#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cmfomp/errors.hpp"
#include "cmfomp/gram.hpp"
#include "cmfomp/kernels.hpp"
#include "cmfomp/omp.hpp"
#include "cmfomp/optimizer.hpp"
#include "cmfomp/param_space.hpp"
#include "cmfomp/rng.hpp"

namespace cmfomp {

// Strict certificate inequalities must hold with at least this margin; closer
// calls are reported as Boundary.
inline constexpr double kCertMargin = 1e-10;

enum class CertStatus { Pass, Boundary, Fail, Vacuous };

inline const char* to_string(CertStatus s) {
  switch (s) {
    case CertStatus::Pass: return "pass";
    case CertStatus::Boundary: return "boundary";
    case CertStatus::Fail: return "fail";
    case CertStatus::Vacuous: return "vacuous-pass";
  }
  return "?";
}

inline bool passes(CertStatus s) { return s == CertStatus::Pass || s == CertStatus::Vacuous; }

// Status of "lhs < rhs" with the certificate margin.
inline CertStatus strict_less(double lhs, double rhs) {
  if (lhs < rhs - kCertMargin) return CertStatus::Pass;
  if (lhs <= rhs + kCertMargin) return CertStatus::Boundary;
  return CertStatus::Fail;
}

struct ErcProbe {
  Point probe;
  double ratio;
};

struct RestrictedErc {
  // max over the grid points outside the support of ||G^{-1} g_theta||_1; 0 when there are none.
  double value = 0.0;
  std::optional<Point> argmax;
  std::vector<ErcProbe> probes;
  CertStatus status = CertStatus::Vacuous;
};

inline RestrictedErc restricted_erc(const KernelSpec& kernel, const Support& truth) {
  if (truth.empty()) throw ParameterError("restricted_erc: empty support");
  RestrictedErc out;
  const CartesianGrid grid = set_aug(truth);
  if (grid.size() == truth.size()) return out;
  const GramMatrix g(kernel, truth);
  for (const auto& p : grid.points()) {
    if (truth.find(p)) continue;
    const double r = erc_ratio(g, correlation_vector(kernel, truth, p));
    out.probes.push_back({p, r});
    if (!out.argmax || r > out.value) {
      out.value = r;
      out.argmax = p;
    }
  }
  out.status = strict_less(out.value, 1.0);
  return out;
}

struct CoherenceReport {
  // Largest kernel value over distinct pairs of the support's grid.
  double mu = 0.0;
  // (1 + 1/mu) / 2, +inf when mu = 0.
  double bound = std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  CertStatus status = CertStatus::Vacuous;
};

inline CoherenceReport coherence_certificate(const KernelSpec& kernel, const Support& truth) {
  if (truth.empty()) throw ParameterError("coherence_certificate: empty support");
  CoherenceReport out;
  out.k = truth.size();
  const CartesianGrid grid = set_aug(truth);
  const auto& pts = grid.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) out.mu = std::max(out.mu, std::abs(kernel.eval(pts[i], pts[j])));
  }
  if (pts.size() < 2) return out;
  out.bound = out.mu > 0.0 ? 0.5 * (1.0 + 1.0 / out.mu) : std::numeric_limits<double>::infinity();
  out.status = std::isinf(out.bound) ? CertStatus::Pass : strict_less(static_cast<double>(out.k), out.bound);
  return out;
}

struct SeparationReport {
  std::optional<double> delta0;
  // delta0^p and the requirement log(2k-1)/lambda on it.
  double delta0_p = 0.0;
  double threshold = 0.0;
  CertStatus status = CertStatus::Vacuous;
};

// Minimum-separation condition for generalized Laplace kernels.
inline SeparationReport separation_certificate(const Support& truth, double lambda, double p) {
  if (!(lambda > 0.0)) throw ParameterError("separation_certificate: lambda must be positive");
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("separation_certificate: p must lie in (0,1]");
  SeparationReport out;
  const auto k = static_cast<double>(truth.size());
  out.threshold = truth.size() >= 1 ? std::log(2.0 * k - 1.0) / lambda : 0.0;
  if (truth.size() < 2) return out;
  out.delta0 = min_axis_separation(truth);
  if (!out.delta0) {
    out.status = CertStatus::Fail;
    return out;
  }
  out.delta0_p = std::pow(*out.delta0, p);
  // Required: delta0^p >= threshold, i.e. threshold < delta0^p with margin.
  const CertStatus s = strict_less(out.threshold, out.delta0_p);
  out.status = s;
  return out;
}

struct AdversarialWitness {
  Point probe;
  std::vector<double> coefficients;
  // |<a(probe), y>| and max over the support of |<a(theta_l), y>|.
  double achieved_outer = 0.0;
  double achieved_inner_max = 0.0;
  double erc_ratio = 0.0;

  bool valid() const { return achieved_outer >= achieved_inner_max * (1.0 - kCertMargin); }
};

// c = G^{-1} sign(G^{-1} g_probe): inner correlations become +-1 and the probe
// correlation becomes ||G^{-1} g_probe||_1.
inline AdversarialWitness adversarial_input(const KernelSpec& kernel, const Support& truth, const Point& probe) {
  const GramMatrix g(kernel, truth);
  const Eigen::VectorXd gp = correlation_vector(kernel, truth, probe);
  const Eigen::VectorXd v = g.solve(gp);
  const double ratio = v.lpNorm<1>();
  if (ratio < 1.0 - kCertMargin) {
    throw CertificateHoldsError("adversarial_input: ERC ratio " + std::to_string(ratio) + " < 1 at probe");
  }
  Eigen::VectorXd s(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) s(i) = v(i) > 0.0 ? 1.0 : (v(i) < 0.0 ? -1.0 : 0.0);
  const Eigen::VectorXd c = g.solve(s);
  AdversarialWitness w;
  w.probe = probe;
  w.erc_ratio = ratio;
  w.coefficients.assign(c.data(), c.data() + c.size());
  w.achieved_outer = std::abs(gp.dot(c));
  w.achieved_inner_max = (g.entries() * c).cwiseAbs().maxCoeff();
  return w;
}

struct FalsifierWitness {
  std::size_t axis = 0;
  Point offset;
  std::vector<double> coefficients;
  std::vector<double> maximizers;
  double value = 0.0;
  // Best section value over the grid's axis values.
  double best_on_axis = 0.0;
};

struct FalsifierReport {
  bool violated = false;
  std::size_t trials_run = 0;
  std::size_t skipped_zero = 0;
  std::optional<FalsifierWitness> witness;
};

// One-sided search for an axis-parallel section of a grid-anchored correlation
// function whose global maximizers leave the grid's axis values. Can only
// certify a violation. Coefficient sets in `probes` are tried first at the zero
// offset on every axis; random trials follow.
inline FalsifierReport axis_admissibility_falsifier(const KernelSpec& kernel, const CartesianGrid& grid,
                                                    std::size_t trials, std::uint64_t seed,
                                                    const std::vector<std::vector<double>>& probes = {},
                                                    double tau_match = kDefaultTauMatch,
                                                    const OptimizerConfig& cfg = {}) {
  if (grid.dim() != kernel.dim()) throw ParameterError("axis_admissibility_falsifier: dimension mismatch");
  const std::size_t dim = grid.dim();
  const auto& pts = grid.points();
  FalsifierReport rep;

  auto try_case = [&](std::size_t axis, const Point& offset, const std::vector<double>& coef) {
    ++rep.trials_run;
    CorrelationFunction f(kernel, pts, coef);
    if (!(f.weight_l1() > 0.0)) {
      ++rep.skipped_zero;
      return false;
    }
    const SectionResult sec = argmax_1d_section(f, offset, axis, cfg);
    if (sec.identically_zero) {
      ++rep.skipped_zero;
      return false;
    }
    bool off = false;
    for (double t : sec.maximizers) off = off || grid.distance_to_axis(axis, t + offset[axis]) > tau_match;
    if (!off) return false;
    FalsifierWitness w;
    w.axis = axis;
    w.offset = offset;
    w.coefficients = coef;
    w.maximizers = sec.maximizers;
    w.value = sec.value;
    for (double a : grid.axis(axis)) w.best_on_axis = std::max(w.best_on_axis, f(offset.with_coord(axis, a)));
    rep.violated = true;
    rep.witness = std::move(w);
    return true;
  };

  for (const auto& coef : probes) {
    if (coef.size() != pts.size()) throw ParameterError("axis_admissibility_falsifier: probe size != grid size");
    for (std::size_t d = 0; d < dim; ++d) {
      if (try_case(d, Point::zeros(dim), coef)) return rep;
    }
  }

  // Offsets come from the grid's bounding box inflated by one axis gap.
  std::vector<double> lo(dim), hi(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const auto& a = grid.axis(d);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < a.size(); ++i) gap = std::min(gap, a[i + 1] - a[i]);
    if (!std::isfinite(gap)) gap = 1.0;
    lo[d] = a.front() - gap;
    hi[d] = a.back() + gap;
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t axis = static_cast<std::size_t>(rng.index(dim));
    std::vector<double> off(dim, 0.0);
    if (i > 0) {
      for (std::size_t d = 0; d < dim; ++d) off[d] = d == axis ? 0.0 : rng.uniform(lo[d], hi[d]);
    }
    std::vector<double> coef(pts.size());
    for (auto& c : coef) c = rng.normal();
    if (try_case(axis, Point(off), coef)) return rep;
  }
  return rep;
}

struct GridSectionProbe {
  double f_zero = 0.0;
  double f_delta = 0.0;
  double f_half = 0.0;
  // Closed form of f_1(delta/2).
  double closed_form = 0.0;
  // c_3 = c_4.
  double c34 = 0.0;
};

// Section along the first axis of the grid {0, delta}^2 with coefficients
// (1, 1, c34, c34), c34 = -(1 + phi(delta^p)) / (phi(delta^p) + phi(2 delta^p)).
inline GridSectionProbe grid_section_probe(const CmfSpec& phi, double delta, double p) {
  if (!(delta > 0.0)) throw ParameterError("grid_section_probe: delta must be positive");
  const KernelSpec kernel = KernelSpec::cmf(phi, p, 2);
  const double dp = std::pow(delta, p);
  GridSectionProbe out;
  out.c34 = -(1.0 + phi.value(dp)) / (phi.value(dp) + phi.value(2.0 * dp));
  const std::vector<Point> grid{Point{0.0, 0.0}, Point{delta, 0.0}, Point{0.0, delta}, Point{delta, delta}};
  const CorrelationFunction f(kernel, grid, {1.0, 1.0, out.c34, out.c34});
  out.f_zero = f(Point{0.0, 0.0});
  out.f_delta = f(Point{delta, 0.0});
  out.f_half = f(Point{delta / 2.0, 0.0});
  const double half_p = dp / std::pow(2.0, p);
  out.closed_form = 2.0 * phi.value(half_p) *
                    std::abs(1.0 - (1.0 + phi.value(dp)) / (phi.value(dp) + phi.value(2.0 * dp)) *
                                       (phi.value(dp + half_p) / phi.value(half_p)));
  return out;
}

// (k-1) phi(2x) - k phi(x) + 1; negative means the origin beats every vertex of
// the simplex configuration at the first iteration.
inline double simplex_margin(const CmfSpec& phi, std::size_t k, double x) {
  if (k < 3) throw ParameterError("simplex_margin: k must be >= 3");
  if (!(x >= 0.0)) throw ParameterError("simplex_margin: x must be nonnegative");
  const auto kd = static_cast<double>(k);
  return (kd - 1.0) * cmf_eval(phi, 2.0 * x) - kd * cmf_eval(phi, x) + 1.0;
}

// Smallest sign change of simplex_margin on (0, inf), located by bisection.
inline double simplex_crossover(const CmfSpec& phi, std::size_t k) {
  double hi = 1.0;
  while (simplex_margin(phi, k, hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericError("simplex_crossover: no sign change found");
  }
  double lo = hi;
  while (simplex_margin(phi, k, lo) >= 0.0) {
    lo *= 0.5;
    if (lo < 1e-12) throw NumericError("simplex_crossover: margin not negative near zero");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (simplex_margin(phi, k, mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// {delta e_1, ..., delta e_k} in R^D: pairwise l_p^p distance 2 delta^p, distance delta^p to the origin.
inline Support simplex_configuration(std::size_t k, std::size_t dim, double delta, double p) {
  if (k < 3 || k > dim) throw ParameterError("simplex_configuration: need 3 <= k <= D");
  if (!(delta > 0.0)) throw ParameterError("simplex_configuration: delta must be positive");
  std::vector<Point> pts;
  for (std::size_t l = 0; l < k; ++l) {
    std::vector<double> c(dim, 0.0);
    c[l] = delta;
    pts.emplace_back(std::move(c));
  }
  Support s(std::move(pts));
  const double dp = std::pow(delta, p);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> diff(dim);
    for (std::size_t d = 0; d < dim; ++d) diff[d] = s[i][d];
    if (std::abs(lp_pseudo_norm(diff, p) - dp) > 1e-12 * std::max(1.0, dp)) {
      throw NumericError("simplex_configuration: vertex distance check failed");
    }
    for (std::size_t j = i + 1; j < k; ++j) {
      for (std::size_t d = 0; d < dim; ++d) diff[d] = s[i][d] - s[j][d];
      if (std::abs(lp_pseudo_norm(diff, p) - 2.0 * dp) > 1e-12 * std::max(1.0, dp)) {
        throw NumericError("simplex_configuration: pairwise distance check failed");
      }
    }
  }
  return s;
}

}  // namespace cmfomp
