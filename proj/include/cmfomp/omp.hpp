#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cmfomp/errors.hpp"
#include "cmfomp/gram.hpp"
#include "cmfomp/kernels.hpp"
#include "cmfomp/optimizer.hpp"
#include "cmfomp/param_space.hpp"

namespace cmfomp {

inline constexpr double kDefaultEpsStop = 1e-10;
inline constexpr double kDefaultTauMatch = 1e-6;

// y = sum_l c_l a(theta_l) with every c_l nonzero. Atoms are never built; the
// signal is carried by its support and coefficients.
class SparseSignal {
 public:
  SparseSignal(Support support, std::vector<double> coefficients)
      : support_(std::move(support)), coefficients_(std::move(coefficients)) {
    if (support_.size() != coefficients_.size()) throw ParameterError("SparseSignal: |support| != |coefficients|");
    for (double c : coefficients_) {
      if (!std::isfinite(c) || c == 0.0) throw ParameterError("SparseSignal: coefficients must be finite and nonzero");
    }
  }

  const Support& support() const { return support_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  std::size_t size() const { return support_.size(); }

 private:
  Support support_;
  std::vector<double> coefficients_;
};

enum class Termination { ResidualZero, MaxIterations, Degenerate };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::ResidualZero: return "residual-zero";
    case Termination::MaxIterations: return "max-iterations";
    case Termination::Degenerate: return "degenerate";
  }
  return "?";
}

struct IterationRecord {
  Point selected;
  std::vector<Point> tie_set;
  double selection_value = 0.0;
  // Least-squares coefficients over every point selected so far, in selection order.
  std::vector<double> ls_coefficients;
  double residual_norm = 0.0;
  // Largest |<a(theta_j), r>| over selected theta_j after the update.
  double max_selected_correlation = 0.0;
};

struct OMPTrace {
  std::vector<IterationRecord> iterations;
  Termination terminated = Termination::ResidualZero;
  double signal_norm = 0.0;
  std::string detail;

  std::vector<Point> selected() const {
    std::vector<Point> out;
    for (const auto& it : iterations) out.push_back(it.selected);
    return out;
  }
  double final_residual() const { return iterations.empty() ? signal_norm : iterations.back().residual_norm; }
  double relative_residual() const { return signal_norm > 0.0 ? final_residual() / signal_norm : 0.0; }
};

inline std::size_t default_max_iter(std::size_t k, std::size_t dim) {
  double grid = std::pow(static_cast<double>(k), static_cast<double>(dim));
  if (grid > 1e6) grid = 1e6;
  return static_cast<std::size_t>(grid) + k;
}

// Orthogonal matching pursuit in kernel coordinates. The residual r_t = y - sum_j
// chat_j a(thetahat_j) is held as weights over the anchor set S* u Shat_t.
inline OMPTrace run_omp(const SparseSignal& signal, const KernelSpec& kernel, const OptimizerConfig& cfg,
                        std::size_t max_iter, double eps_stop = kDefaultEpsStop) {
  if (max_iter == 0) throw ParameterError("run_omp: max_iter must be >= 1");
  if (!(eps_stop > 0.0)) throw ParameterError("run_omp: eps_stop must be positive");
  cfg.validate();
  OMPTrace trace;
  const std::size_t k = signal.size();
  if (k == 0) return trace;
  if (signal.support().dim() != kernel.dim()) throw ParameterError("run_omp: signal/kernel dimension mismatch");

  const auto& truth = signal.support();
  Eigen::VectorXd c(static_cast<Eigen::Index>(k));
  for (std::size_t l = 0; l < k; ++l) c(static_cast<Eigen::Index>(l)) = signal.coefficients()[l];

  try {
    const GramMatrix g_true(kernel, truth);
    trace.signal_norm = std::sqrt(residual_norm_sq(g_true, c));
  } catch (const DegenerateSupportError& e) {
    trace.terminated = Termination::Degenerate;
    trace.detail = e.what();
    return trace;
  }

  std::vector<Point> anchors = truth.points();
  std::vector<std::size_t> selected;  // anchor indices in selection order
  Eigen::VectorXd chat;

  auto residual_weights = [&] {
    std::vector<double> w(anchors.size(), 0.0);
    for (std::size_t l = 0; l < k; ++l) w[l] = c(static_cast<Eigen::Index>(l));
    for (std::size_t j = 0; j < selected.size(); ++j) w[selected[j]] -= chat(static_cast<Eigen::Index>(j));
    return w;
  };

  for (std::size_t t = 0; t < max_iter; ++t) {
    CorrelationFunction f(kernel, anchors, residual_weights());
    ArgmaxResult best;
    try {
      best = global_argmax(f, cfg);
    } catch (const EmptyResidualError& e) {
      trace.terminated = Termination::ResidualZero;
      trace.detail = e.what();
      return trace;
    }
    IterationRecord rec;
    rec.tie_set = best.maximizers;
    rec.selection_value = best.value;

    // Reuse the coordinates of an existing anchor when the selection lands on it.
    std::size_t idx = anchors.size();
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      if (same_point(anchors[a], best.canonical())) {
        idx = a;
        break;
      }
    }
    if (idx == anchors.size()) anchors.push_back(best.canonical());
    for (std::size_t s : selected) {
      if (s == idx) {
        trace.terminated = Termination::Degenerate;
        trace.detail = "selection repeated an already selected parameter";
        return trace;
      }
    }
    selected.push_back(idx);
    rec.selected = anchors[idx];

    try {
      std::vector<Point> sel_pts;
      for (std::size_t s : selected) sel_pts.push_back(anchors[s]);
      const GramMatrix g_sel(kernel, Support(sel_pts));
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(selected.size()));
      for (std::size_t j = 0; j < selected.size(); ++j) {
        double v = 0.0;
        for (std::size_t l = 0; l < k; ++l) v += kernel.eval(sel_pts[j], truth[l]) * c(static_cast<Eigen::Index>(l));
        rhs(static_cast<Eigen::Index>(j)) = v;
      }
      chat = g_sel.solve(rhs);

      const auto w = residual_weights();
      const GramMatrix g_all(kernel, Support(anchors));
      const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
      rec.residual_norm = std::sqrt(residual_norm_sq(g_all, wv));
      const Eigen::VectorXd corr = g_all.entries() * wv;
      for (std::size_t s : selected) {
        rec.max_selected_correlation = std::max(rec.max_selected_correlation, std::abs(corr(static_cast<Eigen::Index>(s))));
      }
    } catch (const DegenerateSupportError& e) {
      trace.terminated = Termination::Degenerate;
      trace.detail = e.what();
      return trace;
    }
    rec.ls_coefficients.assign(chat.data(), chat.data() + chat.size());
    trace.iterations.push_back(std::move(rec));
    if (trace.iterations.back().residual_norm <= eps_stop * trace.signal_norm) {
      trace.terminated = Termination::ResidualZero;
      return trace;
    }
  }
  trace.terminated = Termination::MaxIterations;
  return trace;
}

enum class VerdictKind { ExactKStep, DelayedWithinGrid, SpuriousSelection, BudgetExhausted };

inline const char* to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::ExactKStep: return "ExactKStep";
    case VerdictKind::DelayedWithinGrid: return "DelayedWithinGrid";
    case VerdictKind::SpuriousSelection: return "SpuriousSelection";
    case VerdictKind::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

struct Verdict {
  VerdictKind kind = VerdictKind::ExactKStep;
  // For each true parameter, the iteration whose selection matched it.
  std::vector<std::optional<std::size_t>> matched;
  // Largest distance from a selected point to the grid spanned by the support.
  double max_grid_distance = 0.0;
  std::string details;
};

inline Verdict classify(const OMPTrace& trace, const SparseSignal& signal, double tau_match = kDefaultTauMatch) {
  Verdict v;
  const auto& truth = signal.support();
  const std::size_t k = truth.size();
  v.matched.assign(k, std::nullopt);
  const auto sel = trace.selected();
  if (k == 0) {
    v.kind = sel.empty() ? VerdictKind::ExactKStep : VerdictKind::SpuriousSelection;
    return v;
  }
  std::vector<bool> sel_matched(sel.size(), false);
  for (std::size_t l = 0; l < k; ++l) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < sel.size(); ++j) {
      const double dist = max_abs_diff(truth[l], sel[j]);
      if (dist <= tau_match && dist < best) {
        best = dist;
        v.matched[l] = j;
      }
    }
    if (v.matched[l]) sel_matched[*v.matched[l]] = true;
  }
  const CartesianGrid grid = set_aug(truth);
  std::size_t off_grid = 0;
  for (const auto& p : sel) {
    const double d = grid.distance_to_grid(p);
    v.max_grid_distance = std::max(v.max_grid_distance, d);
    if (d > tau_match) ++off_grid;
  }
  bool covered = true;
  for (const auto& m : v.matched) covered = covered && m.has_value();
  bool all_sel_matched = true;
  for (bool b : sel_matched) all_sel_matched = all_sel_matched && b;

  if (covered && all_sel_matched && sel.size() == k) {
    v.kind = VerdictKind::ExactKStep;
  } else if (off_grid == 0 && covered) {
    v.kind = VerdictKind::DelayedWithinGrid;
    v.details = std::to_string(sel.size() - k) + " extra grid selection(s)";
  } else if (off_grid > 0) {
    v.kind = VerdictKind::SpuriousSelection;
    v.details = std::to_string(off_grid) + " selection(s) off the support grid";
  } else {
    v.kind = VerdictKind::BudgetExhausted;
    v.details = "support not covered after " + std::to_string(sel.size()) + " iteration(s)";
  }
  return v;
}

struct ReconstructionEntry {
  Point selected;
  double estimate = 0.0;
  std::optional<std::size_t> true_index;
  // c_l for a matched point, 0 otherwise.
  double expected = 0.0;
  bool ok = false;
};

struct ReconstructionReport {
  std::vector<ReconstructionEntry> entries;
  bool all_ok = true;
};

// Coefficients of a zero-residual trace: matched selections must carry the true
// coefficient and grid-only selections must carry zero, both within 1e-8.
inline ReconstructionReport recovered_signal(const OMPTrace& trace, const SparseSignal& signal,
                                             double tau_match = kDefaultTauMatch) {
  if (trace.terminated != Termination::ResidualZero) {
    throw NotApplicableError("recovered_signal: trace did not reach zero residual");
  }
  constexpr double kCoefTol = 1e-8;
  ReconstructionReport rep;
  if (trace.iterations.empty()) return rep;
  const auto& coeffs = trace.iterations.back().ls_coefficients;
  const auto& truth = signal.support();
  for (std::size_t j = 0; j < trace.iterations.size(); ++j) {
    ReconstructionEntry e;
    e.selected = trace.iterations[j].selected;
    e.estimate = coeffs[j];
    for (std::size_t l = 0; l < truth.size(); ++l) {
      if (max_abs_diff(truth[l], e.selected) <= tau_match) {
        e.true_index = l;
        e.expected = signal.coefficients()[l];
        break;
      }
    }
    e.ok = std::abs(e.estimate - e.expected) <= kCoefTol;
    rep.all_ok = rep.all_ok && e.ok;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

}  // namespace cmfomp
