#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "cmfomp/errors.hpp"
#include "cmfomp/kernels.hpp"
#include "cmfomp/param_space.hpp"

namespace cmfomp {

// Cholesky pivots (squared diagonal of the factor) below this mark the support
// as numerically degenerate.
inline constexpr double kPivotFloor = 1e-12;

// Symmetric Gram matrix G[i,j] = kappa(theta_i, theta_j) with an eager Cholesky factor.
class GramMatrix {
 public:
  GramMatrix(const KernelSpec& kernel, Support params) : params_(std::move(params)) {
    if (params_.empty()) throw ParameterError("build_gram: empty support");
    if (params_.dim() != kernel.dim()) throw ParameterError("build_gram: dimension mismatch");
    const auto n = static_cast<Eigen::Index>(params_.size());
    entries_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      entries_(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = kernel.eval(params_[i], params_[j]);
        entries_(i, j) = v;
        entries_(j, i) = v;
      }
    }
    factor();
  }

  std::size_t size() const { return params_.size(); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  const Support& params() const { return params_; }
  double min_pivot() const { return min_pivot_; }

  // G^{-1} rhs with one step of iterative refinement.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    if (rhs.size() != entries_.rows()) throw ParameterError("solve_gram: dimension mismatch");
    Eigen::VectorXd x = llt_.solve(rhs);
    const Eigen::VectorXd r = rhs - entries_ * x;
    x += llt_.solve(r);
    const double rn = rhs.norm();
    if (rn > 0.0) {
      const double rel = (entries_ * x - rhs).norm() / rn;
      if (!(rel <= 1e-10)) {
        throw DegenerateSupportError("solve_gram: relative residual " + std::to_string(rel) +
                                     " exceeds 1e-10");
      }
    }
    return x;
  }

 private:
  void factor() {
    llt_.compute(entries_);
    if (llt_.info() != Eigen::Success) {
      throw DegenerateSupportError("build_gram: Cholesky factorization failed");
    }
    const Eigen::MatrixXd l = llt_.matrixL();
    min_pivot_ = 1.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      const double pivot = l(i, i) * l(i, i);
      min_pivot_ = std::min(min_pivot_, pivot);
    }
    if (!(min_pivot_ >= kPivotFloor)) {
      throw DegenerateSupportError("build_gram: pivot " + std::to_string(min_pivot_) +
                                   " below near-singularity floor");
    }
  }

  Support params_;
  Eigen::MatrixXd entries_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double min_pivot_ = 0.0;
};

inline GramMatrix build_gram(const KernelSpec& kernel, const Support& s) { return GramMatrix(kernel, s); }

// g_theta[l] = kappa(theta, theta_l).
inline Eigen::VectorXd correlation_vector(const KernelSpec& kernel, std::span<const Point> params,
                                          const Point& probe) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) g(static_cast<Eigen::Index>(i)) = kernel.eval(probe, params[i]);
  return g;
}

inline Eigen::VectorXd correlation_vector(const KernelSpec& kernel, const Support& s, const Point& probe) {
  return correlation_vector(kernel, std::span<const Point>(s.points()), probe);
}

inline Eigen::VectorXd solve_gram(const GramMatrix& g, const Eigen::VectorXd& rhs) { return g.solve(rhs); }

// ||G^{-1} g_theta||_1
inline double erc_ratio(const GramMatrix& g, const Eigen::VectorXd& g_theta) {
  if (g_theta.size() != static_cast<Eigen::Index>(g.size())) throw ParameterError("erc_ratio: dimension mismatch");
  return g.solve(g_theta).lpNorm<1>();
}

// w^T G w, the squared norm of sum_l w_l a(theta_l). Rounding can push the form
// slightly below zero; values within 1e-12 ||w||_1^2 of zero are clamped.
inline double residual_norm_sq(const GramMatrix& g, const Eigen::VectorXd& w) {
  if (w.size() != static_cast<Eigen::Index>(g.size())) throw ParameterError("residual_norm_sq: dimension mismatch");
  const double v = w.dot(g.entries() * w);
  if (v >= 0.0) return v;
  const double l1 = w.lpNorm<1>();
  if (-v <= 1e-12 * l1 * l1) return 0.0;
  throw NumericError("residual_norm_sq: negative quadratic form " + std::to_string(v));
}

}  // namespace cmfomp
