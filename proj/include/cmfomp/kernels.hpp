#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cmfomp/errors.hpp"
#include "cmfomp/param_space.hpp"
#include "cmfomp/rng.hpp"

namespace cmfomp {

// A completely monotone function with phi(0) = 1, given in closed form together
// with its first two derivatives and its inverse on (0,1].
class CmfSpec {
 public:
  enum class Family { Laplace, InverseLinear, Custom };

  struct CustomFunctions {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
    std::function<double(double)> inverse;
  };

  // phi(x) = exp(-lambda x)
  static CmfSpec laplace(double lambda) { return CmfSpec(Family::Laplace, lambda, nullptr); }

  // phi(x) = 1 / (1 + lambda x)
  static CmfSpec inverse_linear(double lambda) { return CmfSpec(Family::InverseLinear, lambda, nullptr); }

  static CmfSpec custom(CustomFunctions fns) {
    if (!fns.value || !fns.d1 || !fns.d2 || !fns.inverse) {
      throw ParameterError("CmfSpec: custom family needs value, d1, d2 and inverse");
    }
    return CmfSpec(Family::Custom, 0.0, std::make_shared<const CustomFunctions>(std::move(fns)));
  }

  Family family() const { return family_; }
  double lambda() const { return lambda_; }

  std::string name() const {
    switch (family_) {
      case Family::Laplace: return "laplace";
      case Family::InverseLinear: return "inverse_linear";
      case Family::Custom: return custom_->name;
    }
    return {};
  }

  double value(double x) const {
    switch (family_) {
      case Family::Laplace: return std::exp(-lambda_ * x);
      case Family::InverseLinear: return 1.0 / (1.0 + lambda_ * x);
      case Family::Custom: return custom_->value(x);
    }
    return 0.0;
  }

  double d1(double x) const {
    switch (family_) {
      case Family::Laplace: return -lambda_ * std::exp(-lambda_ * x);
      case Family::InverseLinear: {
        const double u = 1.0 + lambda_ * x;
        return -lambda_ / (u * u);
      }
      case Family::Custom: return custom_->d1(x);
    }
    return 0.0;
  }

  double d2(double x) const {
    switch (family_) {
      case Family::Laplace: return lambda_ * lambda_ * std::exp(-lambda_ * x);
      case Family::InverseLinear: {
        const double u = 1.0 + lambda_ * x;
        return 2.0 * lambda_ * lambda_ / (u * u * u);
      }
      case Family::Custom: return custom_->d2(x);
    }
    return 0.0;
  }

  // The x >= 0 with phi(x) = y, for y in (0,1].
  double inverse(double y) const {
    if (!(y > 0.0 && y <= 1.0)) throw ParameterError("CmfSpec::inverse: level must lie in (0,1]");
    switch (family_) {
      case Family::Laplace: return -std::log(y) / lambda_;
      case Family::InverseLinear: return (1.0 / y - 1.0) / lambda_;
      case Family::Custom: return custom_->inverse(y);
    }
    return 0.0;
  }

 private:
  CmfSpec(Family f, double lambda, std::shared_ptr<const CustomFunctions> custom)
      : family_(f), lambda_(lambda), custom_(std::move(custom)) {
    if (f != Family::Custom && !(lambda > 0.0 && std::isfinite(lambda))) {
      throw ParameterError("CmfSpec: lambda must be positive and finite");
    }
  }

  Family family_;
  double lambda_;
  std::shared_ptr<const CustomFunctions> custom_;
};

inline double cmf_eval(const CmfSpec& spec, double x) {
  if (!(x >= 0.0)) throw ParameterError("cmf_eval: x must be nonnegative");
  if (x == 0.0) return 1.0;
  return spec.value(x);
}

// kappa(a, b) = outer(sum_d |a_d - b_d|^q). The CMF variant uses outer = phi and
// q = p in (0,1]. The Gaussian control uses outer(s) = exp(-s/4) with q = 2 and is
// not a CMF kernel.
class KernelSpec {
 public:
  static KernelSpec cmf(CmfSpec phi, double p, std::size_t dim) {
    if (!(p > 0.0 && p <= 1.0)) throw ParameterError("KernelSpec: p must lie in (0,1]");
    if (dim == 0) throw ParameterError("KernelSpec: dimension must be >= 1");
    return KernelSpec(std::move(phi), p, dim, false);
  }

  static KernelSpec gaussian() { return KernelSpec(CmfSpec::laplace(0.25), 2.0, 1, true); }

  bool is_cmf() const { return !gaussian_; }
  bool is_gaussian() const { return gaussian_; }
  std::size_t dim() const { return dim_; }
  double exponent() const { return q_; }
  // Only meaningful for the CMF variant.
  const CmfSpec& phi() const { return phi_; }

  std::string describe() const {
    if (gaussian_) return "gaussian";
    return phi_.name() + "(lambda=" + std::to_string(phi_.lambda()) + ", p=" + std::to_string(q_) +
           ", D=" + std::to_string(dim_) + ")";
  }

  // |t|^q for one coordinate difference.
  double coord_term(double diff) const {
    const double a = std::abs(diff);
    if (q_ == 1.0) return a;
    if (q_ == 2.0) return a * a;
    return std::pow(a, q_);
  }

  // Radial profile applied to the summed coordinate terms.
  double outer(double s) const {
    if (s == 0.0) return 1.0;
    return phi_.value(s);
  }

  double eval(const Point& a, const Point& b) const {
    if (a.dim() != dim_ || b.dim() != dim_) throw ParameterError("kernel_eval: dimension mismatch");
    return eval_unchecked(a.coords(), b.coords());
  }

  double eval_unchecked(std::span<const double> a, std::span<const double> b) const {
    double s = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) s += coord_term(a[d] - b[d]);
    return outer(s);
  }

  // Per-coordinate distance R with outer(R^q) = eps; any point whose gap to an
  // anchor exceeds R in some coordinate has kernel value below eps.
  double radius_for(double eps) const {
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("radius_for: eps must lie in (0,1)");
    return std::pow(phi_.inverse(eps), 1.0 / q_);
  }

 private:
  KernelSpec(CmfSpec phi, double q, std::size_t dim, bool gaussian)
      : phi_(std::move(phi)), q_(q), dim_(dim), gaussian_(gaussian) {}

  CmfSpec phi_;
  double q_;
  std::size_t dim_;
  bool gaussian_;
};

inline double kernel_eval(const KernelSpec& k, const Point& a, const Point& b) { return k.eval(a, b); }

struct AdmissibilityReport {
  bool pass = true;
  std::size_t samples = 0;
  std::vector<std::string> violations;
};

// Sampled check of the kernel axioms: unit norm, symmetry, positivity, strict
// bound below 1 off the diagonal, and vanishing at infinity.
inline AdmissibilityReport check_admissible(const KernelSpec& k, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw ParameterError("check_admissible: n_samples must be >= 1");
  AdmissibilityReport rep;
  rep.samples = n_samples;
  Rng rng(seed);
  auto flag = [&](const std::string& what) {
    rep.pass = false;
    for (const auto& v : rep.violations) {
      if (v == what) return;
    }
    rep.violations.push_back(what);
  };
  constexpr double kVanishEps = 1e-12;
  const double far = 2.0 * k.radius_for(kVanishEps);
  auto random_point = [&] {
    std::vector<double> c(k.dim());
    for (auto& x : c) x = rng.uniform(-5.0, 5.0);
    return Point(std::move(c));
  };
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point a = random_point();
    Point b = random_point();
    if (i % 2 == 1) {
      // Nearby pair to probe the strict bound close to the diagonal.
      std::vector<double> c(a.coords().begin(), a.coords().end());
      const double scale = std::pow(10.0, -rng.uniform(1.0, 6.0));
      for (auto& x : c) x += scale * rng.normal();
      b = Point(std::move(c));
    }
    const double kaa = k.eval(a, a);
    const double kab = k.eval(a, b);
    const double kba = k.eval(b, a);
    if (kaa != 1.0) flag("unit-norm");
    if (kab != kba) flag("symmetry");
    if (!(kab >= 0.0)) flag("positivity");
    if (!same_point(a, b) && !(kab < 1.0)) flag("strict-bound");
    if (!std::isfinite(kab)) flag("finite");
    const Point shifted = a.with_coord(0, a[0] + far);
    if (!(k.eval(a, shifted) < kVanishEps)) flag("vanishing");
  }
  return rep;
}

}  // namespace cmfomp
