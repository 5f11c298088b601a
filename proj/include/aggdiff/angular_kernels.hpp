#pragma once

// Angular integrals int_{-pi}^{pi} g(theta) dtheta arising from radial
// convolutions, with a graded substitution near theta = 0 when r ~ s.

#include <cmath>
#include <numbers>

#include "aggdiff/errors.hpp"
#include "aggdiff/potentials.hpp"
#include "aggdiff/quadrature.hpp"

namespace aggdiff {

struct AngularQuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_refinement_depth = 30;
  double near_singularity_split = 0.5;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ArgumentError("quadrature tolerances must be positive");
    if (max_refinement_depth < 1) throw ArgumentError("quadrature depth must be >= 1");
    if (!(near_singularity_split > 0.0)) throw ArgumentError("near_singularity_split must be positive");
  }

  QuadOptions options(double share = 1.0) const {
    QuadOptions o;
    o.abs_tol = abs_tol * share;
    o.rel_tol = rel_tol;
    o.max_depth = max_refinement_depth;
    return o;
  }
};

struct KernelValue {
  double value = 0.0;
  double error_estimate = 0.0;
};

// 2 sin^2(theta/2) = 1 - cos(theta), without cancellation near 0
inline double one_minus_cos(double theta) {
  const double h = std::sin(0.5 * theta);
  return 2.0 * h * h;
}

inline double d_theta(double r, double s, double theta) {
  const double diff = r - s;
  return std::sqrt(diff * diff + 2.0 * r * s * one_minus_cos(theta));
}

// Full-period integral of an even integrand g. When |r-s|/max(r,s) < 0.1 the
// window [0, split] is mapped through theta = w sinh(u), w = |r-s|/sqrt(rs),
// which flattens the peak of width ~w at theta = 0.
template <class G>
KernelValue angular_integral(G&& g, double r, double s, const AngularQuadratureConfig& cfg) {
  constexpr double pi = std::numbers::pi;
  const double big = std::max(r, s);
  const double closeness = std::abs(r - s) / big;
  QuadResult inner{}, outer{};
  if (closeness < 0.1) {
    double w = std::abs(r - s) / std::sqrt(r * s);
    // the map is exact for any w > 0; coincident radii just get fine grading
    if (w < 1e-9) w = 1e-9;
    const double split = std::min(cfg.near_singularity_split, pi);
    const double umax = std::asinh(split / w);
    auto mapped = [&](double u) { return g(w * std::sinh(u)) * w * std::cosh(u); };
    inner = integrate(mapped, 0.0, umax, cfg.options(0.25));
    if (split < pi) outer = integrate(g, split, pi, cfg.options(0.25));
  } else {
    outer = integrate(g, 0.0, pi, cfg.options(0.5));
  }
  return {2.0 * (inner.value + outer.value), 2.0 * (inner.error + outer.error)};
}

namespace detail {

// (1/2pi) int (1 - e cos)/(1 - 2e cos + e^2); equals 1 for |e| < 1, 0 for |e| > 1
inline KernelValue poisson_mean(double e, const AngularQuadratureConfig& cfg) {
  e = std::abs(e);
  if (e == 0.0) return {1.0, 0.0};
  const double d2 = (1.0 - e) * (1.0 - e);
  auto g = [&](double th) {
    const double omc = one_minus_cos(th);
    return ((1.0 - e) + e * omc) / (d2 + 2.0 * e * omc);
  };
  KernelValue k = angular_integral(g, 1.0, e, cfg);
  const double inv = 1.0 / (2.0 * std::numbers::pi);
  return {k.value * inv, k.error_estimate * inv};
}

}  // namespace detail

inline KernelValue eta(double eps, const AngularQuadratureConfig& cfg = {}) {
  if (!(std::abs(eps) < 1.0)) throw DomainError("eta: requires |eps| < 1");
  return detail::poisson_mean(eps, cfg);
}

namespace detail {
inline void check_fz_args(double beta, double z) {
  if (!(beta > 1.0 && beta <= 2.0)) throw DomainError("f_z: beta must lie in (1, 2]");
  if (!(z > 1.0)) throw DomainError("f_z: z must exceed 1");
}
// the pair (r, s) = (z + sqrt(z^2-1), 1) has (r/s + s/r)/2 = z
inline double z_ratio(double z) { return z + std::sqrt((z - 1.0) * (z + 1.0)); }
}  // namespace detail

namespace detail {
// no range check on beta; the threshold scan needs beta > 2 as well
inline KernelValue f_z_unchecked(double beta, double z, const AngularQuadratureConfig& cfg) {
  auto g = [&](double th) {
    const double omc = one_minus_cos(th);
    return std::pow((z - 1.0) + omc, -beta) * ((1.0 - z) + z * omc);
  };
  return angular_integral(g, z_ratio(z), 1.0, cfg);
}
}  // namespace detail

// int (z - cos)^-beta (1 - z cos) dtheta
inline KernelValue f_z(double beta, double z, const AngularQuadratureConfig& cfg = {}) {
  detail::check_fz_args(beta, z);
  return detail::f_z_unchecked(beta, z, cfg);
}

// (2 - beta) int (z - cos)^-beta sin^2 dtheta, the same quantity after an
// integration by parts
inline KernelValue f_z_sin(double beta, double z, const AngularQuadratureConfig& cfg = {}) {
  detail::check_fz_args(beta, z);
  if (beta == 2.0) return {0.0, 0.0};
  auto g = [&](double th) {
    const double sn = std::sin(th);
    return std::pow((z - 1.0) + one_minus_cos(th), -beta) * sn * sn;
  };
  KernelValue k = angular_integral(g, detail::z_ratio(z), 1.0, cfg);
  return {(2.0 - beta) * k.value, (2.0 - beta) * k.error_estimate};
}

// int (z - cos)^-beta dtheta
inline KernelValue power_mean_integral(double beta, double z, const AngularQuadratureConfig& cfg = {}) {
  if (!(z > 1.0)) throw DomainError("power_mean_integral: z must exceed 1");
  auto g = [&](double th) { return std::pow((z - 1.0) + one_minus_cos(th), -beta); };
  return angular_integral(g, detail::z_ratio(z), 1.0, cfg);
}

inline void require_radii(double r, double s, const char* what) {
  if (!(r > 0.0) || !(s > 0.0)) throw DomainError(std::string(what) + ": radii must be positive");
}

// K(r,s) = int W'(d)(r - s cos)/d dtheta
inline KernelValue radial_force_kernel(const InteractionPotential& p, double r, double s,
                                       const AngularQuadratureConfig& cfg = {}) {
  require_radii(r, s, "radial_force_kernel");
  const double diff = r - s;
  auto g = [&](double th) {
    const double omc = one_minus_cos(th);
    const double d = std::sqrt(diff * diff + 2.0 * r * s * omc);
    return p.w1(d) * (diff + s * omc) / d;
  };
  return angular_integral(g, r, s, cfg);
}

// radial force at r from the uniform measure on the circle of radius s
inline KernelValue circle_force(const InteractionPotential& p, double r, double s,
                                const AngularQuadratureConfig& cfg = {}) {
  KernelValue k = radial_force_kernel(p, r, s, cfg);
  return {s * k.value, s * k.error_estimate};
}

inline KernelValue disk_force(const InteractionPotential& p, double r, double R,
                              const AngularQuadratureConfig& cfg = {}) {
  require_radii(r, R, "disk_force");
  double inner_err = 0.0;
  auto f = [&](double s) {
    if (s <= 0.0) return 0.0;
    KernelValue k = radial_force_kernel(p, r, s, cfg);
    inner_err = std::max(inner_err, s * k.error_estimate);
    return s * k.value;
  };
  std::vector<double> pts{0.0};
  if (r < R) pts.push_back(r);
  pts.push_back(R);
  QuadResult q = integrate_pieces(f, pts, cfg.options());
  return {q.value, q.error + R * inner_err};
}

inline double log_circle_mean(double r, double s) {
  require_radii(r, s, "log_circle_mean");
  return std::log(std::max(r, s));
}

// (1/2pi) int W(d) dtheta
inline KernelValue interaction_kernel_mean(const InteractionPotential& p, double r, double s,
                                           const AngularQuadratureConfig& cfg = {}) {
  require_radii(r, s, "interaction_kernel_mean");
  const double diff = r - s;
  auto g = [&](double th) { return p.w(std::sqrt(diff * diff + 2.0 * r * s * one_minus_cos(th))); };
  KernelValue k = angular_integral(g, r, s, cfg);
  const double inv = 1.0 / (2.0 * std::numbers::pi);
  return {k.value * inv, k.error_estimate * inv};
}

}  // namespace aggdiff
