#pragma once

// Linear operators mapping cell values of a piecewise-constant radial density
// to its interaction potential Psi = W * rho and radial force Psi' evaluated at
// a fixed set of radii.

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "aggdiff/angular_kernels.hpp"
#include "aggdiff/density.hpp"
#include "aggdiff/parallel.hpp"

namespace aggdiff {

struct CellRule {
  // adaptive Gauss-Kronrod per cell, or fixed Gauss-Legendre with n points
  bool adaptive = true;
  int gauss_points = 2;
  // fixed rule only: cells within this many widths of the evaluation radius
  // are cut into 4 sub-cells
  double refine_band = 1.0;
};

namespace detail {

inline void gauss_rule(int n, std::vector<double>& x, std::vector<double>& w) {
  auto fill = [&](const auto& ab, const auto& wt, bool odd) {
    x.clear();
    w.clear();
    for (std::size_t k = ab.size(); k-- > 0;) {
      if (odd && k == 0) continue;
      x.push_back(-ab[k]);
      w.push_back(wt[k]);
    }
    if (odd) {
      x.push_back(0.0);
      w.push_back(wt[0]);
    }
    for (std::size_t k = odd ? 1 : 0; k < ab.size(); ++k) {
      x.push_back(ab[k]);
      w.push_back(wt[k]);
    }
  };
  using boost::math::quadrature::gauss;
  switch (n) {
    case 1: x = {0.0}; w = {2.0}; break;
    case 2: fill(gauss<double, 2>::abscissa(), gauss<double, 2>::weights(), false); break;
    case 3: fill(gauss<double, 3>::abscissa(), gauss<double, 3>::weights(), true); break;
    case 4: fill(gauss<double, 4>::abscissa(), gauss<double, 4>::weights(), false); break;
    case 5: fill(gauss<double, 5>::abscissa(), gauss<double, 5>::weights(), true); break;
    case 8: fill(gauss<double, 8>::abscissa(), gauss<double, 8>::weights(), false); break;
    default: throw ArgumentError("gauss_rule: supported point counts are 1-5 and 8");
  }
}

// int_lo^hi f over one cell with the chosen rule; x0 is a kink location
template <class F>
double cell_integral(F&& f, double lo, double hi, double x0, const CellRule& rule,
                     const AngularQuadratureConfig& cfg, const std::vector<double>& gx,
                     const std::vector<double>& gw) {
  if (rule.adaptive) {
    std::vector<double> pts{lo};
    if (x0 > lo && x0 < hi) pts.push_back(x0);
    pts.push_back(hi);
    QuadOptions o = cfg.options();
    return integrate_pieces(f, pts, o).value;
  }
  auto fixed = [&](double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t k = 0; k < gx.size(); ++k) s += gw[k] * f(c + h * gx[k]);
    return s * h;
  };
  const double width = hi - lo;
  const double dist = (x0 < lo) ? lo - x0 : (x0 > hi ? x0 - hi : 0.0);
  std::vector<double> pts{lo};
  if (x0 > lo && x0 < hi) pts.push_back(x0);
  pts.push_back(hi);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    if (dist <= rule.refine_band * width) {
      constexpr int sub = 4;
      const double a = pts[k], b = pts[k + 1];
      for (int q = 0; q < sub; ++q) total += fixed(a + (b - a) * q / sub, a + (b - a) * (q + 1) / sub);
    } else {
      total += fixed(pts[k], pts[k + 1]);
    }
  }
  return total;
}

}  // namespace detail

class RadialFieldOperator {
public:
  RadialFieldOperator(const RadialGrid& grid, const InteractionPotential& p, std::vector<double> radii,
                      bool want_potential, bool want_force, CellRule rule = {},
                      const AngularQuadratureConfig& cfg = {}, int threads = 1)
      : grid_(grid), radii_(std::move(radii)), n_(grid.size()) {
    std::vector<double> gx, gw;
    if (!rule.adaptive) detail::gauss_rule(rule.gauss_points, gx, gw);
    const auto& e = grid_.edges();
    if (want_potential) pot_.assign(radii_.size() * n_, 0.0);
    if (want_force) force_.assign(radii_.size() * n_, 0.0);
    parallel_for(radii_.size(), threads, [&](std::size_t k) {
      const double x = radii_[k];
      for (std::size_t j = 0; j < n_; ++j) {
        if (want_potential) {
          // Psi(x) = int 2 pi s Phi_W(x, s) rho(s) ds
          auto f = [&](double s) {
            if (s <= 0.0) return 0.0;
            const double mean = x > 0.0 ? interaction_kernel_mean(p, x, s, cfg).value : p.w(s);
            return 2.0 * std::numbers::pi * s * mean;
          };
          pot_[k * n_ + j] = detail::cell_integral(f, e[j], e[j + 1], x, rule, cfg, gx, gw);
        }
        if (want_force && x > 0.0) {
          // Psi'(x) = int s K(x, s) rho(s) ds
          auto f = [&](double s) {
            if (s <= 0.0) return 0.0;
            return s * radial_force_kernel(p, x, s, cfg).value;
          };
          force_[k * n_ + j] = detail::cell_integral(f, e[j], e[j + 1], x, rule, cfg, gx, gw);
        }
      }
    });
  }

  const std::vector<double>& radii() const { return radii_; }
  const RadialGrid& grid() const { return grid_; }
  bool has_potential() const { return !pot_.empty(); }
  bool has_force() const { return !force_.empty(); }

  std::vector<double> potential(const std::vector<double>& values) const { return apply(pot_, values); }
  // Psi'(x); the velocity field is u_r = -Psi'
  std::vector<double> force(const std::vector<double>& values) const { return apply(force_, values); }

  double potential_at(std::size_t k, const std::vector<double>& values) const { return row(pot_, k, values); }
  double force_at(std::size_t k, const std::vector<double>& values) const { return row(force_, k, values); }

private:
  double row(const std::vector<double>& m, std::size_t k, const std::vector<double>& v) const {
    if (m.empty()) throw ArgumentError("RadialFieldOperator: operator not built");
    const double* r = &m[k * n_];
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += r[j] * v[j];
    return acc;
  }
  std::vector<double> apply(const std::vector<double>& m, const std::vector<double>& v) const {
    std::vector<double> out(radii_.size());
    for (std::size_t k = 0; k < radii_.size(); ++k) out[k] = row(m, k, v);
    return out;
  }

  RadialGrid grid_;
  std::vector<double> radii_;
  std::size_t n_;
  std::vector<double> pot_, force_;
};

}  // namespace aggdiff
