#pragma once

// Energy-decreasing transport curves: two continuous Steiner symmetrizations
// (CSS1, CSS2) and the local clustering compression, with their first
// variations at t = 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "aggdiff/fields.hpp"

namespace aggdiff {

// ---------------------------------------------------------------------------
// slice derivatives

namespace detail {

// -int_{|c-z|}^{c+z} W'(d) a / d da, d = sqrt(a^2 + D^2); for c < z the
// part of the slice symmetric about c cancels
inline double slice_integral(const InteractionPotential& p, double z, double c, double D, const QuadOptions& o) {
  const double lo = std::abs(c - z), hi = c + z;
  if (lo == 0.0 && D == 0.0) throw DomainError("point_slice_derivative: c = z with zero offset is singular");
  auto f = [&](double a) {
    const double d = std::hypot(a, D);
    return p.w1(d) * a / d;
  };
  if (lo > 0.0) {
    // a = e^u spreads the near-singular end when lo << hi
    auto g = [&](double u) {
      const double a = std::exp(u);
      return f(a) * a;
    };
    return -integrate(g, std::log(lo), std::log(hi), o).value;
  }
  std::vector<double> pts{0.0};
  if (D < hi) pts.push_back(D);
  pts.push_back(hi);
  return -integrate_pieces(f, pts, o).value;
}

}  // namespace detail

// d/dt at 0 of the interaction between the slice [-z, z] and a unit point
// mass at (c - t, D): int_{-z}^{z} d_1 W((x1 - c, D)) dx1
inline double point_slice_derivative(const InteractionPotential& p, double z, double c, double D,
                                     const AngularQuadratureConfig& cfg = {}) {
  if (!(z > 0.0)) throw ArgumentError("point_slice_derivative: z must be positive");
  if (!(c > 0.0)) throw ArgumentError("point_slice_derivative: c must be positive");
  if (!(D >= 0.0)) throw ArgumentError("point_slice_derivative: offset must be nonnegative");
  return detail::slice_integral(p, z, c, D, cfg.options());
}

// the same with the point replaced by the segment [c - z', c + z']
inline double interval_slice_derivative(const InteractionPotential& p, double z, double zp, double c, double D,
                                        const AngularQuadratureConfig& cfg = {}) {
  if (!(z > 0.0) || !(zp > 0.0)) throw ArgumentError("interval_slice_derivative: z and z' must be positive");
  if (!(c > 0.0)) throw ArgumentError("interval_slice_derivative: c must be positive");
  if (!(D >= 0.0)) throw ArgumentError("interval_slice_derivative: offset must be nonnegative");
  // odd in c1, so [c - z', z' - c] cancels when z' > c
  const double lo = std::abs(c - zp), hi = c + zp;
  QuadOptions inner = cfg.options();
  inner.rel_tol = std::min(inner.rel_tol, 1e-11);
  inner.abs_tol = std::min(inner.abs_tol, 1e-13);
  auto f = [&](double c1) {
    if (D == 0.0 && c1 == z) return 0.0;  // measure zero, singular
    return detail::slice_integral(p, z, c1, D, inner);
  };
  std::vector<double> pts{lo};
  if (z > lo && z < hi) pts.push_back(z);
  pts.push_back(hi);
  QuadOptions outer = cfg.options();
  if (lo == 0.0) outer.max_depth = std::max(outer.max_depth, 60);
  return integrate_pieces(f, pts, outer).value;
}

// ---------------------------------------------------------------------------
// reports

enum class CurveKind { CSS1, CSS2, LocalClustering };

inline std::string curve_name(CurveKind k) {
  switch (k) {
    case CurveKind::CSS1: return "CSS1";
    case CurveKind::CSS2: return "CSS2";
    case CurveKind::LocalClustering: return "LocalClustering";
  }
  return "?";
}

struct CurveReport {
  CurveKind kind = CurveKind::CSS1;
  double dI_dt = 0.0;
  double dS_dt = 0.0;
  double dE_dt = 0.0;
  double cost_bound = 0.0;   // int |v|^2 rho
  double moving_mass = 0.0;  // mass carried by the velocity field
  double numerical_error = 0.0;
  // local clustering only: the nonpositive term a delta in div v at 8 R1
  // would add; not part of dS_dt (the flow opens a vacuum gap there)
  double boundary_delta = 0.0;
  std::map<std::string, double> params;
};

// mass-per-height of the moving slices |x2| <= a of the annulus r <= |x| <= R,
// on both sides of the x2 axis: 2 (G(R, a) - G(r, a)), G(R, a) = int_{-a}^{a} sqrt(R^2 - x^2) dx
inline double strip_area(double r, double R, double a) {
  auto G = [](double RR, double aa) {
    if (RR <= 0.0) return 0.0;
    aa = std::min(aa, RR);
    return aa * std::sqrt(std::max(0.0, RR * RR - aa * aa)) + RR * RR * std::asin(std::min(1.0, aa / RR));
  };
  return 2.0 * (G(R, a) - G(r, a));
}

// ---------------------------------------------------------------------------
// shared precomputation per grid and potential

class CurveContext {
public:
  CurveContext(const RadialGrid& grid, const InteractionPotential& p, double m,
               const AngularQuadratureConfig& cfg = {}, int threads = 1)
      : grid_(grid), p_(p), m_(m), cfg_(cfg), threads_(threads) {
    if (!(m > 1.0)) throw ArgumentError("curves: m must exceed 1");
    cfg_.validate();
  }

  const RadialGrid& grid() const { return grid_; }
  const InteractionPotential& potential() const { return p_; }
  double m() const { return m_; }
  const AngularQuadratureConfig& quad() const { return cfg_; }

  // Psi = W * rho at the cell edges
  const RadialFieldOperator& edge_potential() const {
    if (!edge_pot_)
      edge_pot_ = std::make_unique<RadialFieldOperator>(grid_, p_, grid_.edges(), true, false, CellRule{}, cfg_,
                                                        threads_);
    return *edge_pot_;
  }

  // Psi' at fixed Gauss nodes of every cell
  const RadialFieldOperator& node_force() const {
    if (!node_force_) {
      detail::gauss_rule(kNodes, gx_, gw_);
      std::vector<double> radii;
      const auto& e = grid_.edges();
      for (std::size_t i = 0; i < grid_.size(); ++i) {
        const double c = 0.5 * (e[i] + e[i + 1]), h = 0.5 * (e[i + 1] - e[i]);
        for (double x : gx_) radii.push_back(c + h * x);
      }
      node_force_ = std::make_unique<RadialFieldOperator>(grid_, p_, std::move(radii), false, true, CellRule{},
                                                          cfg_, threads_);
    }
    return *node_force_;
  }

  const std::vector<double>& node_x() const {
    node_force();
    return gx_;
  }
  const std::vector<double>& node_w() const {
    node_force();
    return gw_;
  }

  // Psi'(x) for an arbitrary radius, adaptive per cell
  double force_at(const std::vector<double>& v, double x) const {
    const auto& e = grid_.edges();
    double acc = 0.0;
    std::vector<double> gx, gw;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] == 0.0) continue;
      auto f = [&](double s) { return s > 0.0 ? s * radial_force_kernel(p_, x, s, cfg_).value : 0.0; };
      acc += v[j] * detail::cell_integral(f, e[j], e[j + 1], x, CellRule{}, cfg_, gx, gw);
    }
    return acc;
  }

  static constexpr int kNodes = 4;

private:
  RadialGrid grid_;
  InteractionPotential p_;
  double m_;
  AngularQuadratureConfig cfg_;
  int threads_;
  mutable std::unique_ptr<RadialFieldOperator> edge_pot_;
  mutable std::unique_ptr<RadialFieldOperator> node_force_;
  mutable std::vector<double> gx_, gw_;
};

namespace detail {

// Psi at the edges with a per-edge error allowance from the quadrature tolerances
inline void edge_psi(const CurveContext& ctx, const std::vector<double>& v, std::vector<double>& psi,
                     std::vector<double>& err) {
  const auto& op = ctx.edge_potential();
  psi = op.potential(v);
  const auto& cfg = ctx.quad();
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  err.assign(psi.size(), 0.0);
  for (std::size_t k = 0; k < psi.size(); ++k) {
    err[k] = cfg.rel_tol * std::abs(psi[k]) + static_cast<double>(v.size()) * cfg.abs_tol * vmax;
  }
}

inline double lambda_at(const InteractionPotential& p, double R) {
  const std::vector<double> grid = log_grid(1.0, std::max(2.0, 2.0 * R), 64);
  const AssumptionReport rep = check_assumptions(p, 2.0, grid);
  return lambda_lower(p, rep, std::max(1.0, R));
}

}  // namespace detail

// Each non-core level annulus [r_j, R_j] has its two side pieces
// sqrt(r_j^2 - x2^2) <= |x1| <= sqrt(R_j^2 - x2^2), |x2| < r_j, pushed toward
// the x2 axis at unit speed. dS/dt = 0; dI/dt = -4 sum dh r_j (Psi(R_j) - Psi(r_j)).
inline CurveReport css1_first_variation(const CurveContext& ctx, const RadialDensity& rho, double varpi, double R3) {
  if (!(rho.grid == ctx.grid())) throw ArgumentError("css1: density grid differs from the context grid");
  if (!(R3 > 0.0)) throw ArgumentError("css1: R3 must be positive");
  const SharpFlatSplit sp = sharp_flat_split(level_decompose(rho), varpi);
  std::vector<double> psi, err;
  bool any = false;
  for (const auto& b : sp.decomposition.bands)
    for (const auto& I : b.intervals) any = any || !I.contains_zero;
  CurveReport rep;
  rep.kind = CurveKind::CSS1;
  if (any) detail::edge_psi(ctx, rho.values, psi, err);
  for (const auto& b : sp.decomposition.bands) {
    for (const auto& I : b.intervals) {
      if (I.contains_zero) continue;
      const double dh = b.thickness();
      const std::size_t lo = I.first_cell, hi = I.last_cell + 1;
      rep.dI_dt += -4.0 * dh * I.r_lo * (psi[hi] - psi[lo]);
      rep.numerical_error += 4.0 * dh * I.r_lo * (err[hi] + err[lo]);
      rep.moving_mass += dh * strip_area(I.r_lo, I.r_hi, I.r_lo);
    }
  }
  rep.dS_dt = 0.0;
  rep.dE_dt = rep.dI_dt + rep.dS_dt;
  rep.cost_bound = rep.moving_mass;
  const double mu = window_mass(sp.mu_sharp, 0.0, std::min(R3, rho.grid.r_max()));
  const double lam = detail::lambda_at(ctx.potential(), 2.0 * R3);
  rep.params["varpi"] = varpi;
  rep.params["R3"] = R3;
  rep.params["mu_sharp_mass_R3"] = mu;
  rep.params["lambda_2R3"] = lam;
  const double scale = varpi * varpi * lam * mu * mu;
  rep.params["empirical_c"] = scale > 0.0 ? -rep.dE_dt / scale : 0.0;
  return rep;
}

// Only sharp intervals inside R2 move, and only their slices with |x2| <= r_j*.
// moving_mass counts both sides of the x2 axis.
inline CurveReport css2_first_variation(const CurveContext& ctx, const RadialDensity& rho, double varpi, double R1,
                                        double R2) {
  if (!(rho.grid == ctx.grid())) throw ArgumentError("css2: density grid differs from the context grid");
  if (!(R1 > 0.0)) throw ArgumentError("css2: R1 must be positive");
  if (!(R2 > 4.0 * R1)) throw ArgumentError("css2: R2 must exceed 4 R1");
  SharpFlatSplit sp = sharp_flat_split(level_decompose(rho), varpi);
  const LevelDecomposition dec = split_intervals_at(sp.decomposition, R2);
  CurveReport rep;
  rep.kind = CurveKind::CSS2;
  std::vector<double> psi, err;
  bool loaded = false;
  for (const auto& b : dec.bands) {
    for (const auto& I : b.intervals) {
      if (I.cls != IntervalClass::Sharp || I.r_hi > R2 * (1.0 + 1e-14)) continue;
      const double a = r_star(I, R1, R2);
      if (a <= 0.0) continue;
      if (!loaded) {
        detail::edge_psi(ctx, rho.values, psi, err);
        loaded = true;
      }
      const double dh = b.thickness();
      const std::size_t lo = I.first_cell, hi = I.last_cell + 1;
      rep.dI_dt += -4.0 * dh * a * (psi[hi] - psi[lo]);
      rep.numerical_error += 4.0 * dh * a * (err[hi] + err[lo]);
      rep.moving_mass += dh * strip_area(I.r_lo, I.r_hi, a);
    }
  }
  rep.dS_dt = 0.0;
  rep.dE_dt = rep.dI_dt;
  rep.cost_bound = rep.moving_mass;
  rep.params["varpi"] = varpi;
  rep.params["R1"] = R1;
  rep.params["R2"] = R2;
  return rep;
}

// ---------------------------------------------------------------------------
// radius selection for the local clustering curve

struct RtildeChoice {
  double Rtilde = 0.0;
  double a_emp = 0.0;
  // a_emp R / rho(R)^(m-1); 0 when rho vanishes
  double normalized = 0.0;
};

// minimize int_r^{4R} f^m / int_r^{4R} (x - r) f over r in [R, 2R]
inline RtildeChoice choose_Rtilde(const Staircase& f, double R, double m, std::size_t n_scan = 2001) {
  if (!(R > 0.0)) throw ArgumentError("choose_Rtilde: R must be positive");
  if (!(m > 1.0)) throw ArgumentError("choose_Rtilde: m must exceed 1");
  if (f.a() > R * (1.0 + 1e-14) || f.b() < 4.0 * R * (1.0 - 1e-14))
    throw ArgumentError("choose_Rtilde: staircase must cover [R, 4R]");
  for (std::size_t k = 0; k + 1 < f.values.size(); ++k)
    if (f.values[k + 1] > f.values[k]) throw ArgumentError("choose_Rtilde: profile must be nonincreasing");
  for (double v : f.values)
    if (v < 0.0) throw ArgumentError("choose_Rtilde: profile must be nonnegative");
  const double top = 4.0 * R;
  if (f.integral_pow(R, top) == 0.0) return {R, 0.0, 0.0};

  std::vector<double> cand;
  for (std::size_t k = 0; k < n_scan; ++k) cand.push_back(R + R * static_cast<double>(k) / (n_scan - 1));
  for (double b : f.breaks)
    if (b > R && b < 2.0 * R) cand.push_back(b);
  std::sort(cand.begin(), cand.end());

  RtildeChoice best{R, std::numeric_limits<double>::infinity(), 0.0};
  for (double r : cand) {
    const double num = f.integral_pow(r, top, m);
    const double den = f.integral_moment(r, top, r);
    // nothing left to the right of r: the inequality holds for any a
    const double ratio = (num == 0.0) ? 0.0 : num / den;
    if (ratio < best.a_emp) {
      best.a_emp = ratio;
      best.Rtilde = r;
    }
  }
  const double fR = f.at(R);
  best.normalized = fR > 0.0 ? best.a_emp * R / std::pow(fR, m - 1.0) : 0.0;
  return best;
}

// ---------------------------------------------------------------------------
// local clustering curve
//   v = -((|x| - Rt) / R1) x/|x| on Rt <= |x| <= 8 R1

inline CurveReport local_clustering_first_variation(const CurveContext& ctx, const RadialDensity& rho, double varpi,
                                                    double R1) {
  if (!(rho.grid == ctx.grid())) throw ArgumentError("local clustering: density grid differs from the context grid");
  if (!(R1 > 0.0)) throw ArgumentError("local clustering: R1 must be positive");
  const double top = 8.0 * R1;
  if (rho.grid.r_max() < top * (1.0 - 1e-14)) throw ArgumentError("local clustering: grid must reach 8 R1");
  const double m = ctx.m();
  const SharpFlatSplit sp = sharp_flat_split(level_decompose(rho), varpi);
  std::vector<double> base(rho.values.size());
  for (std::size_t i = 0; i < base.size(); ++i) base[i] = sp.rho_star.values[i] + sp.mu_flat.values[i];
  const Staircase st = rearrangement_staircase(RadialDensity(rho.grid, base), 2.0 * R1, top);
  const RtildeChoice ch = choose_Rtilde(st, 2.0 * R1, m);
  const double Rt = ch.Rtilde;

  CurveReport rep;
  rep.kind = CurveKind::LocalClustering;
  rep.params["varpi"] = varpi;
  rep.params["R1"] = R1;
  rep.params["Rtilde"] = Rt;
  rep.params["a_emp"] = ch.a_emp;
  rep.params["C_m_sample"] = ch.normalized;

  const auto& e = rho.grid.edges();
  const double two_pi = 2.0 * std::numbers::pi;
  double rho_m_annulus = 0.0;
  double rho_edge = 0.0;
  std::vector<double> dyn_x, dyn_w;
  detail::gauss_rule(CurveContext::kNodes, dyn_x, dyn_w);
  for (std::size_t i = 0; i < rho.values.size(); ++i) {
    const double lo = std::max(Rt, e[i]), hi = std::min(top, e[i + 1]);
    if (!(hi > lo)) continue;
    const double v = rho.values[i];
    if (hi >= top * (1.0 - 1e-14)) rho_edge = v;
    if (v == 0.0) continue;
    const double vm = std::pow(v, m);
    // int_lo^hi rho^m 2 pi r dr
    rho_m_annulus += vm * std::numbers::pi * (hi * hi - lo * lo);
    // -int rho^m div v dA, div v = (-2 + Rt/r)/R1
    rep.dS_dt += -vm * two_pi / R1 * ((-(hi * hi - lo * lo)) + Rt * (hi - lo));
    // int ((r - Rt)/R1)^2 rho 2 pi r dr
    auto F = [&](double r) {
      const double a = r - Rt;
      return a * a * a * a / 4.0 + Rt * a * a * a / 3.0;
    };
    rep.cost_bound += v * two_pi / (R1 * R1) * (F(hi) - F(lo));
    rep.moving_mass += v * std::numbers::pi * (hi * hi - lo * lo);

    // dI/dt = int grad Psi . v rho = -int Psi'(r) ((r - Rt)/R1) rho 2 pi r dr
    double acc = 0.0;
    if (lo == e[i] && hi == e[i + 1]) {
      const auto& op = ctx.node_force();
      const auto& gx = ctx.node_x();
      const auto& gw = ctx.node_w();
      const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
      for (std::size_t k = 0; k < gx.size(); ++k) {
        const double r = c + h * gx[k];
        acc += gw[k] * h * op.force_at(i * gx.size() + k, rho.values) * (r - Rt) / R1 * r;
      }
    } else {
      const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
      for (std::size_t k = 0; k < dyn_x.size(); ++k) {
        const double r = c + h * dyn_x[k];
        acc += dyn_w[k] * h * ctx.force_at(rho.values, r) * (r - Rt) / R1 * r;
      }
    }
    rep.dI_dt -= v * two_pi * acc;
  }
  rep.dE_dt = rep.dI_dt + rep.dS_dt;
  if (rho_edge > 0.0) rep.boundary_delta = -std::pow(rho_edge, m) * (top - Rt) / R1 * two_pi * top;
  rep.params["rho_m_annulus"] = rho_m_annulus;
  rep.params["dS_bound"] = 2.0 / R1 * rho_m_annulus;
  rep.numerical_error = ctx.quad().rel_tol * std::abs(rep.dI_dt);
  return rep;
}

// ---------------------------------------------------------------------------
// attraction toward the center from the radially decreasing part

struct CenterAttraction {
  double lhs = 0.0;              // Psi'(r) generated by rho* + mu_flat
  double truncated_mass = 0.0;   // int_{|y| <= r} (rho* - delta)_+ + (mu_flat - delta)_+
  double lambda = 0.0;           // lambda(r + delta^(-1/2))
  double eps2_over_r = 0.0;      // varpi^2 / r
};

inline CenterAttraction center_attraction(const CurveContext& ctx, const SharpFlatSplit& sp, double r, double delta) {
  if (!(r > 0.0)) throw ArgumentError("center_attraction: r must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("center_attraction: delta must lie in (0, 1)");
  if (!(sp.rho_star.grid == ctx.grid())) throw ArgumentError("center_attraction: grid differs from the context grid");
  CenterAttraction out;
  std::vector<double> v(sp.rho_star.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = sp.rho_star.values[i] + sp.mu_flat.values[i];
  out.lhs = ctx.force_at(v, r);
  const auto& e = sp.rho_star.grid.edges();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double hi = std::min(r, e[i + 1]);
    if (!(hi > e[i])) break;
    const double t = std::max(sp.rho_star.values[i] - delta, 0.0) + std::max(sp.mu_flat.values[i] - delta, 0.0);
    out.truncated_mass += t * std::numbers::pi * (hi * hi - e[i] * e[i]);
  }
  out.lambda = detail::lambda_at(ctx.potential(), r + 1.0 / std::sqrt(delta));
  out.eps2_over_r = sp.varpi * sp.varpi / r;
  return out;
}

}  // namespace aggdiff
