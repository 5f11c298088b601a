#pragma once

// Sign scans for F[phi, W](r, s): the phi-moment change produced by the
// interaction of two circles of radii r and s.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "aggdiff/angular_kernels.hpp"

namespace aggdiff {

// F for grad phi(x) = g(|x|) x/|x|, given the two profile values g(r), g(s)
inline KernelValue F_pair_values(double gr, double gs, const InteractionPotential& p, double r, double s,
                                 const AngularQuadratureConfig& cfg = {}) {
  require_radii(r, s, "F_pair");
  if (gr == 0.0 && gs == 0.0) return {0.0, 0.0};
  const double diff = r - s;
  auto integrand = [&](double th) {
    const double omc = one_minus_cos(th);
    const double d = std::sqrt(diff * diff + 2.0 * r * s * omc);
    // (g(r) e_x - g(s) e_y) . (x - y)
    const double dot = gr * (diff + s * omc) + gs * (-diff + r * omc);
    return p.w1(d) / d * dot;
  };
  return angular_integral(integrand, r, s, cfg);
}

template <class Profile>
KernelValue F_pair(Profile&& g, const InteractionPotential& p, double r, double s,
                   const AngularQuadratureConfig& cfg = {}) {
  require_radii(r, s, "F_pair");
  return F_pair_values(g(r), g(s), p, r, s, cfg);
}

struct PhiEpsGradient {
  double eps;

  explicit PhiEpsGradient(double e) : eps(e) {
    if (!(e > 0.0)) throw ArgumentError("PhiEpsGradient: eps must be positive");
  }

  // radial profile of grad(delta(|x|-eps) * ln|x| / 2pi): eta(eps/r)/r outside
  // the ring, nothing inside, the average of the two on the ring itself
  double operator()(double r, const AngularQuadratureConfig& cfg = {}) const {
    if (r == eps) return 0.5 / r;
    return detail::poisson_mean(eps / r, cfg).value / r;
  }
};

inline KernelValue F_phi_eps(const InteractionPotential& p, double eps, double r, double s,
                             const AngularQuadratureConfig& cfg = {}) {
  PhiEpsGradient g(eps);
  require_radii(r, s, "F_phi_eps");
  return F_pair_values(g(r, cfg), g(s, cfg), p, r, s, cfg);
}

struct PowerLawThresholdReport {
  double alpha = 0.0;
  double beta = 0.0;
  double tol = 0.0;
  double min_f = 0.0;
  double argmin_z = 0.0;
  bool nonnegative = true;  // min_f >= -tol
  std::optional<double> witness_z;
  std::optional<double> witness_f;
  std::vector<double> z;
  std::vector<double> f;
};

// z grid on (1, z_max]: z - 1 log-spaced from gap to z_max - 1
inline std::vector<double> threshold_z_grid(std::size_t n, double gap = 1e-3, double z_max = 1e3) {
  std::vector<double> g = log_grid(gap, z_max - 1.0, n);
  for (double& v : g) v += 1.0;
  return g;
}

inline PowerLawThresholdReport check_power_law_threshold(double alpha, const std::vector<double>& z_grid,
                                                         double tol = 1e-10,
                                                         const AngularQuadratureConfig& cfg = {}) {
  if (!(alpha > 1.0)) throw ArgumentError("check_power_law_threshold: alpha must exceed 1");
  if (z_grid.empty()) throw ArgumentError("check_power_law_threshold: empty z grid");
  PowerLawThresholdReport rep;
  rep.alpha = alpha;
  rep.beta = 0.5 * (alpha + 1.0);
  rep.tol = tol;
  rep.min_f = std::numeric_limits<double>::infinity();
  for (double z : z_grid) {
    if (!(z > 1.0)) throw DomainError("check_power_law_threshold: z grid must lie in (1, inf)");
    const double f = detail::f_z_unchecked(rep.beta, z, cfg).value;
    rep.z.push_back(z);
    rep.f.push_back(f);
    if (f < rep.min_f) {
      rep.min_f = f;
      rep.argmin_z = z;
    }
  }
  rep.nonnegative = rep.min_f >= -tol;
  if (!rep.nonnegative) {
    rep.witness_z = rep.argmin_z;
    rep.witness_f = rep.min_f;
  }
  return rep;
}

struct ErcScanConfig {
  double R1 = 1.0;
  std::vector<double> eps_grid;
  std::vector<double> r_grid;
  std::vector<double> s_grid;
  // negativity tolerance; unset means 1e-12 * max sampled |F|
  std::optional<double> tol;

  void validate() const {
    if (!(R1 > 0.0)) throw ArgumentError("erc: R1 must be positive");
    auto check = [](const std::vector<double>& g, const char* name) {
      if (g.empty()) throw ArgumentError(std::string("erc: ") + name + " is empty");
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 0.0)) throw ArgumentError(std::string("erc: ") + name + " must be positive");
        if (i > 0 && !(g[i] > g[i - 1])) throw ArgumentError(std::string("erc: ") + name + " must be increasing");
      }
    };
    check(eps_grid, "eps_grid");
    check(r_grid, "r_grid");
    check(s_grid, "s_grid");
    if (eps_grid.back() > R1) throw ArgumentError("erc: eps_grid must not exceed R1");
    if (tol && !(*tol >= 0.0)) throw ArgumentError("erc: tol must be nonnegative");
  }
};

struct ErcSample {
  double eps, r, s, F;
};

struct ErcReport {
  double min_F = std::numeric_limits<double>::infinity();
  ErcSample argmin{0, 0, 0, 0};
  std::optional<double> certified_R;
  std::vector<ErcSample> violations;
  std::vector<ErcSample> samples;
  double tol = 0.0;
  double scale = 0.0;
  bool a1_holds = false;  // power-decay condition on the union of the r and s grids
};

inline ErcReport find_certified_R(const InteractionPotential& p, const ErcScanConfig& cfg,
                                  const AngularQuadratureConfig& qcfg = {}) {
  cfg.validate();
  ErcReport rep;
  {
    std::vector<double> all = cfg.r_grid;
    all.insert(all.end(), cfg.s_grid.begin(), cfg.s_grid.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    rep.a1_holds = check_assumptions(p, 2.0, all).pass_a1;
  }
  for (double eps : cfg.eps_grid) {
    PhiEpsGradient g(eps);
    std::vector<double> gr(cfg.r_grid.size()), gs(cfg.s_grid.size());
    for (std::size_t i = 0; i < gr.size(); ++i) gr[i] = g(cfg.r_grid[i], qcfg);
    for (std::size_t j = 0; j < gs.size(); ++j) gs[j] = g(cfg.s_grid[j], qcfg);
    for (std::size_t j = 0; j < cfg.s_grid.size(); ++j) {
      for (std::size_t i = 0; i < cfg.r_grid.size(); ++i) {
        const double r = cfg.r_grid[i], s = cfg.s_grid[j];
        if (!(r > s)) continue;
        const double F = F_pair_values(gr[i], gs[j], p, r, s, qcfg).value;
        rep.samples.push_back({eps, r, s, F});
      }
    }
  }
  for (const auto& smp : rep.samples) {
    rep.scale = std::max(rep.scale, std::abs(smp.F));
    if (smp.F < rep.min_F) {
      rep.min_F = smp.F;
      rep.argmin = smp;
    }
  }
  rep.tol = cfg.tol ? *cfg.tol : 1e-12 * rep.scale;
  for (const auto& smp : rep.samples)
    if (smp.F < -rep.tol) rep.violations.push_back(smp);

  // smallest candidate R > R1 from the s grid with no violation at s >= R
  double worst_violation_s = -std::numeric_limits<double>::infinity();
  for (const auto& v : rep.violations) worst_violation_s = std::max(worst_violation_s, v.s);
  for (double R : cfg.s_grid) {
    if (!(R > cfg.R1)) continue;
    if (R <= worst_violation_s) continue;
    bool sampled = false;
    for (const auto& smp : rep.samples)
      if (smp.s >= R) {
        sampled = true;
        break;
      }
    if (sampled) {
      rep.certified_R = R;
      break;
    }
  }
  return rep;
}

}  // namespace aggdiff
