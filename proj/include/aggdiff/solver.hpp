#pragma once

// Explicit finite-volume solver for the radial aggregation-diffusion equation
//   d_t rho + (1/r) d_r(r rho u_r) = (1/r) d_r(r d_r rho^m),  u = -grad W * rho.

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggdiff/density.hpp"
#include "aggdiff/fields.hpp"

namespace aggdiff {

struct SimConfig {
  double m = 2.0;
  InteractionPotential potential;
  RadialGrid grid;
  double dt_max = 1e-2;
  double cfl = 0.3;
  double t_end = 1.0;
  int diagnostics_every = 10;
  double R1 = 1.0;
  std::vector<std::array<double, 2>> annuli;
  std::vector<double> snapshot_times;
  // false drops the interaction term (pure porous-medium flow)
  bool interaction = true;
  int threads = 1;
  AngularQuadratureConfig quad;

  void validate() const {
    if (!(m > 1.0)) throw ArgumentError("solver: m must exceed 1");
    if (grid.size() == 0) throw ArgumentError("solver: grid is empty");
    if (!(dt_max > 0.0)) throw ArgumentError("solver: dt_max must be positive");
    if (!(cfl > 0.0 && cfl < 1.0)) throw ArgumentError("solver: cfl must lie in (0, 1)");
    if (!(t_end > 0.0)) throw ArgumentError("solver: t_end must be positive");
    if (diagnostics_every < 1) throw ArgumentError("solver: diagnostics_every must be >= 1");
    if (!(R1 > 0.0)) throw ArgumentError("solver: R1 must be positive");
    for (const auto& a : annuli)
      if (!(a[0] >= 0.0 && a[1] > a[0])) throw ArgumentError("solver: annulus windows need 0 <= a < b");
    for (double t : snapshot_times)
      if (!(t >= 0.0 && t <= t_end)) throw ArgumentError("solver: snapshot times must lie in [0, t_end]");
    quad.validate();
  }
};

struct SimState {
  RadialDensity rho;
  double t = 0.0;
  long steps = 0;
};

class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string& what, SimState snap) : std::runtime_error(what), snapshot(std::move(snap)) {}
  SimState snapshot;
};

struct Sample {
  double t = 0.0;
  double mass = 0.0;
  double E = 0.0;
  double S = 0.0;
  double I = 0.0;
  double linf = 0.0;
  double phi_moment = 0.0;
  double log_moment = 0.0;
  std::vector<double> annulus_masses;
  std::vector<double> annulus_integrals;  // int_0^t mass in window dt
  double center_mass = 0.0;               // mass in r <= R1
  double D = 0.0;
  double dE_dt_fd = 0.0;
  double edge_mass = 0.0;  // mass in [0.9 r_max, r_max]
  long step = 0;
};

struct Snapshot {
  double t = 0.0;
  RadialDensity rho;
};

struct TimeSeries {
  std::vector<Sample> samples;
  std::vector<Snapshot> snapshots;
  std::vector<double> annulus_integrals;
  // energies sampled after every step, for the monotonicity check
  std::vector<double> step_energy_t;
  std::vector<double> step_energy;
  bool truncation_flag = false;
  double max_edge_mass = 0.0;
  double E_minus = -std::numeric_limits<double>::infinity();
  double max_linf = 0.0;
  long steps = 0;
  bool aborted = false;
  std::string abort_reason;
  RadialDensity final_density;
};

class Simulator {
public:
  explicit Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const auto& g = cfg_.grid;
    if (cfg_.interaction) {
      CellRule rule;
      rule.adaptive = false;
      rule.gauss_points = 2;
      force_ = std::make_unique<RadialFieldOperator>(g, cfg_.potential, g.edges(), false, true, rule, cfg_.quad,
                                                     cfg_.threads);
      energy_ = std::make_unique<InteractionMatrix>(g, cfg_.potential, cfg_.quad);
    }
  }

  const SimConfig& config() const { return cfg_; }

  // u_r at the N+1 cell edges; zero at r = 0
  std::vector<double> edge_velocity(const std::vector<double>& v) const {
    std::vector<double> u(cfg_.grid.size() + 1, 0.0);
    if (!force_) return u;
    for (std::size_t e = 1; e < u.size(); ++e) u[e] = -force_->force_at(e, v);
    return u;
  }

  double stable_dt(const std::vector<double>& v, const std::vector<double>& u) const {
    const double dr = cfg_.grid.min_width();
    double umax = 0.0;
    for (double x : u) umax = std::max(umax, std::abs(x));
    double lmax = 0.0;
    for (double x : v) lmax = std::max(lmax, x);
    double dt = cfg_.dt_max;
    if (umax > 0.0) dt = std::min(dt, cfg_.cfl * dr / umax);
    if (lmax > 0.0) dt = std::min(dt, cfg_.cfl * dr * dr / (2.0 * cfg_.m * std::pow(lmax, cfg_.m - 1.0)));
    return dt;
  }

  // d rho/dt for the given edge velocity
  std::vector<double> rate(const std::vector<double>& v, const std::vector<double>& u) const {
    const auto& g = cfg_.grid;
    const auto& e = g.edges();
    const auto& c = g.centers();
    const std::size_t n = g.size();
    std::vector<double> flux(n + 1, 0.0);  // 2 pi r_e J_e, zero at both boundaries
    for (std::size_t k = 1; k < n; ++k) {
      const double up = u[k] > 0.0 ? v[k - 1] : v[k];
      const double adv = u[k] * up;
      const double diff = -(std::pow(v[k], cfg_.m) - std::pow(v[k - 1], cfg_.m)) / (c[k] - c[k - 1]);
      flux[k] = 2.0 * std::numbers::pi * e[k] * (adv + diff);
    }
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = -(flux[i + 1] - flux[i]) / g.cell_areas()[i];
    return r;
  }

  // one explicit step with the given dt
  void advance(SimState& s, double dt) const {
    const auto u = edge_velocity(s.rho.values);
    const auto r = rate(s.rho.values, u);
    std::vector<double> next(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      next[i] = s.rho.values[i] + dt * r[i];
      if (!std::isfinite(next[i]) || next[i] < 0.0) {
        // clamp only pure round-off below zero
        if (std::isfinite(next[i]) && next[i] > -1e-14 * std::max(1.0, s.rho.values[i])) {
          next[i] = 0.0;
          continue;
        }
        throw IntegrationError("non-finite or negative density at cell " + std::to_string(i) +
                                   ", t = " + std::to_string(s.t),
                               s);
      }
    }
    s.rho.values = std::move(next);
    s.t += dt;
    ++s.steps;
  }

  // one CFL-limited step, not overshooting t_stop
  double step(SimState& s, double t_stop = std::numeric_limits<double>::infinity()) const {
    const auto u = edge_velocity(s.rho.values);
    double dt = stable_dt(s.rho.values, u);
    if (s.t + dt > t_stop) dt = t_stop - s.t;
    if (!(dt > 0.0)) return 0.0;
    advance(s, dt);
    return dt;
  }

  double dissipation(const std::vector<double>& v) const { return dissipation(v, edge_velocity(v)); }

  // D = int |u - m/(m-1) d_r rho^(m-1)|^2 rho 2 pi r dr over interior edges
  double dissipation(const std::vector<double>& v, const std::vector<double>& u) const {
    const auto& e = cfg_.grid.edges();
    const auto& c = cfg_.grid.centers();
    const double m = cfg_.m;
    double D = 0.0;
    for (std::size_t k = 1; k < v.size(); ++k) {
      const double h = c[k] - c[k - 1];
      const double rho_e = 0.5 * (v[k] + v[k - 1]);
      if (rho_e == 0.0) continue;
      const double grad = m / (m - 1.0) * (std::pow(v[k], m - 1.0) - std::pow(v[k - 1], m - 1.0)) / h;
      const double w = u[k] - grad;
      D += w * w * rho_e * 2.0 * std::numbers::pi * e[k] * h;
    }
    return D;
  }

  double interaction_energy(const std::vector<double>& v) const { return energy_ ? energy_->energy(v) : 0.0; }

  double energy(const std::vector<double>& v) const {
    return internal_energy(RadialDensity(cfg_.grid, v), cfg_.m) + interaction_energy(v);
  }

  Sample sample(const SimState& s) const {
    Sample out;
    out.t = s.t;
    out.step = s.steps;
    out.mass = mass(s.rho);
    out.S = internal_energy(s.rho, cfg_.m);
    out.I = interaction_energy(s.rho.values);
    out.E = out.S + out.I;
    out.linf = linf(s.rho);
    out.phi_moment = phi_moment(s.rho, cfg_.R1);
    out.log_moment = log_moment(s.rho);
    for (const auto& a : cfg_.annuli) out.annulus_masses.push_back(window_mass(s.rho, a[0], a[1]));
    out.center_mass = window_mass(s.rho, 0.0, cfg_.R1);
    out.D = dissipation(s.rho.values);
    const double rm = cfg_.grid.r_max();
    out.edge_mass = window_mass(s.rho, 0.9 * rm, rm);
    return out;
  }

  // lower bound for E along the run: S >= 0, and W(r) >= W(1) + C ln r on (0, 1]
  // with C = sup_{r <= 1} r W'(r), so I >= W(1) M^2/2 - (pi/4) C M sup|rho|
  double energy_lower_bound(double M, double sup_linf) const {
    if (!cfg_.interaction) return 0.0;
    const auto& p = cfg_.potential;
    double C = 0.0;
    for (double r : log_grid(1e-8, 1.0, 400)) C = std::max(C, r * p.w1(r));
    const double w1v = p.w(1.0);
    return 0.5 * w1v * M * M - 0.25 * std::numbers::pi * C * M * sup_linf;
  }

  TimeSeries run(const RadialDensity& rho_in, bool record_step_energy = false) const {
    if (!(rho_in.grid == cfg_.grid)) throw ArgumentError("run: initial density must live on the configured grid");
    TimeSeries ts;
    SimState s{rho_in, 0.0, 0};
    const std::size_t na = cfg_.annuli.size();
    ts.annulus_integrals.assign(na, 0.0);
    std::vector<double> prev_annulus(na);
    for (std::size_t a = 0; a < na; ++a) prev_annulus[a] = window_mass(s.rho, cfg_.annuli[a][0], cfg_.annuli[a][1]);

    std::vector<double> snaps = cfg_.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;
    auto take_snapshots = [&] {
      while (next_snap < snaps.size() && snaps[next_snap] <= s.t + 1e-12 * std::max(1.0, s.t)) {
        ts.snapshots.push_back({s.t, s.rho});
        ++next_snap;
      }
    };
    auto record = [&] {
      Sample smp = sample(s);
      smp.annulus_integrals = ts.annulus_integrals;
      ts.max_edge_mass = std::max(ts.max_edge_mass, smp.edge_mass);
      ts.samples.push_back(std::move(smp));
    };
    take_snapshots();
    record();
    ts.max_linf = linf(s.rho);
    if (record_step_energy) {
      ts.step_energy_t.push_back(s.t);
      ts.step_energy.push_back(energy(s.rho.values));
    }
    try {
      while (s.t < cfg_.t_end * (1.0 - 1e-14)) {
        double stop = cfg_.t_end;
        if (next_snap < snaps.size()) stop = std::min(stop, snaps[next_snap]);
        const double dt = step(s, stop);
        if (!(dt > 0.0)) break;
        for (std::size_t a = 0; a < na; ++a) {
          const double now = window_mass(s.rho, cfg_.annuli[a][0], cfg_.annuli[a][1]);
          ts.annulus_integrals[a] += 0.5 * dt * (now + prev_annulus[a]);
          prev_annulus[a] = now;
        }
        ts.max_linf = std::max(ts.max_linf, linf(s.rho));
        if (record_step_energy) {
          ts.step_energy_t.push_back(s.t);
          ts.step_energy.push_back(energy(s.rho.values));
        }
        take_snapshots();
        const bool last = !(s.t < cfg_.t_end * (1.0 - 1e-14));
        if (s.steps % cfg_.diagnostics_every == 0 || last) record();
      }
    } catch (const IntegrationError& err) {
      ts.aborted = true;
      ts.abort_reason = err.what();
    }
    ts.steps = s.steps;
    ts.final_density = s.rho;
    finish(ts);
    return ts;
  }

private:
  void finish(TimeSeries& ts) const {
    auto& sm = ts.samples;
    const std::size_t n = sm.size();
    for (std::size_t k = 0; k < n; ++k) {
      if (n < 2) {
        sm[k].dE_dt_fd = 0.0;
      } else if (k == 0) {
        sm[k].dE_dt_fd = (sm[1].E - sm[0].E) / (sm[1].t - sm[0].t);
      } else if (k + 1 == n) {
        sm[k].dE_dt_fd = (sm[k].E - sm[k - 1].E) / (sm[k].t - sm[k - 1].t);
      } else {
        sm[k].dE_dt_fd = (sm[k + 1].E - sm[k - 1].E) / (sm[k + 1].t - sm[k - 1].t);
      }
    }
    ts.truncation_flag = ts.max_edge_mass > 1e-6;
    const double M = n ? sm.front().mass : 0.0;
    ts.E_minus = energy_lower_bound(M, ts.max_linf);
  }

  SimConfig cfg_;
  std::unique_ptr<RadialFieldOperator> force_;
  std::unique_ptr<InteractionMatrix> energy_;
};

// u_r at the cell edges of rho's grid
inline std::vector<double> radial_velocity(const RadialDensity& rho, const InteractionPotential& p,
                                           const AngularQuadratureConfig& cfg = {}) {
  RadialFieldOperator op(rho.grid, p, rho.grid.edges(), false, true, CellRule{}, cfg);
  std::vector<double> u = op.force(rho.values);
  for (double& x : u) x = -x;
  u[0] = 0.0;
  return u;
}

inline SimState step(const SimState& state, const SimConfig& cfg) {
  Simulator sim(cfg);
  SimState s = state;
  sim.step(s);
  return s;
}

inline double dissipation(const RadialDensity& rho, const SimConfig& cfg) {
  SimConfig c = cfg;
  c.grid = rho.grid;
  return Simulator(c).dissipation(rho.values);
}

inline TimeSeries run(const SimConfig& cfg, const RadialDensity& rho_in) { return Simulator(cfg).run(rho_in); }

// E[rho_in] < w_limit / 2
inline bool check_subcritical(const RadialDensity& rho_in, const InteractionPotential& p, double m,
                              const AngularQuadratureConfig& cfg = {}) {
  if (!std::isfinite(p.w_limit())) return true;
  const double E = internal_energy(rho_in, m) + interaction_energy(rho_in, p, cfg);
  return E < 0.5 * p.w_limit();
}

// ---------------------------------------------------------------------------
// initial data generators, all normalized to unit mass

inline RadialDensity normalized(RadialDensity rho) {
  const double M = mass(rho);
  if (!(M > 0.0)) throw ArgumentError("initial data has zero mass");
  for (double& v : rho.values) v /= M;
  return rho;
}

// cell averages of f over each annular cell (area-weighted, 4-point Gauss)
template <class F>
RadialDensity sample_profile(const RadialGrid& g, F&& f) {
  std::vector<double> gx, gw;
  detail::gauss_rule(4, gx, gw);
  std::vector<double> v(g.size());
  const auto& e = g.edges();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double c = 0.5 * (e[i] + e[i + 1]), h = 0.5 * (e[i + 1] - e[i]);
    double acc = 0.0;
    for (std::size_t k = 0; k < gx.size(); ++k) {
      const double r = c + h * gx[k];
      acc += gw[k] * std::max(0.0, f(r)) * 2.0 * std::numbers::pi * r * h;
    }
    v[i] = acc / g.cell_areas()[i];
  }
  return RadialDensity(g, std::move(v));
}

inline RadialDensity uniform_disk(const RadialGrid& g, double R) {
  return normalized(sample_profile(g, [R](double r) { return r <= R ? 1.0 : 0.0; }));
}

inline RadialDensity uniform_annulus(const RadialGrid& g, double a, double b) {
  return normalized(sample_profile(g, [a, b](double r) { return (r >= a && r <= b) ? 1.0 : 0.0; }));
}

struct Bump {
  double center, width, height;
};

// sum of compactly supported (1 - x^2)^2 bumps in r
inline RadialDensity multi_bump(const RadialGrid& g, const std::vector<Bump>& bumps) {
  return normalized(sample_profile(g, [&](double r) {
    double v = 0.0;
    for (const auto& b : bumps) {
      const double x = (r - b.center) / b.width;
      if (std::abs(x) < 1.0) v += b.height * (1.0 - x * x) * (1.0 - x * x);
    }
    return v;
  }));
}

}  // namespace aggdiff
