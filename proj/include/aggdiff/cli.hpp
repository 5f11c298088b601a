#pragma once

// Command dispatch for the aggdiff tool.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "aggdiff/config.hpp"
#include "aggdiff/curves.hpp"
#include "aggdiff/erc.hpp"
#include "aggdiff/io.hpp"
#include "aggdiff/solver.hpp"

namespace aggdiff::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kBadConfig = 2, kAborted = 3 };

struct Overrides {
  std::optional<std::string> out;
  std::optional<int> threads;
};

namespace detail {

inline std::string path_in(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline io::json base_summary(const ExperimentConfig& c) {
  io::json j;
  j["command"] = c.command;
  j["run_id"] = c.run_id;
  j["potential"] = {{"family", c.potential.family}, {"params", c.potential.params}};
  return j;
}

inline int simulate(const ExperimentConfig& c, const std::string& dir, std::ostream& log) {
  SimConfig sc;
  sc.m = c.m;
  sc.potential = make_potential(c);
  sc.grid = RadialGrid::uniform(c.r_max, c.N);
  sc.dt_max = c.dt_max;
  sc.cfl = c.cfl;
  sc.t_end = c.t_end;
  sc.diagnostics_every = c.diagnostics_every;
  sc.R1 = c.R1;
  sc.annuli = c.annuli;
  sc.snapshot_times = c.snapshot_times;
  sc.threads = c.threads;
  sc.quad = c.quad;
  const RadialDensity rho0 = make_density(c.initial, sc.grid, c.seed);
  Simulator sim(sc);
  const bool subcritical = check_subcritical(rho0, sc.potential, sc.m, sc.quad);
  const TimeSeries ts = sim.run(rho0);
  const std::string stem = "simulate_" + c.run_id;
  io::write_text(path_in(dir, stem + "_timeseries.csv"), io::timeseries_csv(ts, sc.annuli.size()));
  for (std::size_t k = 0; k < ts.snapshots.size(); ++k)
    io::write_density(path_in(dir, stem + "_snapshot_" + std::to_string(k)), ts.snapshots[k].rho);
  io::write_density(path_in(dir, stem + "_final"), ts.final_density);
  io::json j = base_summary(c);
  j["subcritical"] = subcritical;
  j["initial_energy"] = sim.energy(rho0.values);
  io::json snaps = io::json::array();
  for (const auto& s : ts.snapshots) snaps.push_back(s.t);
  j["snapshot_times"] = snaps;
  j["series"] = io::timeseries_summary(ts);
  io::write_text(path_in(dir, stem + "_summary.json"), j.dump(2) + "\n");
  log << "simulate: " << ts.steps << " steps, t = " << (ts.samples.empty() ? 0.0 : ts.samples.back().t)
      << (ts.aborted ? " (aborted: " + ts.abort_reason + ")" : std::string()) << "\n";
  return ts.aborted ? kAborted : kOk;
}

inline int erc_check(const ExperimentConfig& c, const std::string& dir, std::ostream& log) {
  const InteractionPotential p = make_potential(c);
  ErcScanConfig sc{c.erc.R1, c.erc.eps, c.erc.r, c.erc.s, c.erc.tol};
  const ErcReport rep = find_certified_R(p, sc, c.quad);
  const std::string stem = "erc-check_" + c.run_id;
  io::write_text(path_in(dir, stem + "_scan.csv"), io::erc_csv(rep.samples));
  io::write_text(path_in(dir, stem + "_violations.csv"), io::erc_csv(rep.violations));
  io::json j = base_summary(c);
  j["samples"] = rep.samples.size();
  j["violations"] = rep.violations.size();
  j["min_F"] = rep.min_F;
  j["argmin"] = {{"eps", rep.argmin.eps}, {"r", rep.argmin.r}, {"s", rep.argmin.s}};
  j["tol"] = rep.tol;
  j["a1_holds"] = rep.a1_holds;
  j["certified_R"] = rep.certified_R ? io::json(*rep.certified_R) : io::json(nullptr);
  if (p.family() == PotentialFamily::PowerLawForce && p.params()[0] > 1.0) {
    const auto th = check_power_law_threshold(p.params()[0], threshold_z_grid(c.erc.threshold_points), 1e-10, c.quad);
    io::json t;
    t["alpha"] = th.alpha;
    t["min_f"] = th.min_f;
    t["argmin_z"] = th.argmin_z;
    t["nonnegative"] = th.nonnegative;
    if (th.witness_z) t["witness"] = {{"z", *th.witness_z}, {"f", *th.witness_f}};
    j["power_law_threshold"] = t;
  }
  io::write_text(path_in(dir, stem + "_summary.json"), j.dump(2) + "\n");
  log << "erc-check: " << rep.samples.size() << " samples, " << rep.violations.size() << " violations\n";
  return kOk;
}

inline int decompose(const ExperimentConfig& c, const std::string& dir, std::ostream& log) {
  const RadialGrid g = RadialGrid::uniform(c.r_max, c.N);
  const RadialDensity rho = make_density(c.initial, g, c.seed);
  const LevelDecomposition dec = level_decompose(rho);
  const SharpFlatSplit sp = sharp_flat_split(dec, c.varpi);
  const RadialDensity back = reconstruct(dec);
  const std::string stem = "decompose_" + c.run_id;
  std::string csv = std::string(io::kSchema) + "\nr_center,rho,rho_star,mu_sharp,mu_flat\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    csv += io::num(g.centers()[i]) + "," + io::num(rho.values[i]) + "," + io::num(sp.rho_star.values[i]) + "," +
           io::num(sp.mu_sharp.values[i]) + "," + io::num(sp.mu_flat.values[i]) + "\n";
  io::write_text(path_in(dir, stem + "_parts.csv"), csv);
  std::string iv = std::string(io::kSchema) + "\nh_lo,h_hi,r_lo,r_hi,class\n";
  for (const auto& b : sp.decomposition.bands)
    for (const auto& I : b.intervals) {
      const char* cls = I.cls == IntervalClass::Core ? "core" : I.cls == IntervalClass::Sharp ? "sharp" : "flat";
      iv += io::num(b.h_lo) + "," + io::num(b.h_hi) + "," + io::num(I.r_lo) + "," + io::num(I.r_hi) + "," + cls + "\n";
    }
  io::write_text(path_in(dir, stem + "_intervals.csv"), iv);
  double recon = 0.0;
  std::size_t single = 0;
  for (std::size_t i = 0; i < g.size(); ++i) recon = std::max(recon, std::abs(back.values[i] - rho.values[i]));
  for (const auto& b : sp.decomposition.bands)
    for (const auto& I : b.intervals) single += I.first_cell == I.last_cell ? 1 : 0;
  const DecayBoundResult db = decay_bound_details(sp);
  io::json j = base_summary(c);
  j["varpi"] = c.varpi;
  j["mass"] = mass(rho);
  j["mass_star"] = mass(sp.rho_star);
  j["mass_sharp"] = mass(sp.mu_sharp);
  j["mass_flat"] = mass(sp.mu_flat);
  j["bands"] = sp.decomposition.bands.size();
  j["single_cell_intervals"] = single;
  j["reconstruction_error"] = recon;
  j["decay_bound_holds"] = db.holds;
  j["decay_bound_worst_ratio"] = db.worst_ratio;
  io::write_text(path_in(dir, stem + "_summary.json"), j.dump(2) + "\n");
  log << "decompose: " << sp.decomposition.bands.size() << " bands\n";
  return kOk;
}

inline int curve_analyze(const ExperimentConfig& c, const std::string& dir, std::ostream& log) {
  const RadialGrid g = RadialGrid::uniform(c.r_max, c.N);
  const InteractionPotential p = make_potential(c);
  CurveContext ctx(g, p, c.m, c.quad, c.threads);
  const std::string stem = "curve-analyze_" + c.run_id;
  for (std::size_t k = 0; k < c.curves.densities.size(); ++k) {
    const RadialDensity rho = make_density(c.curves.densities[k], g, c.seed, k);
    io::json j = base_summary(c);
    j["density_index"] = k;
    j["density_type"] = c.curves.densities[k].type;
    j["m"] = c.m;
    io::json reps = io::json::array();
    reps.push_back(io::to_json(css1_first_variation(ctx, rho, c.varpi, c.curves.R3)));
    reps.push_back(io::to_json(css2_first_variation(ctx, rho, c.varpi, c.curves.R1, c.curves.R2)));
    reps.push_back(io::to_json(local_clustering_first_variation(ctx, rho, c.varpi, c.curves.R1)));
    j["reports"] = reps;
    io::write_text(path_in(dir, stem + "_" + std::to_string(k) + ".json"), j.dump(2) + "\n");
  }
  log << "curve-analyze: " << c.curves.densities.size() << " densities\n";
  return kOk;
}

inline int assumptions(const ExperimentConfig& c, const std::string& dir, std::ostream& log) {
  const InteractionPotential p = make_potential(c);
  const auto grid = log_grid(c.assumptions.r_min, c.assumptions.r_max, c.assumptions.n);
  const AssumptionReport rep = check_assumptions(p, c.assumptions.m, grid);
  io::json j = base_summary(c);
  j["report"] = io::to_json(rep);
  j["w_limit"] = std::isfinite(p.w_limit()) ? io::json(p.w_limit()) : io::json("inf");
  io::write_text(path_in(dir, "assumptions_" + c.run_id + "_summary.json"), j.dump(2) + "\n");
  log << "assumptions: A1 " << rep.pass_a1 << ", A2 " << rep.pass_a2 << ", A3 " << rep.pass_a3 << "\n";
  return kOk;
}

}  // namespace detail

inline int run_command(const std::string& config_path, const Overrides& ov, std::ostream& log, std::ostream& err) {
  ExperimentConfig c;
  try {
    c = parse_config(io::read_text(config_path));
  } catch (const ConfigError& e) {
    err << config_path << ": " << e.what() << "\n";
    return kBadConfig;
  } catch (const std::exception& e) {
    err << config_path << ": " << e.what() << "\n";
    return kBadConfig;
  }
  if (ov.out) c.output_dir = *ov.out;
  if (ov.threads) {
    if (*ov.threads < 1) {
      err << "--threads must be >= 1\n";
      return kBadConfig;
    }
    c.threads = *ov.threads;
  }
  try {
    std::filesystem::create_directories(c.output_dir);
    if (c.command == "simulate") return detail::simulate(c, c.output_dir, log);
    if (c.command == "erc-check") return detail::erc_check(c, c.output_dir, log);
    if (c.command == "decompose") return detail::decompose(c, c.output_dir, log);
    if (c.command == "curve-analyze") return detail::curve_analyze(c, c.output_dir, log);
    if (c.command == "assumptions") return detail::assumptions(c, c.output_dir, log);
  } catch (const std::exception& e) {
    err << c.command << ": " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace aggdiff::cli
