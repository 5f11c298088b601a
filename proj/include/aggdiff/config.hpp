#pragma once

// Experiment configuration: a JSON document parsed into typed specs, with
// errors reported against the line of the offending key.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "aggdiff/erc.hpp"
#include "aggdiff/io.hpp"
#include "aggdiff/solver.hpp"

namespace aggdiff {

class ConfigError : public ArgumentError {
public:
  ConfigError(const std::string& msg, int line) : ArgumentError(format(msg, line)), line_(line) {}
  int line() const { return line_; }

private:
  static std::string format(const std::string& msg, int line) {
    return line > 0 ? "config line " + std::to_string(line) + ": " + msg : "config: " + msg;
  }
  int line_;
};

struct PotentialSpec {
  std::string family = "WeaklyConfining";
  std::vector<double> params{0.5};
};

struct DensitySpec {
  std::string type = "disk";  // disk | annulus | bumps | random | csv
  double radius = 1.0;
  double inner = 1.0, outer = 2.0;
  std::vector<Bump> bumps;
  int count = 3;           // random
  double support = 4.0;    // random
  std::string path;        // csv: stem of <path>.csv / <path>.json
};

struct ErcSpec {
  double R1 = 1.0;
  std::vector<double> eps, r, s;
  std::optional<double> tol;
  // also scan the power-law threshold when the potential is a power law
  std::size_t threshold_points = 400;
};

struct CurveSpec {
  double R1 = 1.0;
  double R2 = 5.0;
  double R3 = 8.0;
  std::vector<DensitySpec> densities;
};

struct AssumptionSpec {
  double m = 2.0;
  double r_min = 1e-3, r_max = 1e3;
  std::size_t n = 200;
};

struct ExperimentConfig {
  std::string command;
  PotentialSpec potential;
  double r_max = 12.0;
  std::size_t N = 256;
  double m = 2.0;
  double cfl = 0.3;
  double dt_max = 1e-2;
  double t_end = 1.0;
  double R1 = 1.0;
  int diagnostics_every = 10;
  std::vector<std::array<double, 2>> annuli;
  std::vector<double> snapshot_times;
  DensitySpec initial;
  ErcSpec erc;
  double varpi = 0.2;
  CurveSpec curves;
  AssumptionSpec assumptions;
  AngularQuadratureConfig quad;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int threads = 1;
  std::string run_id;  // hash of the canonical config, threads and output dir excluded
};

namespace detail {

// line of the last key of path, found by walking the raw text
inline int locate(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  std::size_t found = std::string::npos;
  for (const auto& key : path) {
    const std::string pat = "\"" + key + "\"";
    std::size_t p = text.find(pat, pos);
    while (p != std::string::npos) {
      std::size_t q = p + pat.size();
      while (q < text.size() && std::isspace(static_cast<unsigned char>(text[q]))) ++q;
      if (q < text.size() && text[q] == ':') break;
      p = text.find(pat, p + 1);
    }
    if (p == std::string::npos) break;
    found = p;
    pos = p + pat.size();
  }
  if (found == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(found), '\n'));
}

inline std::string join(const std::vector<std::string>& path) {
  std::string s;
  for (const auto& k : path) s += (s.empty() ? "" : ".") + k;
  return s;
}

class Reader {
public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    throw ConfigError(join(path) + ": " + msg, locate(text_, path));
  }

  double number(const io::json& j, const std::vector<std::string>& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
  }
  std::size_t count(const io::json& j, const std::vector<std::string>& path) const {
    if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected an integer");
    const auto v = j.get<long long>();
    if (v < 1) fail(path, "must be >= 1");
    return static_cast<std::size_t>(v);
  }
  std::string string(const io::json& j, const std::vector<std::string>& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }
  std::vector<double> numbers(const io::json& j, const std::vector<std::string>& path) const {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], path));
    return out;
  }
  // list of numbers, or {"min", "max", "n", "spacing": "log" | "linear"}
  std::vector<double> grid(const io::json& j, const std::vector<std::string>& path) const {
    if (j.is_array()) return numbers(j, path);
    if (!j.is_object()) fail(path, "expected an array or a {min, max, n} object");
    auto sub = [&](const char* k) {
      auto p = path;
      p.push_back(k);
      if (!j.contains(k)) fail(p, "missing");
      return p;
    };
    const double lo = number(j["min"], sub("min"));
    const double hi = number(j["max"], sub("max"));
    const std::size_t n = count(j["n"], sub("n"));
    std::string spacing = "log";
    if (j.contains("spacing")) spacing = string(j["spacing"], {path.back(), "spacing"});
    if (!(hi > lo)) fail(path, "max must exceed min");
    if (spacing == "log") {
      if (!(lo > 0.0)) fail(path, "log spacing needs min > 0");
      return log_grid(lo, hi, n);
    }
    if (spacing != "linear") fail(path, "spacing must be 'log' or 'linear'");
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / (n - 1);
    return out;
  }

private:
  const std::string& text_;
};

inline void check_keys(const Reader& rd, const io::json& j, const std::vector<std::string>& path,
                       const std::vector<std::string>& allowed) {
  if (!j.is_object()) rd.fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      auto p = path;
      p.push_back(it.key());
      rd.fail(p, "unknown key");
    }
  }
}

inline DensitySpec read_density_spec(const Reader& rd, const io::json& j, const std::vector<std::string>& path) {
  check_keys(rd, j, path, {"type", "radius", "inner", "outer", "bumps", "count", "support", "path"});
  auto at = [&](const char* k) {
    auto p = path;
    p.push_back(k);
    return p;
  };
  DensitySpec d;
  if (!j.contains("type")) rd.fail(at("type"), "missing");
  d.type = rd.string(j["type"], at("type"));
  if (d.type == "disk") {
    if (!j.contains("radius")) rd.fail(at("radius"), "missing");
    d.radius = rd.number(j["radius"], at("radius"));
    if (!(d.radius > 0.0)) rd.fail(at("radius"), "must be positive");
  } else if (d.type == "annulus") {
    if (!j.contains("inner") || !j.contains("outer")) rd.fail(path, "annulus needs 'inner' and 'outer'");
    d.inner = rd.number(j["inner"], at("inner"));
    d.outer = rd.number(j["outer"], at("outer"));
    if (!(d.inner >= 0.0 && d.outer > d.inner)) rd.fail(at("outer"), "need 0 <= inner < outer");
  } else if (d.type == "bumps") {
    if (!j.contains("bumps") || !j["bumps"].is_array() || j["bumps"].empty())
      rd.fail(at("bumps"), "expected a nonempty array");
    for (const auto& b : j["bumps"]) {
      const auto p = at("bumps");
      if (!b.is_object() || !b.contains("center") || !b.contains("width") || !b.contains("height"))
        rd.fail(p, "each bump needs center, width, height");
      Bump bp{rd.number(b["center"], p), rd.number(b["width"], p), rd.number(b["height"], p)};
      if (!(bp.center >= 0.0) || !(bp.width > 0.0) || !(bp.height > 0.0))
        rd.fail(p, "bumps need center >= 0, width > 0, height > 0");
      d.bumps.push_back(bp);
    }
  } else if (d.type == "random") {
    if (j.contains("count")) d.count = static_cast<int>(rd.count(j["count"], at("count")));
    if (j.contains("support")) d.support = rd.number(j["support"], at("support"));
    if (!(d.support > 0.0)) rd.fail(at("support"), "must be positive");
  } else if (d.type == "csv") {
    if (!j.contains("path")) rd.fail(at("path"), "missing");
    d.path = rd.string(j["path"], at("path"));
  } else {
    rd.fail(at("type"), "unknown density type '" + d.type + "' (disk, annulus, bumps, random, csv)");
  }
  return d;
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  io::json j;
  try {
    j = io::json::parse(text);
  } catch (const io::json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
    throw ConfigError(std::string("syntax error: ") + e.what(), line);
  }
  detail::Reader rd(text);
  detail::check_keys(rd, j, {},
                     {"command", "potential", "grid", "solver", "initial", "erc", "varpi", "curves", "assumptions",
                      "quadrature", "output_dir", "seed", "threads"});
  ExperimentConfig c;
  if (!j.contains("command")) throw ConfigError("missing 'command'", 1);
  c.command = rd.string(j["command"], {"command"});
  const std::vector<std::string> cmds{"simulate", "erc-check", "decompose", "curve-analyze", "assumptions"};
  if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end())
    rd.fail({"command"}, "unknown command '" + c.command + "'");

  if (j.contains("potential")) {
    const auto& p = j["potential"];
    detail::check_keys(rd, p, {"potential"}, {"family", "params"});
    if (!p.contains("family")) rd.fail({"potential", "family"}, "missing");
    c.potential.family = rd.string(p["family"], {"potential", "family"});
    c.potential.params = p.contains("params") ? rd.numbers(p["params"], {"potential", "params"}) : std::vector<double>{};
    try {
      (void)InteractionPotential::from_spec(c.potential.family, c.potential.params);
    } catch (const ArgumentError& e) {
      rd.fail({"potential", "family"}, e.what());
    }
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    detail::check_keys(rd, g, {"grid"}, {"r_max", "N"});
    if (g.contains("r_max")) c.r_max = rd.number(g["r_max"], {"grid", "r_max"});
    if (g.contains("N")) c.N = rd.count(g["N"], {"grid", "N"});
    if (!(c.r_max > 0.0)) rd.fail({"grid", "r_max"}, "must be positive");
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    detail::check_keys(rd, s, {"solver"},
                       {"m", "cfl", "dt_max", "t_end", "R1", "annuli", "diagnostics_every", "snapshot_times"});
    if (s.contains("m")) c.m = rd.number(s["m"], {"solver", "m"});
    if (s.contains("cfl")) c.cfl = rd.number(s["cfl"], {"solver", "cfl"});
    if (s.contains("dt_max")) c.dt_max = rd.number(s["dt_max"], {"solver", "dt_max"});
    if (s.contains("t_end")) c.t_end = rd.number(s["t_end"], {"solver", "t_end"});
    if (s.contains("R1")) c.R1 = rd.number(s["R1"], {"solver", "R1"});
    if (s.contains("diagnostics_every"))
      c.diagnostics_every = static_cast<int>(rd.count(s["diagnostics_every"], {"solver", "diagnostics_every"}));
    if (s.contains("snapshot_times")) c.snapshot_times = rd.numbers(s["snapshot_times"], {"solver", "snapshot_times"});
    if (s.contains("annuli")) {
      if (!s["annuli"].is_array()) rd.fail({"solver", "annuli"}, "expected an array of [a, b] pairs");
      for (const auto& a : s["annuli"]) {
        const auto v = rd.numbers(a, {"solver", "annuli"});
        if (v.size() != 2) rd.fail({"solver", "annuli"}, "each annulus is a pair [a, b]");
        c.annuli.push_back({v[0], v[1]});
      }
    }
  }
  if (j.contains("initial")) c.initial = detail::read_density_spec(rd, j["initial"], {"initial"});
  if (j.contains("erc")) {
    const auto& e = j["erc"];
    detail::check_keys(rd, e, {"erc"}, {"R1", "eps", "r", "s", "tol", "threshold_points"});
    if (e.contains("R1")) c.erc.R1 = rd.number(e["R1"], {"erc", "R1"});
    for (const char* k : {"eps", "r", "s"}) {
      if (!e.contains(k)) rd.fail({"erc", k}, "missing");
    }
    c.erc.eps = rd.grid(e["eps"], {"erc", "eps"});
    c.erc.r = rd.grid(e["r"], {"erc", "r"});
    c.erc.s = rd.grid(e["s"], {"erc", "s"});
    if (e.contains("tol")) c.erc.tol = rd.number(e["tol"], {"erc", "tol"});
    if (e.contains("threshold_points")) c.erc.threshold_points = rd.count(e["threshold_points"], {"erc", "threshold_points"});
  }
  if (j.contains("varpi")) c.varpi = rd.number(j["varpi"], {"varpi"});
  if (j.contains("curves")) {
    const auto& cv = j["curves"];
    detail::check_keys(rd, cv, {"curves"}, {"R1", "R2", "R3", "densities"});
    if (cv.contains("R1")) c.curves.R1 = rd.number(cv["R1"], {"curves", "R1"});
    if (cv.contains("R2")) c.curves.R2 = rd.number(cv["R2"], {"curves", "R2"});
    if (cv.contains("R3")) c.curves.R3 = rd.number(cv["R3"], {"curves", "R3"});
    if (cv.contains("densities")) {
      if (!cv["densities"].is_array()) rd.fail({"curves", "densities"}, "expected an array");
      for (const auto& d : cv["densities"]) c.curves.densities.push_back(detail::read_density_spec(rd, d, {"curves", "densities"}));
    }
  }
  if (j.contains("assumptions")) {
    const auto& a = j["assumptions"];
    detail::check_keys(rd, a, {"assumptions"}, {"m", "r_min", "r_max", "n"});
    if (a.contains("m")) c.assumptions.m = rd.number(a["m"], {"assumptions", "m"});
    if (a.contains("r_min")) c.assumptions.r_min = rd.number(a["r_min"], {"assumptions", "r_min"});
    if (a.contains("r_max")) c.assumptions.r_max = rd.number(a["r_max"], {"assumptions", "r_max"});
    if (a.contains("n")) c.assumptions.n = rd.count(a["n"], {"assumptions", "n"});
  }
  if (j.contains("quadrature")) {
    const auto& q = j["quadrature"];
    detail::check_keys(rd, q, {"quadrature"}, {"abs_tol", "rel_tol", "max_refinement_depth"});
    if (q.contains("abs_tol")) c.quad.abs_tol = rd.number(q["abs_tol"], {"quadrature", "abs_tol"});
    if (q.contains("rel_tol")) c.quad.rel_tol = rd.number(q["rel_tol"], {"quadrature", "rel_tol"});
    if (q.contains("max_refinement_depth"))
      c.quad.max_refinement_depth = static_cast<int>(rd.count(q["max_refinement_depth"], {"quadrature", "max_refinement_depth"}));
    try {
      c.quad.validate();
    } catch (const ArgumentError& e) {
      rd.fail({"quadrature"}, e.what());
    }
  }
  if (j.contains("output_dir")) c.output_dir = rd.string(j["output_dir"], {"output_dir"});
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) rd.fail({"seed"}, "expected an integer");
    if (j["seed"].get<long long>() < 0) rd.fail({"seed"}, "must be nonnegative");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("threads")) c.threads = static_cast<int>(rd.count(j["threads"], {"threads"}));

  // command-specific preconditions, checked before any work starts
  auto grid_edge_ok = [&](double r, const std::vector<std::string>& path, const char* what) {
    if (r > c.r_max) rd.fail(path, std::string(what) + " exceeds grid.r_max");
  };
  auto density_ok = [&](const DensitySpec& d, const std::vector<std::string>& path) {
    if (d.type == "disk") grid_edge_ok(d.radius, path, "disk radius");
    if (d.type == "annulus") grid_edge_ok(d.outer, path, "annulus outer radius");
    if (d.type == "random") grid_edge_ok(d.support, path, "random support");
    if (d.type == "bumps") {
      bool any = false;
      for (const auto& b : d.bumps) any = any || b.center - b.width < c.r_max;
      if (!any) rd.fail(path, "all bumps lie outside the grid");
    }
  };
  if (c.command == "simulate") {
    if (!(c.m > 1.0)) rd.fail({"solver", "m"}, "must exceed 1");
    if (!(c.cfl > 0.0 && c.cfl < 1.0)) rd.fail({"solver", "cfl"}, "must lie in (0, 1)");
    if (!(c.dt_max > 0.0)) rd.fail({"solver", "dt_max"}, "must be positive");
    if (!(c.t_end > 0.0)) rd.fail({"solver", "t_end"}, "must be positive");
    if (!(c.R1 > 0.0)) rd.fail({"solver", "R1"}, "must be positive");
    for (const auto& a : c.annuli)
      if (!(a[0] >= 0.0 && a[1] > a[0])) rd.fail({"solver", "annuli"}, "annuli need 0 <= a < b");
    for (double t : c.snapshot_times)
      if (!(t >= 0.0 && t <= c.t_end)) rd.fail({"solver", "snapshot_times"}, "times must lie in [0, t_end]");
    if (!j.contains("initial")) rd.fail({"initial"}, "simulate needs an initial density");
    density_ok(c.initial, {"initial"});
  } else if (c.command == "erc-check") {
    if (!j.contains("erc")) rd.fail({"erc"}, "erc-check needs an 'erc' section");
    ErcScanConfig sc{c.erc.R1, c.erc.eps, c.erc.r, c.erc.s, c.erc.tol};
    try {
      sc.validate();
    } catch (const ArgumentError& e) {
      rd.fail({"erc"}, e.what());
    }
  } else if (c.command == "decompose") {
    if (!(c.varpi > 0.0 && c.varpi < 0.25)) rd.fail({"varpi"}, "must lie in (0, 1/4)");
    if (!j.contains("initial")) rd.fail({"initial"}, "decompose needs a density under 'initial'");
    density_ok(c.initial, {"initial"});
  } else if (c.command == "curve-analyze") {
    if (!(c.varpi > 0.0 && c.varpi < 0.25)) rd.fail({"varpi"}, "must lie in (0, 1/4)");
    if (!(c.m > 1.0)) rd.fail({"solver", "m"}, "must exceed 1");
    if (!(c.curves.R1 > 0.0)) rd.fail({"curves", "R1"}, "must be positive");
    if (!(c.curves.R2 > 4.0 * c.curves.R1)) rd.fail({"curves", "R2"}, "must exceed 4 R1");
    if (!(c.curves.R3 > 0.0)) rd.fail({"curves", "R3"}, "must be positive");
    if (8.0 * c.curves.R1 > c.r_max) rd.fail({"curves", "R1"}, "8 R1 exceeds grid.r_max");
    if (c.curves.densities.empty()) rd.fail({"curves", "densities"}, "needs at least one density");
    for (const auto& d : c.curves.densities) density_ok(d, {"curves", "densities"});
  } else if (c.command == "assumptions") {
    if (!(c.assumptions.m > 0.0)) rd.fail({"assumptions", "m"}, "must be positive");
    if (!(c.assumptions.r_min > 0.0 && c.assumptions.r_max > c.assumptions.r_min))
      rd.fail({"assumptions", "r_max"}, "need 0 < r_min < r_max");
  }

  io::json canon = io::json::parse(text);
  canon.erase("threads");
  canon.erase("output_dir");
  c.run_id = io::hex16(io::fnv1a64(nlohmann::json(canon).dump()));
  return c;
}

inline InteractionPotential make_potential(const ExperimentConfig& c) {
  return InteractionPotential::from_spec(c.potential.family, c.potential.params);
}

// unit-mass density on grid g; stream picks an independent random stream
inline RadialDensity make_density(const DensitySpec& d, const RadialGrid& g, std::uint64_t seed, std::uint64_t stream = 0) {
  if (d.type == "disk") return uniform_disk(g, d.radius);
  if (d.type == "annulus") return uniform_annulus(g, d.inner, d.outer);
  if (d.type == "bumps") return multi_bump(g, d.bumps);
  if (d.type == "random") {
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Bump> b;
    for (int k = 0; k < d.count; ++k)
      b.push_back({u(rng) * d.support, 0.1 * d.support + 0.3 * d.support * u(rng), 0.1 + u(rng)});
    return multi_bump(g, b);
  }
  if (d.type == "csv") {
    RadialDensity rho = io::read_density(d.path);
    if (!(rho.grid == g)) throw ArgumentError(d.path + ": grid differs from the configured grid");
    return rho;
  }
  throw ArgumentError("unknown density type '" + d.type + "'");
}

}  // namespace aggdiff
