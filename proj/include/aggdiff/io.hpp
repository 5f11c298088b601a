#pragma once

// CSV and JSON serialization of densities, time series and reports.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aggdiff/curves.hpp"
#include "aggdiff/erc.hpp"
#include "aggdiff/solver.hpp"

namespace aggdiff::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "# schema=v1";

// shortest round-trip decimal
inline std::string num(double x) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// densities

inline std::string density_csv(const RadialDensity& rho) {
  std::string out = std::string(kSchema) + "\nr_center,value\n";
  for (std::size_t i = 0; i < rho.values.size(); ++i)
    out += num(rho.grid.centers()[i]) + "," + num(rho.values[i]) + "\n";
  return out;
}

inline json density_header(const RadialDensity& rho) {
  json j;
  j["schema"] = "v1";
  j["edges"] = rho.grid.edges();
  j["mass"] = mass(rho);
  return j;
}

// writes <stem>.csv and <stem>.json
inline void write_density(const std::string& stem, const RadialDensity& rho) {
  write_text(stem + ".csv", density_csv(rho));
  write_text(stem + ".json", density_header(rho).dump(2) + "\n");
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ArgumentError(where + ": '" + s + "' is not a number");
  }
  while (used < s.size() && (s[used] == ' ' || s[used] == '\t')) ++used;
  if (used != s.size()) throw ArgumentError(where + ": '" + s + "' is not a number");
  return v;
}

}  // namespace detail

// reads the CSV values and the edges from the JSON header next to it
inline RadialDensity read_density(const std::string& stem) {
  const json h = json::parse(read_text(stem + ".json"));
  if (!h.contains("edges")) throw ArgumentError(stem + ".json: missing 'edges'");
  RadialGrid g(h["edges"].get<std::vector<double>>());
  const auto lines = detail::split(read_text(stem + ".csv"), '\n');
  std::vector<double> v;
  bool header = false;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::string& ln = lines[k];
    const std::string where = stem + ".csv:" + std::to_string(k + 1);
    if (ln.empty() || ln[0] == '#') continue;
    if (!header) {
      if (ln != "r_center,value") throw ArgumentError(where + ": expected header 'r_center,value'");
      header = true;
      continue;
    }
    const auto f = detail::split(ln, ',');
    if (f.size() != 2) throw ArgumentError(where + ": expected two fields");
    v.push_back(detail::parse_number(f[1], where));
  }
  if (v.size() != g.size())
    throw ArgumentError(stem + ": " + std::to_string(v.size()) + " values for " + std::to_string(g.size()) + " cells");
  return RadialDensity(g, std::move(v));
}

// ---------------------------------------------------------------------------
// solver output

inline std::string timeseries_csv(const TimeSeries& ts, std::size_t n_annuli) {
  std::string out = std::string(kSchema) + "\n";
  out += "t,step,mass,E,S,I,linf,phi_moment,log_moment,center_mass,D,dE_dt_fd,edge_mass";
  for (std::size_t a = 0; a < n_annuli; ++a)
    out += ",annulus_mass_" + std::to_string(a) + ",annulus_integral_" + std::to_string(a);
  out += "\n";
  for (const auto& s : ts.samples) {
    out += num(s.t) + "," + std::to_string(s.step) + "," + num(s.mass) + "," + num(s.E) + "," + num(s.S) + "," +
           num(s.I) + "," + num(s.linf) + "," + num(s.phi_moment) + "," + num(s.log_moment) + "," +
           num(s.center_mass) + "," + num(s.D) + "," + num(s.dE_dt_fd) + "," + num(s.edge_mass);
    for (std::size_t a = 0; a < n_annuli; ++a) out += "," + num(s.annulus_masses[a]) + "," + num(s.annulus_integrals[a]);
    out += "\n";
  }
  return out;
}

inline json timeseries_summary(const TimeSeries& ts) {
  json j;
  j["steps"] = ts.steps;
  j["aborted"] = ts.aborted;
  if (ts.aborted) j["abort_reason"] = ts.abort_reason;
  j["truncation_flag"] = ts.truncation_flag;
  j["max_edge_mass"] = ts.max_edge_mass;
  j["E_minus"] = ts.E_minus;
  j["max_linf"] = ts.max_linf;
  j["annulus_integrals"] = ts.annulus_integrals;
  if (!ts.samples.empty()) {
    const auto& f = ts.samples.back();
    const auto& s0 = ts.samples.front();
    j["final"] = {{"t", f.t},         {"mass", f.mass},           {"E", f.E},
                  {"S", f.S},         {"I", f.I},                 {"linf", f.linf},
                  {"phi_moment", f.phi_moment}, {"log_moment", f.log_moment}, {"center_mass", f.center_mass},
                  {"D", f.D}};
    double min_center = s0.center_mass, max_log = s0.log_moment;
    for (const auto& s : ts.samples) {
      min_center = std::min(min_center, s.center_mass);
      max_log = std::max(max_log, s.log_moment);
    }
    j["mass_drift"] = f.mass - s0.mass;
    j["min_center_mass"] = min_center;
    j["max_log_moment"] = max_log;
  }
  return j;
}

// ---------------------------------------------------------------------------
// reports

inline json to_json(const CurveReport& r) {
  json j;
  j["kind"] = curve_name(r.kind);
  j["dI_dt"] = r.dI_dt;
  j["dS_dt"] = r.dS_dt;
  j["dE_dt"] = r.dE_dt;
  j["cost_bound"] = r.cost_bound;
  j["moving_mass"] = r.moving_mass;
  j["numerical_error"] = r.numerical_error;
  if (r.kind == CurveKind::LocalClustering) j["boundary_delta"] = r.boundary_delta;
  json p = json::object();
  for (const auto& [k, v] : r.params) p[k] = v;
  j["params"] = p;
  return j;
}

inline json to_json(const AssumptionReport& r) {
  json j;
  j["m"] = r.m;
  j["alpha_hat"] = r.alpha_hat;
  j["A_hat"] = r.A_hat;
  j["a2_const"] = r.a2_const;
  j["attractive"] = r.attractive;
  j["pass_a1"] = r.pass_a1;
  j["pass_a2"] = r.pass_a2;
  j["pass_a3"] = r.pass_a3;
  j["alpha_boundary_case"] = r.alpha_boundary_case;
  j["grid_min"] = r.grid.front();
  j["grid_max"] = r.grid.back();
  j["grid_size"] = r.grid.size();
  return j;
}

inline std::string erc_csv(const std::vector<ErcSample>& s) {
  std::string out = std::string(kSchema) + "\neps,r,s,F\n";
  for (const auto& x : s) out += num(x.eps) + "," + num(x.r) + "," + num(x.s) + "," + num(x.F) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// run ids

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace aggdiff::io
