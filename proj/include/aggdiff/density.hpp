#pragma once

// Piecewise-constant radial densities on a grid of annular cells, their
// energies and moments, and the layer-cake (h-) representation.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "aggdiff/angular_kernels.hpp"
#include "aggdiff/errors.hpp"
#include "aggdiff/potentials.hpp"

namespace aggdiff {

class RadialGrid {
public:
  RadialGrid() = default;

  explicit RadialGrid(std::vector<double> edges) : edges_(std::move(edges)) {
    if (edges_.size() < 2) throw ArgumentError("RadialGrid: need at least one cell");
    if (edges_.front() != 0.0) throw ArgumentError("RadialGrid: first edge must be 0");
    for (std::size_t i = 1; i < edges_.size(); ++i)
      if (!(edges_[i] > edges_[i - 1]) || !std::isfinite(edges_[i]))
        throw ArgumentError("RadialGrid: edges must be strictly increasing");
    const std::size_t n = edges_.size() - 1;
    centers_.resize(n);
    areas_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      centers_[i] = 0.5 * (edges_[i] + edges_[i + 1]);
      areas_[i] = std::numbers::pi * (edges_[i + 1] * edges_[i + 1] - edges_[i] * edges_[i]);
    }
  }

  static RadialGrid uniform(double r_max, std::size_t n) {
    if (!(r_max > 0.0) || n == 0) throw ArgumentError("RadialGrid::uniform: need r_max > 0 and N >= 1");
    std::vector<double> e(n + 1);
    for (std::size_t i = 0; i <= n; ++i) e[i] = r_max * static_cast<double>(i) / static_cast<double>(n);
    return RadialGrid(std::move(e));
  }

  std::size_t size() const { return centers_.size(); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& centers() const { return centers_; }
  const std::vector<double>& cell_areas() const { return areas_; }
  double r_max() const { return edges_.back(); }
  double width(std::size_t i) const { return edges_[i + 1] - edges_[i]; }
  double min_width() const {
    double w = edges_[1] - edges_[0];
    for (std::size_t i = 1; i + 1 < edges_.size(); ++i) w = std::min(w, edges_[i + 1] - edges_[i]);
    return w;
  }

  // index of the cell containing r (right-closed at r_max)
  std::size_t cell_of(double r) const {
    auto it = std::upper_bound(edges_.begin(), edges_.end(), r);
    std::size_t k = static_cast<std::size_t>(it - edges_.begin());
    if (k == 0) return 0;
    return std::min(k - 1, size() - 1);
  }

  bool operator==(const RadialGrid& o) const { return edges_ == o.edges_; }

private:
  std::vector<double> edges_, centers_, areas_;
};

struct RadialDensity {
  RadialGrid grid;
  std::vector<double> values;

  RadialDensity() = default;
  RadialDensity(RadialGrid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size()) throw ArgumentError("RadialDensity: value count does not match grid");
    for (double x : values)
      if (!(x >= 0.0) || !std::isfinite(x)) throw ArgumentError("RadialDensity: values must be finite and >= 0");
  }
  static RadialDensity zeros(const RadialGrid& g) { return RadialDensity(g, std::vector<double>(g.size(), 0.0)); }

  // value at radius r (cell lookup)
  double at(double r) const { return values[grid.cell_of(r)]; }
};

inline double mass(const RadialDensity& rho) {
  double m = 0.0;
  for (std::size_t i = 0; i < rho.values.size(); ++i) m += rho.values[i] * rho.grid.cell_areas()[i];
  return m;
}

inline double linf(const RadialDensity& rho) {
  double m = 0.0;
  for (double v : rho.values) m = std::max(m, v);
  return m;
}

// mass of rho inside the radial window [a, b]
inline double window_mass(const RadialDensity& rho, double a, double b) {
  const auto& e = rho.grid.edges();
  double m = 0.0;
  for (std::size_t i = 0; i < rho.values.size(); ++i) {
    const double lo = std::max(a, e[i]), hi = std::min(b, e[i + 1]);
    if (hi > lo) m += rho.values[i] * std::numbers::pi * (hi * hi - lo * lo);
  }
  return m;
}

inline double internal_energy(const RadialDensity& rho, double m) {
  if (!(m > 1.0)) throw ArgumentError("internal_energy: m must exceed 1");
  double s = 0.0;
  for (std::size_t i = 0; i < rho.values.size(); ++i)
    s += std::pow(rho.values[i], m) * rho.grid.cell_areas()[i];
  return s / (m - 1.0);
}

// Symmetric matrix M with I[rho] = 1/2 rho^T M rho: cell-center evaluation of
// Phi_W times both cell areas, diagonal cells refined 4x4.
class InteractionMatrix {
public:
  InteractionMatrix(const RadialGrid& g, const InteractionPotential& p, const AngularQuadratureConfig& cfg = {})
      : n_(g.size()), m_(g.size() * g.size()) {
    const auto& c = g.centers();
    const auto& a = g.cell_areas();
    const auto& e = g.edges();
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double v = interaction_kernel_mean(p, c[i], c[j], cfg).value * a[i] * a[j];
        m_[i * n_ + j] = v;
        m_[j * n_ + i] = v;
      }
      constexpr int sub = 4;
      double sc[sub], sa[sub];
      for (int k = 0; k < sub; ++k) {
        const double lo = e[i] + (e[i + 1] - e[i]) * k / sub;
        const double hi = e[i] + (e[i + 1] - e[i]) * (k + 1) / sub;
        sc[k] = 0.5 * (lo + hi);
        sa[k] = std::numbers::pi * (hi * hi - lo * lo);
      }
      double d = 0.0;
      for (int k = 0; k < sub; ++k)
        for (int l = 0; l < sub; ++l) d += interaction_kernel_mean(p, sc[k], sc[l], cfg).value * sa[k] * sa[l];
      m_[i * n_ + i] = d;
    }
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return m_[i * n_ + j]; }

  double energy(const std::vector<double>& v) const {
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (v[i] == 0.0) continue;
      const double* row = &m_[i * n_];
      double acc = 0.0;
      for (std::size_t j = 0; j < n_; ++j) acc += row[j] * v[j];
      total += v[i] * acc;
    }
    return 0.5 * total;
  }

  double bilinear(const std::vector<double>& u, const std::vector<double>& v) const {
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double* row = &m_[i * n_];
      double acc = 0.0;
      for (std::size_t j = 0; j < n_; ++j) acc += row[j] * v[j];
      total += u[i] * acc;
    }
    return total;
  }

private:
  std::size_t n_;
  std::vector<double> m_;
};

inline double interaction_energy(const RadialDensity& rho, const InteractionMatrix& M) {
  return M.energy(rho.values);
}

inline double interaction_energy(const RadialDensity& rho, const InteractionPotential& p,
                                 const AngularQuadratureConfig& cfg = {}) {
  return InteractionMatrix(rho.grid, p, cfg).energy(rho.values);
}

// ---------------------------------------------------------------------------
// h-representation

enum class IntervalClass { Core, Sharp, Flat, Unclassified };

struct LevelInterval {
  double r_lo = 0.0;  // r_j
  double r_hi = 0.0;  // R_j
  std::size_t first_cell = 0;
  std::size_t last_cell = 0;  // inclusive
  bool contains_zero = false;
  IntervalClass cls = IntervalClass::Unclassified;
};

// all h in (h_lo, h_hi] share the same level set {rho >= h}
struct LevelBand {
  double h_lo = 0.0;
  double h_hi = 0.0;
  std::vector<LevelInterval> intervals;
  double thickness() const { return h_hi - h_lo; }
};

struct LevelDecomposition {
  RadialGrid grid;
  std::vector<double> levels;  // distinct positive values, ascending
  std::vector<LevelBand> bands;
};

inline LevelDecomposition level_decompose(const RadialDensity& rho) {
  LevelDecomposition dec;
  dec.grid = rho.grid;
  std::vector<double> lv;
  for (double v : rho.values)
    if (v > 0.0) lv.push_back(v);
  std::sort(lv.begin(), lv.end());
  lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
  dec.levels = lv;
  const auto& e = rho.grid.edges();
  double prev = 0.0;
  for (double h : lv) {
    LevelBand band;
    band.h_lo = prev;
    band.h_hi = h;
    std::size_t i = 0;
    const std::size_t n = rho.values.size();
    while (i < n) {
      if (rho.values[i] >= h) {
        std::size_t j = i;
        while (j + 1 < n && rho.values[j + 1] >= h) ++j;
        LevelInterval I;
        I.r_lo = e[i];
        I.r_hi = e[j + 1];
        I.first_cell = i;
        I.last_cell = j;
        I.contains_zero = (i == 0);
        band.intervals.push_back(I);
        i = j + 1;
      } else {
        ++i;
      }
    }
    dec.bands.push_back(std::move(band));
    prev = h;
  }
  return dec;
}

// rho rebuilt from the layer cake
inline RadialDensity reconstruct(const LevelDecomposition& dec) {
  std::vector<double> v(dec.grid.size(), 0.0);
  for (const auto& b : dec.bands)
    for (const auto& I : b.intervals)
      for (std::size_t c = I.first_cell; c <= I.last_cell; ++c) v[c] += b.thickness();
  return RadialDensity(dec.grid, std::move(v));
}

struct SharpFlatSplit {
  double varpi = 0.0;
  RadialDensity rho_star;
  RadialDensity mu_sharp;
  RadialDensity mu_flat;
  LevelDecomposition decomposition;  // intervals carry their class
  double total_mass = 0.0;
};

inline SharpFlatSplit sharp_flat_split(const LevelDecomposition& dec, double varpi) {
  if (!(varpi > 0.0 && varpi < 0.25)) throw ArgumentError("sharp_flat_split: varpi must lie in (0, 1/4)");
  SharpFlatSplit sp;
  sp.varpi = varpi;
  sp.decomposition = dec;
  const std::size_t n = dec.grid.size();
  std::vector<double> star(n, 0.0), sharp(n, 0.0), flat(n, 0.0);
  for (auto& b : sp.decomposition.bands) {
    for (auto& I : b.intervals) {
      std::vector<double>* target;
      if (I.contains_zero) {
        I.cls = IntervalClass::Core;
        target = &star;
      } else if (I.r_lo >= varpi * I.r_hi) {
        I.cls = IntervalClass::Sharp;
        target = &sharp;
      } else {
        I.cls = IntervalClass::Flat;
        target = &flat;
      }
      for (std::size_t c = I.first_cell; c <= I.last_cell; ++c) (*target)[c] += b.thickness();
    }
  }
  sp.rho_star = RadialDensity(dec.grid, std::move(star));
  sp.mu_sharp = RadialDensity(dec.grid, std::move(sharp));
  sp.mu_flat = RadialDensity(dec.grid, std::move(flat));
  sp.total_mass = mass(sp.rho_star) + mass(sp.mu_sharp) + mass(sp.mu_flat);
  return sp;
}

struct DecayBoundResult {
  bool holds = true;
  double worst_ratio = 0.0;  // max over cells of (rho* + mu_flat)(r) / bound(r)
};

// (rho* + mu_flat)(r) <= M / (pi (1 - varpi^2) r^2) at every cell center
inline DecayBoundResult decay_bound_details(const SharpFlatSplit& sp) {
  DecayBoundResult res;
  const auto& c = sp.rho_star.grid.centers();
  const double M = sp.total_mass;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double lhs = sp.rho_star.values[i] + sp.mu_flat.values[i];
    if (lhs == 0.0) continue;
    const double bound = M / (std::numbers::pi * (1.0 - sp.varpi * sp.varpi) * c[i] * c[i]);
    res.worst_ratio = std::max(res.worst_ratio, lhs / bound);
    if (lhs > bound * (1.0 + 1e-12)) res.holds = false;
  }
  return res;
}

inline bool decay_bound_check(const SharpFlatSplit& sp) { return decay_bound_details(sp).holds; }

// Sharp intervals with r_j < R2 < R_j are cut in two at R2; both halves stay sharp.
inline LevelDecomposition split_intervals_at(const LevelDecomposition& dec, double R2) {
  if (!(R2 > 0.0)) throw ArgumentError("split_intervals_at: R2 must be positive");
  LevelDecomposition out = dec;
  for (auto& b : out.bands) {
    std::vector<LevelInterval> next;
    for (const auto& I : b.intervals) {
      if (I.cls == IntervalClass::Sharp && I.r_lo < R2 && R2 < I.r_hi) {
        const std::size_t mid = dec.grid.cell_of(R2);
        LevelInterval a = I, c = I;
        a.r_hi = R2;
        a.last_cell = mid;
        c.r_lo = R2;
        c.first_cell = mid;
        next.push_back(a);
        next.push_back(c);
      } else {
        next.push_back(I);
      }
    }
    b.intervals = std::move(next);
  }
  return out;
}

// Largest |x2| <= r_j for which the slice midpoint
// (sqrt(r_j^2 - x2^2) + sqrt(R_j^2 - x2^2))/2 is still >= R1; -1 when even
// x2 = 0 falls short.
inline double r_star(double r_j, double R_j, double R1) {
  if (!(r_j >= 0.0 && R_j > r_j)) throw ArgumentError("r_star: need 0 <= r_j < R_j");
  auto mid = [&](double x) {
    return 0.5 * (std::sqrt(std::max(0.0, r_j * r_j - x * x)) + std::sqrt(R_j * R_j - x * x));
  };
  if (0.5 * (r_j + R_j) < R1) return -1.0;
  if (mid(r_j) >= R1) return r_j;
  double lo = 0.0, hi = r_j;  // mid(lo) >= R1 > mid(hi)
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + r_j); ++it) {
    const double x = 0.5 * (lo + hi);
    if (mid(x) >= R1) lo = x;
    else hi = x;
  }
  return lo;
}

inline double r_star(const LevelInterval& I, double R1, double R2) {
  if (I.r_hi > R2 * (1.0 + 1e-14)) throw ArgumentError("r_star: interval must lie in (0, R2]");
  return r_star(I.r_lo, I.r_hi, R1);
}

// ---------------------------------------------------------------------------
// test function phi = 1_{7R1 <= |x| <= 8R1} * ln|x| / 2pi, radial form

inline double phi_value(double R1, double r) {
  if (!(R1 > 0.0)) throw ArgumentError("phi_value: R1 must be positive");
  if (!(r >= 0.0)) throw DomainError("phi_value: r must be nonnegative");
  const double a = 7.0 * R1, b = 8.0 * R1;
  // int s ln s ds
  auto G = [](double s) { return 0.5 * s * s * std::log(s) - 0.25 * s * s; };
  if (r <= a) return G(b) - G(a);
  if (r >= b) return 0.5 * (b * b - a * a) * std::log(r);
  return 0.5 * (r * r - a * a) * std::log(r) + G(b) - G(r);
}

inline double phi_derivative(double R1, double r) {
  const double a = 7.0 * R1, b = 8.0 * R1;
  if (r <= a) return 0.0;
  if (r >= b) return 0.5 * (b * b - a * a) / r;
  return 0.5 * (r * r - a * a) / r;
}

inline double phi_moment(const RadialDensity& rho, double R1) {
  double m = 0.0;
  for (std::size_t i = 0; i < rho.values.size(); ++i)
    if (rho.values[i] != 0.0) m += rho.values[i] * phi_value(R1, rho.grid.centers()[i]) * rho.grid.cell_areas()[i];
  return m;
}

inline double log_moment(const RadialDensity& rho) {
  double m = 0.0;
  for (std::size_t i = 0; i < rho.values.size(); ++i)
    m += rho.values[i] * std::log1p(rho.grid.centers()[i]) * rho.grid.cell_areas()[i];
  return m;
}

// ---------------------------------------------------------------------------
// 1D nonincreasing rearrangement in the radial variable

struct Staircase {
  std::vector<double> breaks;  // size n+1, ascending
  std::vector<double> values;  // size n

  double a() const { return breaks.front(); }
  double b() const { return breaks.back(); }
  double at(double x) const {
    auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
    std::size_t k = static_cast<std::size_t>(it - breaks.begin());
    if (k == 0) return values.front();
    return values[std::min(k - 1, values.size() - 1)];
  }
  // int_lo^hi f(x)^p dx (p = 1 for plain integral)
  double integral_pow(double lo, double hi, double p = 1.0) const {
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double l = std::max(lo, breaks[k]), h = std::min(hi, breaks[k + 1]);
      if (h > l) s += (p == 1.0 ? values[k] : std::pow(values[k], p)) * (h - l);
    }
    return s;
  }
  // int_lo^hi (x - r) f(x) dx
  double integral_moment(double lo, double hi, double r) const {
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double l = std::max(lo, breaks[k]), h = std::min(hi, breaks[k + 1]);
      if (h > l) s += values[k] * 0.5 * ((h - r) * (h - r) - (l - r) * (l - r));
    }
    return s;
  }
};

inline Staircase rearrangement_staircase(const RadialDensity& rho, double a, double b) {
  if (!(a >= 0.0 && b > a && b <= rho.grid.r_max() * (1.0 + 1e-14)))
    throw ArgumentError("nonincreasing_rearrangement: [a, b] must lie within the grid");
  const auto& e = rho.grid.edges();
  struct Piece {
    double value, length;
    std::size_t order;
  };
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < rho.values.size(); ++i) {
    const double lo = std::max(a, e[i]), hi = std::min(b, e[i + 1]);
    if (hi > lo) pieces.push_back({rho.values[i], hi - lo, i});
  }
  std::stable_sort(pieces.begin(), pieces.end(), [](const Piece& x, const Piece& y) { return x.value > y.value; });
  Staircase st;
  st.breaks.push_back(a);
  double x = a;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    x = (k + 1 == pieces.size()) ? b : x + pieces[k].length;
    st.breaks.push_back(x);
    st.values.push_back(pieces[k].value);
  }
  return st;
}

// rearranged profile projected back onto the grid (cell averages on [a, b])
inline RadialDensity nonincreasing_rearrangement(const RadialDensity& rho, double a, double b) {
  Staircase st = rearrangement_staircase(rho, a, b);
  std::vector<double> v = rho.values;
  const auto& e = rho.grid.edges();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double lo = std::max(a, e[i]), hi = std::min(b, e[i + 1]);
    if (!(hi > lo)) continue;
    const double inside = st.integral_pow(lo, hi);
    const double outside_len = (e[i + 1] - e[i]) - (hi - lo);
    v[i] = (inside + rho.values[i] * outside_len) / (e[i + 1] - e[i]);
  }
  return RadialDensity(rho.grid, std::move(v));
}

}  // namespace aggdiff
