#pragma once

// Adaptive Gauss-Kronrod (7/15) with global error control.
//
// Intervals are refined worst-first; ties resolve to the older interval so the
// refinement sequence, and hence the result, is a pure function of the inputs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "aggdiff/errors.hpp"

namespace aggdiff {

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_depth = 30;
  int max_intervals = 4000;
  bool throw_on_failure = true;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;  // integral of |f|, used for the round-off floor
  int evaluations = 0;
  bool converged = true;
};

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// gauss weights for the odd kronrod nodes 1,3,5 and the center
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value, error, l1;
  int depth;
  bool frozen;
};

template <class F>
Segment gk15(F& f, double a, double b, int depth) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double rk = fc * kWgk[7];
  double rg = fc * kWg[3];
  double l1 = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    rk += kWgk[j] * (f1 + f2);
    l1 += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) rg += kWg[j / 2] * (f1 + f2);
  }
  Segment s{a, b, rk * h, std::abs((rk - rg) * h), l1 * std::abs(h), depth, false};
  // round-off floor: nothing left to gain from splitting
  if (s.error <= 50.0 * std::numeric_limits<double>::epsilon() * s.l1) s.frozen = true;
  return s;
}

}  // namespace detail

// Integrate f over the consecutive pieces [pts[0],pts[1]], [pts[1],pts[2]], ...
template <class F>
QuadResult integrate_pieces(F&& f, const std::vector<double>& pts, const QuadOptions& opt = {}) {
  QuadResult res;
  if (pts.size() < 2) return res;
  std::vector<detail::Segment> segs;
  segs.reserve(64);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] == pts[i]) continue;
    segs.push_back(detail::gk15(f, pts[i], pts[i + 1], 0));
    res.evaluations += 15;
  }
  auto totals = [&](double& v, double& e, double& l1) {
    v = e = l1 = 0.0;
    for (const auto& s : segs) {
      v += s.value;
      e += s.error;
      l1 += s.l1;
    }
  };
  double v, e, l1;
  totals(v, e, l1);
  while (true) {
    const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(v));
    if (e <= target) break;
    std::size_t worst = segs.size();
    double worst_err = -1.0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      if (segs[i].frozen || segs[i].depth >= opt.max_depth) continue;
      if (segs[i].error > worst_err) {
        worst_err = segs[i].error;
        worst = i;
      }
    }
    // everything left is at round-off level or too deep
    if (worst == segs.size()) {
      double stuck = 0.0;
      for (const auto& s : segs)
        if (!s.frozen) stuck += s.error;
      if (stuck > target) res.converged = false;
      break;
    }
    if (static_cast<int>(segs.size()) >= opt.max_intervals) {
      res.converged = false;
      break;
    }
    const detail::Segment old = segs[worst];
    const double mid = 0.5 * (old.a + old.b);
    segs[worst] = detail::gk15(f, old.a, mid, old.depth + 1);
    segs.push_back(detail::gk15(f, mid, old.b, old.depth + 1));
    res.evaluations += 30;
    v += segs[worst].value + segs.back().value - old.value;
    e += segs[worst].error + segs.back().error - old.error;
    l1 += segs[worst].l1 + segs.back().l1 - old.l1;
  }
  // re-sum in segment order so the value does not carry incremental drift
  totals(v, e, l1);
  res.value = v;
  res.error = e;
  res.l1 = l1;
  if (!res.converged && opt.throw_on_failure)
    throw AccuracyError("adaptive quadrature did not converge", v, e);
  return res;
}

template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  return integrate_pieces(f, std::vector<double>{a, b}, opt);
}

}  // namespace aggdiff
