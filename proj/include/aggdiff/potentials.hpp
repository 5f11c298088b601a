#pragma once

// Radial interaction potentials W(r) with analytic W, W', W''.
//
// Normalization: W(1) = 0 when lim W = +inf, lim W = 0 otherwise.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "aggdiff/errors.hpp"

namespace aggdiff {

enum class PotentialFamily { PowerLawForce, WeaklyConfining, LogNewtonian, UserTabulated };

inline std::string family_name(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::PowerLawForce: return "PowerLawForce";
    case PotentialFamily::WeaklyConfining: return "WeaklyConfining";
    case PotentialFamily::LogNewtonian: return "LogNewtonian";
    case PotentialFamily::UserTabulated: return "UserTabulated";
  }
  return "?";
}

class InteractionPotential {
public:
  // defaults to the logarithmic (Newtonian) potential
  InteractionPotential() : family_(PotentialFamily::LogNewtonian) {}

  // W'(r) = r^-alpha
  static InteractionPotential power_law_force(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw ArgumentError("PowerLawForce: alpha must be positive");
    InteractionPotential p(PotentialFamily::PowerLawForce, {alpha});
    p.w_limit_ = alpha > 1.0 ? 0.0 : kInf;
    return p;
  }

  // W'(r) = r^-1 (1+r)^-(2-eps0)
  static InteractionPotential weakly_confining(double eps0) {
    if (!(eps0 > 0.0 && eps0 < 2.0))
      throw ArgumentError("WeaklyConfining: eps0 must lie in (0, 2)");
    InteractionPotential p(PotentialFamily::WeaklyConfining, {eps0});
    p.w_limit_ = 0.0;
    const double q = 2.0 - eps0;
    p.digamma_shift_ = boost::math::digamma(q) + boost::math::constants::euler<double>();
    return p;
  }

  static InteractionPotential log_newtonian() {
    InteractionPotential p(PotentialFamily::LogNewtonian, {});
    p.w_limit_ = kInf;
    return p;
  }

  // W' given at nodes r[k] > 0; monotone cubic in between, c/r below the
  // table, power-law tail above it fitted to the last segment.
  static InteractionPotential user_tabulated(std::vector<double> r, std::vector<double> w1) {
    if (r.size() < 2 || r.size() != w1.size())
      throw ArgumentError("UserTabulated: need at least two (r, W') pairs");
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (!(r[k] > 0.0) || (k > 0 && !(r[k] > r[k - 1])))
        throw ArgumentError("UserTabulated: radii must be positive and strictly increasing");
      if (!(w1[k] > 0.0)) throw ArgumentError("UserTabulated: W' must be positive (attractive)");
    }
    std::vector<double> params;
    for (std::size_t k = 0; k < r.size(); ++k) {
      params.push_back(r[k]);
      params.push_back(w1[k]);
    }
    InteractionPotential p(PotentialFamily::UserTabulated, params);
    p.build_table(std::move(r), std::move(w1));
    return p;
  }

  static InteractionPotential from_spec(const std::string& family, const std::vector<double>& params) {
    auto need = [&](std::size_t n) {
      if (params.size() != n)
        throw ArgumentError(family + ": expected " + std::to_string(n) + " parameter(s), got " +
                            std::to_string(params.size()));
    };
    if (family == "PowerLawForce") {
      need(1);
      return power_law_force(params[0]);
    }
    if (family == "WeaklyConfining") {
      need(1);
      return weakly_confining(params[0]);
    }
    if (family == "LogNewtonian") {
      need(0);
      return log_newtonian();
    }
    if (family == "UserTabulated") {
      if (params.size() < 4 || params.size() % 2 != 0)
        throw ArgumentError("UserTabulated: params must be flattened (r, W') pairs, at least two");
      std::vector<double> r, w1;
      for (std::size_t k = 0; k < params.size(); k += 2) {
        r.push_back(params[k]);
        w1.push_back(params[k + 1]);
      }
      return user_tabulated(r, w1);
    }
    throw ArgumentError("unknown potential family '" + family + "'");
  }

  PotentialFamily family() const { return family_; }
  const std::vector<double>& params() const { return params_; }
  double w_limit() const { return w_limit_; }
  bool confining_limit_finite() const { return std::isfinite(w_limit_); }

  // unchecked evaluation, r > 0 assumed
  double w(double r) const {
    switch (family_) {
      case PotentialFamily::LogNewtonian: return std::log(r);
      case PotentialFamily::PowerLawForce: {
        const double a = params_[0];
        if (a == 1.0) return std::log(r);
        if (a > 1.0) return std::pow(r, 1.0 - a) / (1.0 - a);
        return (std::pow(r, 1.0 - a) - 1.0) / (1.0 - a);
      }
      case PotentialFamily::WeaklyConfining: return weakly_w(r);
      case PotentialFamily::UserTabulated: return table_w(r);
    }
    return 0.0;
  }

  double w1(double r) const {
    switch (family_) {
      case PotentialFamily::LogNewtonian: return 1.0 / r;
      case PotentialFamily::PowerLawForce: return std::pow(r, -params_[0]);
      case PotentialFamily::WeaklyConfining: return std::pow(1.0 + r, -(2.0 - params_[0])) / r;
      case PotentialFamily::UserTabulated: return table_w1(r);
    }
    return 0.0;
  }

  double w2(double r) const {
    switch (family_) {
      case PotentialFamily::LogNewtonian: return -1.0 / (r * r);
      case PotentialFamily::PowerLawForce: {
        const double a = params_[0];
        return -a * std::pow(r, -a - 1.0);
      }
      case PotentialFamily::WeaklyConfining: {
        const double q = 2.0 - params_[0];
        const double t = std::pow(1.0 + r, -q);
        return -t / (r * r) - q * t / (r * (1.0 + r));
      }
      case PotentialFamily::UserTabulated: return table_w2(r);
    }
    return 0.0;
  }

private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  InteractionPotential(PotentialFamily f, std::vector<double> params)
      : family_(f), params_(std::move(params)) {}

  // W(r) = -int_r^inf W'. With x = 1/(1+r) this is -int_0^x t^(q-1)/(1-t) dt.
  double weakly_w(double r) const {
    const double q = 2.0 - params_[0];
    const double x = 1.0 / (1.0 + r);
    if (x <= 0.5) {
      // sum_k x^(q+k)/(q+k)
      double term = std::pow(x, q);
      double sum = 0.0;
      for (int k = 0; k < 200; ++k) {
        const double add = term / (q + k);
        sum += add;
        if (add < 1e-17 * sum) break;
        term *= x;
      }
      return -sum;
    }
    // small r: split off the log singularity and expand around t = 1 in y = 1-t
    const double y = r / (1.0 + r);
    const double a = q - 1.0;
    double binom = 1.0;  // C(a, k)
    double ypow = 1.0;
    double series = 0.0;
    for (int k = 1; k < 400; ++k) {
      binom *= (a - k + 1.0) / k;
      ypow *= -y;
      const double add = binom * ypow / k;
      series += add;
      if (std::abs(add) < 1e-18 * (1.0 + std::abs(series))) break;
    }
    const double integral = -std::log(y) - digamma_shift_ - series;
    return -integral;
  }

  void build_table(std::vector<double> r, std::vector<double> y) {
    tr_ = std::move(r);
    ty_ = std::move(y);
    const std::size_t n = tr_.size();
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = tr_[k + 1] - tr_[k];
      del[k] = (ty_[k + 1] - ty_[k]) / h[k];
    }
    // Fritsch-Carlson slopes (pchip)
    td_.assign(n, 0.0);
    if (n == 2) {
      td_[0] = td_[1] = del[0];
    } else {
      for (std::size_t k = 1; k + 1 < n; ++k) {
        if (del[k - 1] * del[k] <= 0.0) {
          td_[k] = 0.0;
        } else {
          const double w1 = 2.0 * h[k] + h[k - 1];
          const double w2 = h[k] + 2.0 * h[k - 1];
          td_[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
      }
      auto edge = [](double h0, double h1, double d0, double d1) {
        double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d * d0 <= 0.0) d = 0.0;
        else if (d0 * d1 <= 0.0 && std::abs(d) > std::abs(3.0 * d0)) d = 3.0 * d0;
        return d;
      };
      td_[0] = edge(h[0], h[1], del[0], del[1]);
      td_[n - 1] = edge(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    }
    // cumulative integrals of the interpolant from tr_[0]
    tcum_.assign(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k)
      tcum_[k + 1] = tcum_[k] + h[k] * (ty_[k] + ty_[k + 1]) / 2.0 + h[k] * h[k] * (td_[k] - td_[k + 1]) / 12.0;
    tail_q_ = -std::log(ty_[n - 1] / ty_[n - 2]) / std::log(tr_[n - 1] / tr_[n - 2]);
    shift_ = 0.0;
    if (tail_q_ > 1.0) {
      w_limit_ = 0.0;
      shift_ = -(raw_w(tr_[n - 1]) + ty_[n - 1] * tr_[n - 1] / (tail_q_ - 1.0));
    } else {
      w_limit_ = kInf;
      shift_ = -raw_w(1.0);
    }
  }

  std::size_t segment(double r) const {
    auto it = std::upper_bound(tr_.begin(), tr_.end(), r);
    std::size_t k = static_cast<std::size_t>(it - tr_.begin());
    return std::min(k - 1, tr_.size() - 2);
  }

  // antiderivative of the interpolant measured from tr_[0]
  double raw_w(double r) const {
    const std::size_t n = tr_.size();
    if (r < tr_[0]) return ty_[0] * tr_[0] * std::log(r / tr_[0]);
    if (r > tr_[n - 1]) {
      const double base = tcum_[n - 1];
      const double c = ty_[n - 1] * std::pow(tr_[n - 1], tail_q_);
      if (std::abs(tail_q_ - 1.0) < 1e-14) return base + c * std::log(r / tr_[n - 1]);
      return base + c * (std::pow(r, 1.0 - tail_q_) - std::pow(tr_[n - 1], 1.0 - tail_q_)) / (1.0 - tail_q_);
    }
    const std::size_t k = segment(r);
    const double h = tr_[k + 1] - tr_[k];
    const double t = (r - tr_[k]) / h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    const double H00 = t - t3 + t4 / 2.0;
    const double H10 = t2 / 2.0 - 2.0 * t3 / 3.0 + t4 / 4.0;
    const double H01 = t3 - t4 / 2.0;
    const double H11 = -t3 / 3.0 + t4 / 4.0;
    return tcum_[k] + h * (H00 * ty_[k] + h * H10 * td_[k] + H01 * ty_[k + 1] + h * H11 * td_[k + 1]);
  }

  double table_w(double r) const { return raw_w(r) + shift_; }

  double table_w1(double r) const {
    const std::size_t n = tr_.size();
    if (r < tr_[0]) return ty_[0] * tr_[0] / r;
    if (r > tr_[n - 1]) return ty_[n - 1] * std::pow(tr_[n - 1] / r, tail_q_);
    const std::size_t k = segment(r);
    const double h = tr_[k + 1] - tr_[k];
    const double t = (r - tr_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * ty_[k] + (t3 - 2 * t2 + t) * h * td_[k] + (-2 * t3 + 3 * t2) * ty_[k + 1] +
           (t3 - t2) * h * td_[k + 1];
  }

  double table_w2(double r) const {
    const std::size_t n = tr_.size();
    if (r < tr_[0]) return -ty_[0] * tr_[0] / (r * r);
    if (r > tr_[n - 1]) return -tail_q_ * table_w1(r) / r;
    const std::size_t k = segment(r);
    const double h = tr_[k + 1] - tr_[k];
    const double t = (r - tr_[k]) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * ty_[k] + (3 * t2 - 4 * t + 1) * h * td_[k] + (-6 * t2 + 6 * t) * ty_[k + 1] +
            (3 * t2 - 2 * t) * h * td_[k + 1]) /
           h;
  }

  PotentialFamily family_;
  std::vector<double> params_;
  double w_limit_ = kInf;
  double digamma_shift_ = 0.0;
  std::vector<double> tr_, ty_, td_, tcum_;
  double tail_q_ = 1.0;
  double shift_ = 0.0;
};

inline void require_positive_radius(double r, const char* what) {
  if (!(r > 0.0)) throw DomainError(std::string(what) + ": r must be positive");
}

inline double eval_w(const InteractionPotential& p, double r) {
  require_positive_radius(r, "eval_w");
  return p.w(r);
}
inline double eval_w1(const InteractionPotential& p, double r) {
  require_positive_radius(r, "eval_w1");
  return p.w1(r);
}
inline double eval_w2(const InteractionPotential& p, double r) {
  require_positive_radius(r, "eval_w2");
  return p.w2(r);
}

struct AssumptionReport {
  double alpha_hat = 0.0;  // sup of -r W''/W'
  double A_hat = 0.0;      // sup of  r W''/W'
  double a2_const = 0.0;   // sup of  r W'
  bool attractive = true;  // W' > 0 on the grid
  bool pass_a1 = false;
  bool pass_a2 = false;
  bool pass_a3 = false;
  // alpha_hat <= 1: the power-decay condition then holds for every alpha slightly above 1, which
  // is outside the strict 1 < alpha range the theory is stated for
  bool alpha_boundary_case = false;
  double m = 0.0;
  std::vector<double> grid;
};

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

inline AssumptionReport check_assumptions(const InteractionPotential& p, double m, const std::vector<double>& r_grid) {
  if (r_grid.empty()) throw ArgumentError("check_assumptions: empty r grid");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0.0)) throw ArgumentError("check_assumptions: grid must be strictly positive");
    if (i > 0 && !(r_grid[i] > r_grid[i - 1])) throw ArgumentError("check_assumptions: grid must be sorted");
  }
  AssumptionReport rep;
  rep.m = m;
  rep.grid = r_grid;
  rep.alpha_hat = -std::numeric_limits<double>::infinity();
  rep.A_hat = -std::numeric_limits<double>::infinity();
  for (double r : r_grid) {
    const double d1 = p.w1(r);
    if (!(d1 > 0.0)) rep.attractive = false;
    const double ratio = r * p.w2(r) / d1;
    rep.alpha_hat = std::max(rep.alpha_hat, -ratio);
    rep.A_hat = std::max(rep.A_hat, ratio);
    rep.a2_const = std::max(rep.a2_const, r * d1);
  }
  // secant log-slopes keep the products monotone between neighbouring grid
  // points even where W'' jumps (tabulated forces)
  for (std::size_t i = 0; i + 1 < r_grid.size(); ++i) {
    const double a = p.w1(r_grid[i]), b = p.w1(r_grid[i + 1]);
    if (!(a > 0.0 && b > 0.0)) continue;
    const double s = std::log(b / a) / std::log(r_grid[i + 1] / r_grid[i]);
    rep.alpha_hat = std::max(rep.alpha_hat, -s);
    rep.A_hat = std::max(rep.A_hat, s);
  }
  rep.pass_a1 = rep.attractive && rep.alpha_hat < 3.0 && std::isfinite(rep.A_hat);
  // r W' must stay bounded toward the origin; probe three decades below the
  // grid and allow 10% growth
  const double r0 = r_grid.front();
  const double probe = 1e-3 * r0 * p.w1(1e-3 * r0);
  rep.pass_a2 = std::isfinite(rep.a2_const) && probe <= 1.1 * rep.a2_const;
  rep.alpha_boundary_case = rep.alpha_hat <= 1.0 + 1e-12;
  const double alpha_eff = std::max(rep.alpha_hat, 1.0);
  rep.pass_a3 = m > 0.5 * (alpha_eff + 1.0);
  return rep;
}

// Certified lower bound W'(r) >= W'(1) r^-alpha_hat for r >= 1, from the
// monotonicity of W'(r) r^alpha_hat.
inline double lambda_lower(const InteractionPotential& p, const AssumptionReport& rep, double r) {
  if (r < 1.0) throw DomainError("lambda_lower: r must be >= 1");
  if (!rep.pass_a1) throw ArgumentError("lambda_lower: power-decay condition fails on the scanned grid");
  return p.w1(1.0) * std::pow(r, -rep.alpha_hat);
}

}  // namespace aggdiff
