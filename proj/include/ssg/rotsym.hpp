#pragma once

// Shooting for rotationally symmetric solutions u(x) = u(|x|) of the
// self-shrinker system, started from a regular origin.

#include "ssg/core.hpp"

#include <algorithm>

namespace ssg {

struct RotState {
  double r = 0.0;
  Vec u;
  Vec ur;
};

/// Returns u_rr for the radial system
///   u_rr = (1 + |u_r|^2) (-u + r u_r - (n-1) u_r / r),
/// using the regular limit u_rr(0) = -u(0)/n at the origin.
inline Vec rotsym_rhs(const RotState& s, int n) {
  if (!(s.r >= 0.0) || !std::isfinite(s.r)) throw Error(ErrorKind::invalid_radius, "radius must be finite and >= 0");
  if (n < 1) throw Error(ErrorKind::invalid_argument, "dimension n must be >= 1");
  if (s.r == 0.0) return -s.u / static_cast<double>(n);
  const double w = 1.0 + s.ur.squaredNorm();
  return w * (-s.u + s.r * s.ur - (static_cast<double>(n - 1) / s.r) * s.ur);
}

struct ShootThresholds {
  double u_max = 1e6;
  double ur_max = 1e6;
  double min_step = 1e-14;
};

struct IntegratorTolerances {
  double rtol = 1e-10;
  double atol = 1e-12;
};

enum class ShootOutcome { global_to_rmax, diverged, step_collapse };

inline const char* to_string(ShootOutcome o) {
  switch (o) {
    case ShootOutcome::global_to_rmax: return "global-to-rmax";
    case ShootOutcome::diverged: return "diverged";
    case ShootOutcome::step_collapse: return "step-collapse";
  }
  return "unknown";
}

struct ShootResult {
  std::vector<RotState> trajectory;
  ShootOutcome outcome = ShootOutcome::global_to_rmax;
  double end_radius = 0.0;
  std::string exceeded;  // "u" or "ur" when diverged
  double max_abs_u = 0.0;
  double max_abs_ur = 0.0;
  int accepted_steps = 0;
  int rejected_steps = 0;
};

/// Start radius of the series expansion about the origin.
inline constexpr double kSeriesStart = 1e-6;

/// (u, u_r) at r = delta from the two-term expansion u ~ c - (c/n) r^2 / 2.
inline RotState series_start(const Vec& c, int n, double delta = kSeriesStart) {
  const double k = 1.0 / static_cast<double>(n);
  return RotState{delta, c - (k * delta * delta / 2.0) * c, -(k * delta) * c};
}

/// Adaptive Dormand-Prince 5(4) integration from the series start to r_max.
inline ShootResult shoot(const Vec& c, int n, double r_max, ShootThresholds th = {}, IntegratorTolerances tol = {}) {
  if (!(r_max > kSeriesStart)) throw Error(ErrorKind::invalid_radius, "r_max must exceed the series start radius");
  if (n < 1) throw Error(ErrorKind::invalid_argument, "dimension n must be >= 1");
  if (c.size() < 1 || !c.allFinite()) throw Error(ErrorKind::invalid_argument, "initial value must be finite with m >= 1");
  if (!(th.u_max > 0 && th.ur_max > 0 && th.min_step > 0) || !(tol.rtol > 0 && tol.atol > 0))
    throw Error(ErrorKind::invalid_argument, "thresholds and tolerances must be positive");

  const int m = static_cast<int>(c.size());
  auto f = [&](double r, const Vec& y) {
    RotState s{r, y.head(m), y.tail(m)};
    Vec dy(2 * m);
    dy.head(m) = s.ur;
    dy.tail(m) = rotsym_rhs(s, n);
    return dy;
  };

  // Dormand-Prince coefficients.
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  ShootResult res;
  const RotState s0 = series_start(c, n);
  Vec y(2 * m);
  y << s0.u, s0.ur;
  double r = s0.r;
  res.trajectory.push_back(RotState{0.0, c, Vec::Zero(m)});
  res.trajectory.push_back(s0);
  res.max_abs_u = std::max(c.cwiseAbs().maxCoeff(), s0.u.cwiseAbs().maxCoeff());
  res.max_abs_ur = s0.ur.cwiseAbs().maxCoeff();

  const double h_max = r_max / 200.0;
  double h = std::min(1e-3, h_max);
  Vec k1 = f(r, y);
  while (r < r_max) {
    const bool last = r + h >= r_max;
    if (last) h = r_max - r;
    const Vec k2 = f(r + h / 5, y + h * a21 * k1);
    const Vec k3 = f(r + 3 * h / 10, y + h * (a31 * k1 + a32 * k2));
    const Vec k4 = f(r + 4 * h / 5, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = f(r + 8 * h / 9, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 = f(r + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec k7 = f(r + h, y5);
    const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double en = 0.0;
    for (int i = 0; i < 2 * m; ++i) {
      const double sc = tol.atol + tol.rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
      en = std::max(en, std::abs(err(i)) / sc);
    }
    if (!y5.allFinite() || !std::isfinite(en)) en = std::numeric_limits<double>::infinity();

    if (en <= 1.0) {
      r = last ? r_max : r + h;
      y = y5;
      k1 = k7;
      ++res.accepted_steps;
      RotState st{r, y.head(m), y.tail(m)};
      const double au = st.u.cwiseAbs().maxCoeff(), aur = st.ur.cwiseAbs().maxCoeff();
      res.max_abs_u = std::max(res.max_abs_u, au);
      res.max_abs_ur = std::max(res.max_abs_ur, aur);
      res.trajectory.push_back(std::move(st));
      if (au > th.u_max || aur > th.ur_max) {
        res.outcome = ShootOutcome::diverged;
        res.end_radius = r;
        res.exceeded = au > th.u_max ? "u" : "ur";
        return res;
      }
    } else {
      ++res.rejected_steps;
    }
    const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h = std::min(h * fac, h_max);
    if (r < r_max && h < th.min_step) {
      res.outcome = ShootOutcome::step_collapse;
      res.end_radius = r;
      return res;
    }
  }
  res.outcome = ShootOutcome::global_to_rmax;
  res.end_radius = r_max;
  return res;
}

struct ScanRow {
  Vec c;
  ShootOutcome outcome;
  double end_radius;
  std::string exceeded;
  double max_abs_u;
  double max_abs_ur;
};

inline std::vector<ScanRow> scan(const std::vector<Vec>& c_values, int n, double r_max, ShootThresholds th = {},
                                 IntegratorTolerances tol = {}) {
  if (c_values.empty()) throw Error(ErrorKind::invalid_argument, "scan needs at least one initial value");
  std::vector<ScanRow> rows;
  for (const auto& c : c_values) {
    const ShootResult s = shoot(c, n, r_max, th, tol);
    rows.push_back(ScanRow{c, s.outcome, s.end_radius, s.exceeded, s.max_abs_u, s.max_abs_ur});
  }
  return rows;
}

}  // namespace ssg
