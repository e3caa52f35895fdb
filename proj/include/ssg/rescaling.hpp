#pragma once

// Parabolic rescaling of a graph map, the linear-growth estimate, and the
// constants used for polynomial growth of the generalized elliptic system.

#include "ssg/finite_diff.hpp"
#include "ssg/geometry.hpp"
#include "ssg/identity_lab.hpp"
#include "ssg/sampling.hpp"

namespace ssg {

/// w(x, t) = sqrt(T - t) u(x / sqrt(T - t)).
struct RescaledMap {
  GraphSpec spec;
  double T = 1.0;

  struct Eval {
    double scale = 1.0;  // sqrt(T - t)
    Vec xt;              // x / sqrt(T - t)
    Vec w;
    Mat Dw;       // m x n, equals Du(xt)
    Tensor3 D2w;  // u_ij(xt) / sqrt(T - t)
    Vec dtw;      // (-u + xt . Du) / (2 sqrt(T - t))
    Mat gbar_inv; // inverse of g(xt)
    Jet base;     // jet of u at xt
  };

  void require_time(double t) const {
    if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::invalid_time, "horizon T must be positive");
    if (!std::isfinite(t) || t >= T) throw Error(ErrorKind::invalid_time, "time must satisfy t < T");
  }

  Vec value(const Vec& x, double t) const {
    require_time(t);
    const double s = std::sqrt(T - t);
    return s * eval_jet(spec, x / s, 0).u;
  }

  Eval eval(const Vec& x, double t) const {
    require_time(t);
    Eval e;
    e.scale = std::sqrt(T - t);
    e.xt = x / e.scale;
    e.base = eval_jet(spec, e.xt, 2);
    const int n = spec.n, m = spec.m;
    e.w = e.scale * e.base.u;
    e.Dw = e.base.du;
    e.D2w = Tensor3(m, n, n);
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) e.D2w(a, i, j) = e.base.d2u(a, i, j) / e.scale;
    e.dtw = (-e.base.u + e.base.du * e.xt) / (2.0 * e.scale);
    e.gbar_inv = induced_metric(e.base, Signature::euclidean()).ginv;
    return e;
  }
};

struct HeatResidual {
  Vec direct;         // d_t w - (1/2) gbar^ij w_ij
  Vec via_residual;   // -R(xt) / (2 sqrt(T - t))
  double discrepancy = 0.0;
  CheckReport time_derivative;  // analytic d_t w against FD in t (worst component)
};

inline HeatResidual heat_residual(const GraphSpec& spec, double T, const Vec& x, double t, const Tolerances& tol = {}) {
  const RescaledMap map{spec, T};
  const auto e = map.eval(x, t);
  const int m = spec.m;
  HeatResidual out;
  out.direct = Vec(m);
  for (int a = 0; a < m; ++a) out.direct(a) = e.dtw(a) - 0.5 * e.gbar_inv.cwiseProduct(e.D2w.slice(a)).sum();
  out.via_residual = -shrinker_residual(e.base, Signature::euclidean()) / (2.0 * e.scale);
  out.discrepancy = (out.direct - out.via_residual).cwiseAbs().maxCoeff();

  const double h0 = std::clamp(0.25 * (T - t), 1e-6, 1e-3);
  const FDPolicy pol{h0, 3};
  CheckReport worst;
  worst.pass = true;
  worst.check_id = "rescaled_time_derivative_fd";
  for (int a = 0; a < m; ++a) {
    const auto ladder = derivative_ladder([&](double tt) { return map.value(x, tt)(a); }, t, pol);
    const double scale = std::max(1.0, std::abs(e.dtw(a)));
    CheckReport r = richardson_check("rescaled_time_derivative_fd", e.dtw(a), ladder,
                                     RichardsonOptions{tol.oracle * scale, 1.8, -1});
    if (a == 0 || !r.pass || r.abs_discrepancy > worst.abs_discrepancy) worst = r;
    if (!r.pass) break;
  }
  out.time_derivative = worst;
  return out;
}

struct GrowthRadiusRow {
  double radius = 0.0;
  double min_margin = 0.0;          // RHS - |u|^2
  double min_curvature_margin = 0.0; // C (1 + |x|) - max_a |H^a|
};

struct GrowthReport {
  double sup_radius = 0.0;  // 2 sqrt(3n)
  double sup_u2 = 0.0;
  double sampling_error = 0.0;
  double curvature_constant = 0.0;  // sup |u| + 1
  std::vector<GrowthRadiusRow> rows;
  bool holds() const {
    for (const auto& r : rows)
      if (r.min_margin < 0.0 || r.min_curvature_margin < 0.0) return false;
    return true;
  }
};

inline constexpr int kBallSupSamples = 10000;
inline constexpr int kSphereSamples = 512;

/// Margins of |u(x)|^2 <= (2|x|^2/(3n) + 1)(sup_{|y| <= 2 sqrt(3n)} |u|^2 + 12n)
/// and of |H^a| <= C (1 + |x|) on sampled spheres.
inline GrowthReport growth_bound_check(const GraphSpec& spec, const std::vector<double>& radii,
                                       int ball_samples = kBallSupSamples, int sphere_samples = kSphereSamples) {
  if (radii.empty()) throw Error(ErrorKind::invalid_argument, "growth check needs at least one radius");
  const int n = spec.n;
  GrowthReport rep;
  rep.sup_radius = 2.0 * std::sqrt(3.0 * n);
  const BallSup bs = ball_sup_u2(spec, ball_points(n, 1.0, ball_samples), rep.sup_radius);
  rep.sup_u2 = bs.sup_u2;
  rep.sampling_error = bs.sampling_error();
  rep.curvature_constant = std::sqrt(bs.sup_u2) + 1.0;
  const auto dirs = sphere_directions(n, sphere_samples);
  for (double R : radii) {
    if (!(R >= 0.0)) throw Error(ErrorKind::invalid_radius, "radii must be >= 0");
    GrowthRadiusRow row{R, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    const double rhs = (2.0 * R * R / (3.0 * n) + 1.0) * (rep.sup_u2 + 12.0 * n);
    for (const auto& d : dirs) {
      const Jet jet = eval_jet(spec, R * d, 2);
      row.min_margin = std::min(row.min_margin, rhs - jet.u.squaredNorm());
      const CurvaturePack cp = curvature_pack(jet, Signature::euclidean());
      row.min_curvature_margin =
          std::min(row.min_curvature_margin, rep.curvature_constant * (1.0 + R) - cp.Hcomp.cwiseAbs().maxCoeff());
    }
    rep.rows.push_back(row);
  }
  return rep;
}

/// g(s) = (2s/(s+1))^s / (s+1), evaluated in log form.
inline double growth_g(double s) {
  if (!(s > -1.0)) throw Error(ErrorKind::invalid_argument, "g(s) needs s > -1");
  if (s == 0.0) return 1.0;
  return std::exp(s * std::log(2.0 * s / (s + 1.0)) - std::log1p(s));
}

struct S0Result {
  double s0 = 0.0;
  double lo = 3.4;  // g(lo) < 1
  double hi = 3.5;  // g(hi) > 1
  double residual = 0.0;  // |g(s0) - 1|
  int iterations = 0;
};

/// Bisection for the root of g(s) = 1 on [3.4, 3.5], where g is increasing.
inline S0Result s0_solve(double tol = 1e-12) {
  if (!(tol > 0.0 && tol <= 1e-3)) throw Error(ErrorKind::invalid_argument, "s0 tolerance must lie in (0, 1e-3]");
  S0Result r;
  if (!(growth_g(r.lo) < 1.0 && growth_g(r.hi) > 1.0))
    throw Error(ErrorKind::invalid_argument, "bracket [3.4, 3.5] does not straddle g = 1");
  double mid = 0.5 * (r.lo + r.hi);
  for (; r.iterations < 200; ++r.iterations) {
    mid = 0.5 * (r.lo + r.hi);
    const double gm = growth_g(mid);
    if (r.hi - r.lo <= tol && std::abs(gm - 1.0) <= 1e-12) break;
    if (mid <= r.lo || mid >= r.hi) break;
    (gm < 1.0 ? r.lo : r.hi) = mid;
  }
  r.s0 = mid;
  r.residual = std::abs(growth_g(mid) - 1.0);
  return r;
}

/// Root of g(s) = 1 to machine resolution, computed once.
inline double s0_value() {
  static const double s0 = s0_solve(1e-15).s0;
  return s0;
}

struct ZetaWitness {
  double s = 0.0;
  double zeta = 0.0;    // 2s/(s+1)
  double margin = 0.0;  // zeta^s - 2/(2 - zeta)
  bool in_range = true; // s >= s0
};

inline ZetaWitness zeta_witness(double s) {
  if (!(s > 1.0)) throw Error(ErrorKind::invalid_argument, "zeta witness needs s > 1");
  ZetaWitness z;
  z.s = s;
  z.zeta = 2.0 * s / (s + 1.0);
  z.margin = std::pow(z.zeta, s) - 2.0 / (2.0 - z.zeta);
  z.in_range = s >= s0_value();
  return z;
}

struct GrowthConstants {
  double s = 0.0;
  int n = 1;
  double sigma = 1.0;
  double tau = 1.0;
  double c_decay = 1.0;
  double r0 = 1.0;
  double theta = 0.0;  // sqrt(s/(s+1))
  double k = 0.0;      // sqrt(2) theta
  double k2 = 0.0;
  double R0sq = 0.0;   // max{r0, (n sigma + 1)/2 * k^2/(k^2 - 1)}
  double R0 = 0.0;
};

inline GrowthConstants growth_constants(double s, int n, double sigma, double tau, double c_decay, double r0) {
  if (!std::isfinite(s) || s < s0_value())
    throw Error(ErrorKind::below_threshold, "s must be at least s0 = " + std::to_string(s0_value()));
  if (n < 1) throw Error(ErrorKind::invalid_argument, "n must be >= 1");
  if (!(sigma > 0 && tau > 0 && c_decay > 0 && r0 > 0))
    throw Error(ErrorKind::invalid_argument, "sigma, tau, c and r0 must be positive");
  GrowthConstants gc{s, n, sigma, tau, c_decay, r0};
  gc.theta = std::sqrt(s / (s + 1.0));
  gc.k = std::sqrt(2.0) * gc.theta;
  gc.k2 = 2.0 * s / (s + 1.0);
  gc.R0sq = std::max(r0, 0.5 * (n * sigma + 1.0) * gc.k2 / (gc.k2 - 1.0));
  gc.R0 = std::sqrt(gc.R0sq);
  return gc;
}

/// R_1 = R; for m >= 2, R_m^2 = R^2/k^{2(m-1)} + (n sigma + 1)/2 * sum_{j=0}^{m-2} k^{-2j}.
inline double shifted_radius(const GrowthConstants& gc, double R, int m) {
  if (m < 1) throw Error(ErrorKind::invalid_argument, "shifted radius index must be >= 1");
  if (m == 1) return R;
  double geo = 0.0, p = 1.0;
  for (int j = 0; j <= m - 2; ++j, p /= gc.k2) geo += p;
  return std::sqrt(R * R / std::pow(gc.k2, m - 1) + 0.5 * (gc.n * gc.sigma + 1.0) * geo);
}

/// C (1 + sup_term) (1 + |x|^{max(s, tau)}).
inline double theorem15_bound(const GrowthConstants& gc, double sup_term, const Vec& x, double C = 1.0) {
  return C * (1.0 + sup_term) * (1.0 + std::pow(x.norm(), std::max(gc.s, gc.tau)));
}

/// Radius of the ball whose sup of |u| enters the polynomial bound.
inline double bound_sup_radius(const GrowthConstants& gc) { return std::sqrt(gc.k2 + 1.0) * gc.R0; }

struct GrowthAlternative {
  double R = 0.0;
  double r = 0.0;           // sqrt(R^2/k^2 + (n sigma + 1)/2)
  double sup_R = 0.0;       // sampled sup_{B_R} |u|^2
  double sup_r = 0.0;       // sampled sup_{B_r} |u|^2
  double margin_decay_form = 0.0; // 3c R^{2 tau} / (theta^{2 tau} (1 - theta^2)) - sup_R
  double margin_doubling_form = 0.0; // k^{2s} sup_r - sup_R
  bool holds_decay_form = false;
  bool holds_doubling_form = false;
  bool either() const { return holds_decay_form || holds_doubling_form; }
};

inline GrowthAlternative lemma9_check(const GrowthConstants& gc, const GraphSpec& spec, double R,
                                 const std::vector<Vec>& unit_ball) {
  if (!(R > gc.R0)) throw Error(ErrorKind::out_of_range, "lemma check needs R > R0");
  GrowthAlternative res;
  res.R = R;
  res.r = shifted_radius(gc, R, 2);
  res.sup_R = ball_sup_u2(spec, unit_ball, R).sup_u2;
  res.sup_r = ball_sup_u2(spec, unit_ball, res.r).sup_u2;
  const double th2 = gc.theta * gc.theta;
  res.margin_decay_form = 3.0 * gc.c_decay * std::pow(R, 2.0 * gc.tau) / (std::pow(gc.theta, 2.0 * gc.tau) * (1.0 - th2)) - res.sup_R;
  res.margin_doubling_form = std::pow(gc.k, 2.0 * gc.s) * res.sup_r - res.sup_R;
  res.holds_decay_form = res.margin_decay_form >= 0.0;
  res.holds_doubling_form = res.margin_doubling_form >= 0.0;
  return res;
}

struct GelPoint {
  Vec x;
  double residual = 0.0;          // max_a |a^ij u_ij + u - x . Du|
  double sigma_margin = 0.0;      // sigma - lambda_max(a)
  std::optional<double> decay_margin;  // c |x|^{2 tau - 2} - sum a^ij u_i u_j, for |x| >= r0
};

struct GelReport {
  std::vector<GelPoint> points;
  double max_residual = 0.0;
  double min_sigma_margin = std::numeric_limits<double>::infinity();
  double min_decay_margin = std::numeric_limits<double>::infinity();
};

inline GelReport gel_residual_and_conditions(const CoefficientSampler& a, const GraphSpec& spec,
                                             const std::vector<Vec>& grid, const GrowthConstants& gc) {
  GelReport rep;
  for (const auto& x : grid) {
    const Mat A = a(x);
    require_pd_coefficients(A);
    const Jet jet = eval_jet(spec, x, 2);
    GelPoint p;
    p.x = x;
    p.residual = elliptic_residual(jet, A).cwiseAbs().maxCoeff();
    p.sigma_margin = gc.sigma - linalg::sym_eigen(A).values.maxCoeff();
    if (x.norm() >= gc.r0) {
      double q = 0.0;
      for (int al = 0; al < jet.m(); ++al) q += jet.du.row(al) * A * jet.du.row(al).transpose();
      p.decay_margin = gc.c_decay * std::pow(x.norm(), 2.0 * gc.tau - 2.0) - q;
      rep.min_decay_margin = std::min(rep.min_decay_margin, *p.decay_margin);
    }
    rep.max_residual = std::max(rep.max_residual, p.residual);
    rep.min_sigma_margin = std::min(rep.min_sigma_margin, p.sigma_margin);
    rep.points.push_back(std::move(p));
  }
  return rep;
}

}  // namespace ssg
