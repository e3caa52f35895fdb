#pragma once

// Lagrangian graphs u = Dv (m = n): the scalar potential equations, the
// phase function, the Lewy rotation and the bridge back to the system.

#include "ssg/finite_diff.hpp"
#include "ssg/geometry.hpp"

#include <numbers>

namespace ssg {

struct PotentialSpec {
  int n = 1;
  ScalarExpr v;

  static constexpr int kMaxPolyDegree = 5;

  void validate() const {
    if (n < 1) throw Error(ErrorKind::invalid_spec, "potential needs n >= 1");
    if (v.poly_degree() > kMaxPolyDegree)
      throw Error(ErrorKind::invalid_spec, "polynomial potentials are limited to degree 5");
  }

  ScalarJet jet(const Vec& x, int order) const {
    require_finite_point(x);
    if (x.size() != n) throw Error(ErrorKind::invalid_point, "point dimension does not match n");
    return v.jet(x, order);
  }
};

/// Graph jet of u = Dv up to order 3 (needs v to order + 1).
inline Jet potential_graph_jet(const PotentialSpec& ps, const Vec& x, int order) {
  if (order < 0 || order > 3) throw Error(ErrorKind::unsupported_order, "graph jets support order 0..3");
  const ScalarJet s = ps.jet(x, order + 1);
  const int n = ps.n;
  Jet j;
  j.x = x;
  j.order = order;
  j.u = s.grad;
  if (order >= 1) j.du = s.hess;
  if (order >= 2) {
    j.d2u = Tensor3(n, n, n);
    for (int a = 0; a < n; ++a)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) j.d2u(a, p, q) = s.d3(a, p, q);
  }
  if (order >= 3) {
    j.d3u = Tensor4(n, n, n, n);
    for (int a = 0; a < n; ++a)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          for (int r = 0; r < n; ++r) j.d3u(a, p, q, r) = s.d4(a, p, q, r);
  }
  return j;
}

inline Vec hessian_eigenvalues(const Mat& V) {
  const auto e = linalg::sym_eigen(V);
  if (!e.values.allFinite()) throw Error(ErrorKind::decomposition_failure, "eigendecomposition produced non-finite values");
  return e.values;
}

/// sum arctan mu_i(D^2 v) + 2v - x . Dv.
inline double euclid_potential_residual(const PotentialSpec& ps, const Vec& x) {
  const ScalarJet s = ps.jet(x, 2);
  const Vec mu = hessian_eigenvalues(s.hess);
  double tr = 0.0;
  for (int i = 0; i < mu.size(); ++i) tr += std::atan(mu(i));
  return tr + 2.0 * s.value - x.dot(s.grad);
}

/// (1/2) sum ln((1 + mu_i)/(1 - mu_i)) + 2v - x . Dv, for |mu_i| < 1.
inline double pseudo_potential_residual(const PotentialSpec& ps, const Vec& x) {
  const ScalarJet s = ps.jet(x, 2);
  const Vec mu = hessian_eigenvalues(s.hess);
  require_spacelike(mu);
  double tr = 0.0;
  for (int i = 0; i < mu.size(); ++i) tr += std::atanh(mu(i));
  return tr + 2.0 * s.value - x.dot(s.grad);
}

struct PhaseValue {
  double theta = 0.0;
  Vec mu;
  Vec grad;   // D Theta
  Mat hess;   // D^2 Theta
  double residual = 0.0;  // g^ij Theta_ij - x . D Theta, g = I + (D^2 v)^2
};

/// Theta = sum arctan mu_i with derivatives from the resolvent form
/// D_k Theta = tr[(I + V^2)^{-1} d_k V], V = D^2 v.
inline PhaseValue phase_residual(const PotentialSpec& ps, const Vec& x) {
  const ScalarJet s = ps.jet(x, 4);
  const int n = ps.n;
  const Mat& V = s.hess;
  PhaseValue pv;
  pv.mu = hessian_eigenvalues(V);
  for (int i = 0; i < n; ++i) pv.theta += std::atan(pv.mu(i));
  const Mat G = Mat::Identity(n, n) + V * V;
  const Mat Gi = linalg::spd_factor(G).inverse;
  std::vector<Mat> dV(n, Mat(n, n));
  for (int k = 0; k < n; ++k)
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) dV[k](p, q) = s.d3(p, q, k);
  pv.grad = Vec(n);
  for (int k = 0; k < n; ++k) pv.grad(k) = Gi.cwiseProduct(dV[k]).sum();
  pv.hess = Mat(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) {
      Mat ddV(n, n);
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) ddV(p, q) = s.d4(p, q, k, l);
      const Mat dG = dV[l] * V + V * dV[l];
      const double v = (Gi * ddV).trace() - (Gi * dG * Gi * dV[k]).trace();
      pv.hess(k, l) = pv.hess(l, k) = v;
    }
  pv.residual = Gi.cwiseProduct(pv.hess).sum() - x.dot(pv.grad);
  return pv;
}

/// Analytic D Theta against central differences of Theta (worst component).
inline CheckReport phase_gradient_fd_check(const PotentialSpec& ps, const Vec& x, const Tolerances& tol = {}) {
  const PhaseValue pv = phase_residual(ps, x);
  const FieldSampler theta = [&](const Vec& y) {
    const Vec mu = hessian_eigenvalues(ps.jet(y, 2).hess);
    double t = 0.0;
    for (int i = 0; i < mu.size(); ++i) t += std::atan(mu(i));
    return t;
  };
  const FDJet fd = finite_diff_jet(theta, x, FDPolicy::default_at(x));
  CheckReport worst;
  for (int k = 0; k < ps.n; ++k) {
    std::vector<double> ladder;
    for (const auto& g : fd.grad_levels) ladder.push_back(g(k));
    CheckReport r = richardson_check("phase_gradient_fd", pv.grad(k), ladder, RichardsonOptions{tol.oracle, 1.8, -1});
    if (k == 0 || !r.pass || r.abs_discrepancy > worst.abs_discrepancy) worst = r;
    if (!r.pass) break;
  }
  return worst;
}

struct LewyPoint {
  Vec xbar;     // (x - D eta)/sqrt 2
  Vec Dw;       // (x + D eta)/sqrt 2
  Mat D2w;      // (I + D^2 eta)(I - D^2 eta)^{-1}
  double w = 0.0;  // |x|^2/4 - |D eta|^2/4 + eta - x . D eta / 2
  double roundtrip = 0.0;  // || D2w (I - D^2 eta) - (I + D^2 eta) ||_max
  double inversion = 0.0;  // max of |(xbar + Dw)/sqrt2 - x| and |(Dw - xbar)/sqrt2 - D eta|
  bool d2w_positive_definite = false;
};

inline constexpr double kRotationSingularTol = 1e-12;

inline LewyPoint lewy_rotate(const PotentialSpec& eta, const Vec& x) {
  const ScalarJet s = eta.jet(x, 2);
  const int n = eta.n;
  const Mat I = Mat::Identity(n, n);
  const Mat minus = I - s.hess, plus = I + s.hess;
  const Vec ev = hessian_eigenvalues(minus);
  if (ev.cwiseAbs().minCoeff() <= kRotationSingularTol)
    throw Error(ErrorKind::degenerate_rotation, "I - D^2 eta is singular");
  LewyPoint lp;
  const double r2 = std::sqrt(2.0);
  lp.xbar = (x - s.grad) / r2;
  lp.Dw = (x + s.grad) / r2;
  // (I - V)^{-1} commutes with I + V, so the product is symmetric.
  const Mat D2w = minus.partialPivLu().solve(plus);
  lp.D2w = 0.5 * (D2w + D2w.transpose());
  lp.w = x.squaredNorm() / 4.0 - s.grad.squaredNorm() / 4.0 + s.value - x.dot(s.grad) / 2.0;
  lp.roundtrip = (lp.D2w * minus - plus).cwiseAbs().maxCoeff();
  lp.inversion = std::max(((lp.xbar + lp.Dw) / r2 - x).cwiseAbs().maxCoeff(),
                          ((lp.Dw - lp.xbar) / r2 - s.grad).cwiseAbs().maxCoeff());
  lp.d2w_positive_definite = hessian_eigenvalues(lp.D2w).minCoeff() > 0.0;
  return lp;
}

struct MongeAmpereCheck {
  bool domain_ok = false;   // D^2 w positive definite, so ln det is defined
  double eta_residual = 0.0;  // tr ln((I + D^2 eta)(I - D^2 eta)^{-1}) - n(-eta + x . D eta / 2)
  double w_residual = std::numeric_limits<double>::quiet_NaN();  // ln det D^2 w - n(-w + xbar . Dw / 2)
  double discrepancy = std::numeric_limits<double>::quiet_NaN();
};

/// Both sides of the rotated equation at one point. The two residuals agree
/// whenever D^2 w is positive definite.
inline MongeAmpereCheck monge_ampere_check(const PotentialSpec& eta, const Vec& x) {
  const ScalarJet s = eta.jet(x, 2);
  const int n = eta.n;
  const Vec mu = hessian_eigenvalues(s.hess);
  const LewyPoint lp = lewy_rotate(eta, x);
  MongeAmpereCheck mc;
  mc.domain_ok = lp.d2w_positive_definite;
  double tr = 0.0;
  bool tr_ok = true;
  for (int i = 0; i < n; ++i) {
    const double q = (1.0 + mu(i)) / (1.0 - mu(i));
    if (!(q > 0.0)) tr_ok = false;
    tr += std::log(std::abs(q));
  }
  mc.eta_residual = tr_ok ? tr - n * (-s.value + x.dot(s.grad) / 2.0) : std::numeric_limits<double>::quiet_NaN();
  if (mc.domain_ok) {
    const auto f = linalg::spd_factor(lp.D2w);
    mc.w_residual = f.log_det - n * (-lp.w + lp.xbar.dot(lp.Dw) / 2.0);
    mc.discrepancy = std::abs(mc.w_residual - mc.eta_residual);
  }
  return mc;
}

struct GradientConsistency {
  Vec potential_side;  // D_a [tr arctan D^2 v + 2v - x . Dv]
  Vec system_side;     // R^a of the graph u = Dv
  double discrepancy = 0.0;
};

inline GradientConsistency gradient_consistency(const PotentialSpec& ps, const Vec& x) {
  const PhaseValue pv = phase_residual(ps, x);
  const ScalarJet s = ps.jet(x, 2);
  GradientConsistency gc;
  // D(2v - x . Dv) = Dv - D^2 v x.
  gc.potential_side = pv.grad + s.grad - s.hess * x;
  gc.system_side = shrinker_residual(potential_graph_jet(ps, x, 2), Signature::euclidean());
  gc.discrepancy = (gc.potential_side - gc.system_side).cwiseAbs().maxCoeff();
  return gc;
}

/// w(y) = 2 v(y / sqrt 2).
inline PotentialSpec rescale_euclid(const PotentialSpec& ps) {
  return PotentialSpec{ps.n, make_scaled(Rational(2), 1.0 / std::sqrt(2.0), ps.v)};
}

/// eta(y) = (4/n) v(sqrt(n) y / 2).
inline PotentialSpec rescale_pseudo(const PotentialSpec& ps) {
  return PotentialSpec{ps.n, make_scaled(Rational(4, ps.n), std::sqrt(static_cast<double>(ps.n)) / 2.0, ps.v)};
}

}  // namespace ssg
