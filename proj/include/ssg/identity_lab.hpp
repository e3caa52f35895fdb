#pragma once

// The drift operator L_a, strong-sub-harmonic (SSH) margins, the volume
// element function phi = ln det g, and the Bernstein-type identities and
// inequalities built on them.

#include "ssg/finite_diff.hpp"
#include "ssg/geometry.hpp"

#include <functional>

namespace ssg {

using CoefficientSampler = std::function<Mat(const Vec&)>;

inline void require_pd_coefficients(const Mat& a) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (a.rows() != a.cols() || !linalg::is_symmetric(a, 1e-13 * scale))
    throw Error(ErrorKind::invalid_coefficients, "coefficient matrix is not symmetric");
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::invalid_coefficients, "coefficient matrix is not positive definite");
}

/// L_a phi = a^ij phi_ij - x . D phi, with `a` the contravariant coefficients.
inline double apply_L(const Mat& a, const ScalarJet& phi, const Vec& x) {
  require_pd_coefficients(a);
  return a.cwiseProduct(phi.hess).sum() - x.dot(phi.grad);
}

inline double apply_L(const CoefficientSampler& a, const ScalarField& phi, const Vec& x) {
  return apply_L(a(x), phi(x, 2), x);
}

struct SSHParams {
  double epsilon = 0.1;
  void validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::invalid_argument, "SSH epsilon must lie in (0, 1]");
  }
};

struct SSHMargins {
  std::vector<double> margins;  // L_g phi - eps g^ij phi_i phi_j per grid point
  double min_margin = std::numeric_limits<double>::infinity();
  bool holds() const { return min_margin >= 0.0; }
};

inline SSHMargins ssh_margin(const GraphSpec& spec, const ScalarField& phi, SSHParams params,
                             const std::vector<Vec>& grid, Signature sig) {
  params.validate();
  if (grid.empty()) throw Error(ErrorKind::invalid_argument, "SSH grid is empty");
  SSHMargins out;
  for (const auto& x : grid) {
    const Jet jet = eval_jet(spec, x, 2);
    const MetricPack mp = induced_metric(jet, sig);
    const ScalarJet f = phi(x, 2);
    const double lg = mp.ginv.cwiseProduct(f.hess).sum() - x.dot(f.grad);
    const double grad2 = f.grad.dot(mp.ginv * f.grad);
    const double margin = lg - params.epsilon * grad2;
    out.margins.push_back(margin);
    out.min_margin = std::min(out.min_margin, margin);
  }
  return out;
}

struct VolumePhi {
  double phi = 0.0;
  Vec grad;
  Mat hess;
};

/// phi = ln det g with exact first and second derivatives from an order-3 jet.
inline VolumePhi volume_phi(const Jet& jet, Signature sig) {
  if (jet.order < 3) throw Error(ErrorKind::unsupported_order, "volume_phi needs an order-3 jet");
  const int n = jet.n(), m = jet.m();
  const double s = sig.sign();
  const MetricPack mp = induced_metric(jet, sig);
  std::vector<Mat> dg(n, Mat::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        double acc = 0.0;
        for (int a = 0; a < m; ++a) acc += jet.d2u(a, p, k) * jet.du(a, q) + jet.du(a, p) * jet.d2u(a, q, k);
        dg[k](p, q) = s * acc;
      }
  VolumePhi out;
  out.phi = std::log(mp.detg);
  out.grad = Vec(n);
  out.hess = Mat(n, n);
  for (int k = 0; k < n; ++k) out.grad(k) = mp.ginv.cwiseProduct(dg[k]).sum();
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) {
      Mat d2(n, n);
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          double acc = 0.0;
          for (int a = 0; a < m; ++a)
            acc += jet.d3u(a, p, k, l) * jet.du(a, q) + jet.d2u(a, p, k) * jet.d2u(a, q, l) +
                   jet.d2u(a, p, l) * jet.d2u(a, q, k) + jet.du(a, p) * jet.d3u(a, q, k, l);
          d2(p, q) = s * acc;
        }
      const double v = mp.ginv.cwiseProduct(d2).sum() - (mp.ginv * dg[l] * mp.ginv).cwiseProduct(dg[k]).sum();
      out.hess(k, l) = out.hess(l, k) = v;
    }
  return out;
}

/// Four-term expression for g^ij phi_ij in terms of u^a_q, u^a_pi, u^a_pij
/// and g^{-1} (Euclidean). Evaluated as the displayed index sums.
inline double volume_laplacian_rhs(const Jet& jet, const Mat& gi) {
  const int n = jet.n(), m = jet.m();
  const auto& u1 = jet.du;
  const auto& u2 = jet.d2u;
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (gi(i, j) == 0.0) continue;
          for (int p = 0; p < n; ++p)
            for (int k = 0; k < n; ++k) {
              if (gi(p, k) == 0.0) continue;
              for (int q = 0; q < n; ++q)
                for (int l = 0; l < n; ++l) {
                  const double w = gi(i, j) * gi(p, k) * gi(q, l);
                  t1 += w * u2(a, p, i) * u1(a, q) * u2(b, k, j) * u1(b, l);
                  t2 += w * u2(a, q, i) * u1(a, p) * u2(b, k, j) * u1(b, l);
                }
            }
        }
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) {
            const double w = gi(i, j) * gi(p, q);
            t3 += w * u2(a, p, i) * u2(a, q, j);
            t4 += w * jet.d3u(a, p, i, j) * u1(a, q);
          }
  return -2.0 * t1 - 2.0 * t2 + 2.0 * t3 + 2.0 * t4;
}

struct VolumeLaplacianCheck {
  double rhs = 0.0;             // four-term expression
  double lhs_analytic = 0.0;    // g^ij phi_ij from volume_phi
  CheckReport analytic;         // rhs vs volume_phi route
  CheckReport oracle;           // rhs vs finite-difference g^ij phi_ij
};

/// Checks the calculus identity for g^ij phi_ij (valid for any smooth u) at
/// x, against both the analytic Hessian of phi and a Richardson FD oracle.
inline VolumeLaplacianCheck identity_31_check(const GraphSpec& spec, const Vec& x, const Tolerances& tol = {},
                                              std::optional<FDPolicy> policy = std::nullopt) {
  const Signature sig = Signature::euclidean();
  const Jet jet = eval_jet(spec, x, 3);
  const MetricPack mp = induced_metric(jet, sig);
  VolumeLaplacianCheck out;
  out.rhs = volume_laplacian_rhs(jet, mp.ginv);
  const VolumePhi vp = volume_phi(jet, sig);
  out.lhs_analytic = mp.ginv.cwiseProduct(vp.hess).sum();
  out.analytic = compare("volume_laplacian_identity", out.rhs, out.lhs_analytic,
                         tol.analytic * std::max(1.0, std::abs(out.rhs)));

  const FDPolicy pol = policy.value_or(FDPolicy::second_order_at(x));
  const FieldSampler phi = [&](const Vec& y) {
    const Jet j1 = eval_jet(spec, y, 1);
    return linalg::spd_factor(metric_from_du(j1.du, sig)).log_det;
  };
  const FDJet fd = finite_diff_jet(phi, x, pol);
  std::vector<double> ladder;
  for (const auto& H : fd.hess_levels) ladder.push_back(mp.ginv.cwiseProduct(H).sum());
  out.oracle = richardson_check("volume_laplacian_identity_fd", out.rhs, ladder,
                                RichardsonOptions{tol.oracle, 1.8, -1});
  return out;
}

/// Frame data at a point where du is diagonal: u^a_i = lambda_i delta^a_i.
struct FrameData {
  int n = 1;
  int m = 1;
  Vec lambdas;      // n entries, zero beyond min(n, m)
  Tensor3 hessians; // m x n x n, symmetric in the last two indices

  void validate() const {
    if (lambdas.size() != n || hessians.dim(0) != m || hessians.dim(1) != n || hessians.dim(2) != n)
      throw Error(ErrorKind::invalid_argument, "frame data dimensions are inconsistent");
    for (int i = std::min(n, m); i < n; ++i)
      if (lambdas(i) != 0.0) throw Error(ErrorKind::invalid_argument, "lambda_i must vanish for i > min(n, m)");
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (hessians(a, i, j) != hessians(a, j, i))
            throw Error(ErrorKind::invalid_argument, "frame hessians must be symmetric");
  }

  Mat du() const {
    Mat d = Mat::Zero(m, n);
    for (int i = 0; i < std::min(n, m); ++i) d(i, i) = lambdas(i);
    return d;
  }

  /// u^q_pi with u^q = 0 for q >= m.
  double u(int q, int p, int i) const { return q < m ? hessians(q, p, i) : 0.0; }
};

/// L_g phi after substituting the shrinker system (third-derivative term
/// eliminated), as a coordinate index sum over du, d2u and g^{-1}.
inline double lg_phi_shrinker_form(const Mat& du, const Tensor3& d2u, const Mat& gi) {
  const int n = static_cast<int>(du.cols()), m = static_cast<int>(du.rows());
  double t1 = 0.0, t2 = 0.0, t3 = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (gi(i, j) == 0.0) continue;
          for (int p = 0; p < n; ++p)
            for (int k = 0; k < n; ++k) {
              if (gi(p, k) == 0.0) continue;
              for (int q = 0; q < n; ++q)
                for (int l = 0; l < n; ++l) {
                  const double w = gi(i, j) * gi(p, k) * gi(q, l);
                  t1 += w * d2u(a, p, i) * du(a, q) * d2u(b, k, j) * du(b, l);
                  t2 += w * d2u(a, q, i) * du(a, p) * d2u(b, k, j) * du(b, l);
                }
            }
        }
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) t3 += gi(i, j) * gi(p, q) * d2u(a, p, i) * d2u(a, q, j);
  return -2.0 * t1 + 2.0 * t2 + 2.0 * t3;
}

/// The lambda-denominator form of L_g phi in the singular-value frame.
inline double frame_shrinker_form(const FrameData& d) {
  const int n = d.n;
  auto w = [&](int i) { return 1.0 + d.lambdas(i) * d.lambdas(i); };
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        const double den = w(i) * w(p) * w(q);
        s1 += d.lambdas(q) * d.lambdas(q) * d.u(q, p, i) * d.u(q, p, i) / den;
        s3 += d.lambdas(p) * d.lambdas(q) * d.u(p, q, i) * d.u(q, p, i) / den;
      }
      for (int a = 0; a < d.m; ++a) s2 += d.hessians(a, p, i) * d.hessians(a, p, i) / (w(i) * w(p));
    }
  return -2.0 * s1 + 2.0 * s2 + 2.0 * s3;
}

struct FrameReduction {
  double coordinate = 0.0;
  double frame = 0.0;
  double discrepancy = 0.0;
};

inline FrameReduction frame_reduction_38(const FrameData& d) {
  d.validate();
  const Mat du = d.du();
  const Mat g = metric_from_du(du, Signature::euclidean());
  // g is diagonal here; invert entrywise to keep the route exact.
  Mat gi = Mat::Zero(d.n, d.n);
  for (int i = 0; i < d.n; ++i) gi(i, i) = 1.0 / g(i, i);
  FrameReduction r;
  r.coordinate = lg_phi_shrinker_form(du, d.hessians, gi);
  r.frame = frame_shrinker_form(d);
  r.discrepancy = std::abs(r.coordinate - r.frame);
  return r;
}

/// g^ij phi_i phi_j in the frame: sum_i [sum_p 2 lambda_p u^p_pi / (1+lambda_p^2)]^2 / (1+lambda_i^2).
inline double frame_grad_phi_sq(const FrameData& d) {
  double total = 0.0;
  for (int i = 0; i < d.n; ++i) {
    double s = 0.0;
    for (int p = 0; p < std::min(d.n, d.m); ++p)
      s += 2.0 * d.lambdas(p) * d.hessians(p, p, i) / (1.0 + d.lambdas(p) * d.lambdas(p));
    total += s * s / (1.0 + d.lambdas(i) * d.lambdas(i));
  }
  return total;
}

/// Margin of L_g phi >= factor * g^ij phi_i phi_j in the frame.
inline double frame_ssh_chain_margin(const FrameData& d, double factor) {
  return frame_shrinker_form(d) - factor * frame_grad_phi_sq(d);
}

struct PointConditions {
  Vec x;
  double max_cross_product = 0.0;  // max_{i != j} lambda_i lambda_j
  double detg = 1.0;
  double commutator_norm = 0.0;
  double commutator_tol = 0.0;
};

struct Thm10Report {
  double beta = 0.0;
  bool cond_i = true;
  double worst_product = 0.0;
  bool cond_ii = true;
  double max_detg = 0.0;
  bool cond_iii = true;
  double max_commutator = 0.0;
  std::vector<PointConditions> points;
};

/// Frobenius norm of u^a_qi g^ij u^b_jp - u^b_qi g^ij u^a_jp over all a < b.
inline double hessian_commutator_norm(const Jet& jet, const Mat& gi) {
  double s = 0.0;
  for (int a = 0; a < jet.m(); ++a)
    for (int b = a + 1; b < jet.m(); ++b) {
      const Mat ha = jet.hessian(a), hb = jet.hessian(b);
      s += (ha * gi * hb - hb * gi * ha).squaredNorm();
    }
  return std::sqrt(s);
}

/// Evaluates the three alternative rigidity conditions on a grid.
inline Thm10Report thm10_conditions(const GraphSpec& spec, const std::vector<Vec>& grid, double beta,
                                    const Tolerances& tol = {}) {
  if (!(beta > 0.0 && beta < 9.0)) throw Error(ErrorKind::invalid_threshold, "beta must satisfy 0 < beta < 9");
  if (grid.empty()) throw Error(ErrorKind::invalid_argument, "condition grid is empty");
  const Signature sig = Signature::euclidean();
  Thm10Report rep;
  rep.beta = beta;
  for (const auto& x : grid) {
    const Jet jet = eval_jet(spec, x, 2);
    const MetricPack mp = induced_metric(jet, sig);
    const Vec lam = linalg::svd(jet.du).sigma;
    PointConditions pc;
    pc.x = x;
    for (int i = 0; i < lam.size(); ++i)
      for (int j = i + 1; j < lam.size(); ++j) pc.max_cross_product = std::max(pc.max_cross_product, lam(i) * lam(j));
    pc.detg = mp.detg;
    pc.commutator_norm = hessian_commutator_norm(jet, mp.ginv);
    double hscale = 0.0;
    for (int a = 0; a < jet.m(); ++a) hscale += jet.hessian(a).squaredNorm();
    pc.commutator_tol = tol.analytic * std::max(1.0, hscale);
    rep.worst_product = std::max(rep.worst_product, pc.max_cross_product);
    rep.max_detg = std::max(rep.max_detg, pc.detg);
    rep.max_commutator = std::max(rep.max_commutator, pc.commutator_norm);
    rep.cond_i = rep.cond_i && (1.0 - pc.max_cross_product >= 0.0);
    rep.cond_ii = rep.cond_ii && (pc.detg <= beta);
    rep.cond_iii = rep.cond_iii && (pc.commutator_tol - pc.commutator_norm >= 0.0);
    rep.points.push_back(std::move(pc));
  }
  return rep;
}

}  // namespace ssg
