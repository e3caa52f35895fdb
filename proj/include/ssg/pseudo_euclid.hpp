#pragma once

// Spacelike graphs in pseudo-Euclidean space of index m: the function *dx,
// the drift operator P, adapted-frame identities and inequalities, and the
// decay profile of det g along rays.

#include "ssg/finite_diff.hpp"
#include "ssg/geometry.hpp"
#include "ssg/sampling.hpp"

namespace ssg {

struct StarDx {
  Vec x;
  double value = 1.0;       // (det g)^{-1/2} from the Cholesky factor
  double value_sv = 1.0;    // prod (1 - lambda_i^2)^{-1/2} from singular values
  double discrepancy = 0.0;
};

inline StarDx star_dx(const Jet& jet) {
  if (jet.order < 1) throw Error(ErrorKind::unsupported_order, "*dx needs a jet of order >= 1");
  const Vec lam = linalg::svd(jet.du).sigma;
  require_spacelike(lam);
  StarDx s;
  s.x = jet.x;
  const auto f = linalg::spd_factor(metric_from_du(jet.du, Signature::pseudo()));
  s.value = std::exp(-0.5 * f.log_det);
  double log_sv = 0.0;
  for (int i = 0; i < lam.size(); ++i) log_sv += std::log1p(-lam(i)) + std::log1p(lam(i));
  s.value_sv = std::exp(-0.5 * log_sv);
  s.discrepancy = std::abs(s.value - s.value_sv);
  return s;
}

inline constexpr double kAdaptedTol = 1e-12;

/// The diagonal of du when du is diagonal (u^a_i = 0 for a != i).
inline Vec adapted_lambdas(const Jet& jet) {
  const int n = jet.n(), m = jet.m();
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i)
      if (a != i && std::abs(jet.du(a, i)) > kAdaptedTol)
        throw Error(ErrorKind::frame_not_adapted, "du is not diagonal at the point");
  Vec lam = Vec::Zero(std::max(n, m));
  for (int i = 0; i < std::min(n, m); ++i) lam(i) = jet.du(i, i);
  require_spacelike(lam);
  return lam;
}

/// h^a_ij = u^a_ij / sqrt((1 - lambda_i^2)(1 - lambda_j^2)(1 - lambda_a^2)) at an adapted point.
inline Tensor3 adapted_second_fundamental_form(const Jet& jet, const Vec& lam) {
  const int n = jet.n(), m = jet.m();
  Tensor3 h(m, n, n);
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        h(a, i, j) = jet.d2u(a, i, j) /
                     std::sqrt((1.0 - lam(i) * lam(i)) * (1.0 - lam(j) * lam(j)) * (1.0 - lam(a) * lam(a)));
  return h;
}

/// Coordinate gradient of *dx: d_k(*dx) = -(1/2) *dx g^pq d_k g_pq.
inline Vec star_dx_gradient(const Jet& jet) {
  const int n = jet.n(), m = jet.m();
  const MetricPack mp = induced_metric(jet, Signature::pseudo());
  const double sd = 1.0 / std::sqrt(mp.detg);
  Vec grad(n);
  for (int k = 0; k < n; ++k) {
    double tr = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        double dg = 0.0;
        for (int a = 0; a < m; ++a) dg += jet.d2u(a, p, k) * jet.du(a, q) + jet.du(a, p) * jet.d2u(a, q, k);
        tr += mp.ginv(p, q) * (-dg);
      }
    grad(k) = -0.5 * sd * tr;
  }
  return grad;
}

struct StarDxGradientCheck {
  Vec frame_derivative;  // e_i(*dx) = d_i(*dx) / sqrt(1 - lambda_i^2)
  Vec h_form;            // sum_j h^j_ij lambda_j *dx
  CheckReport analytic;  // worst component
  CheckReport oracle;    // FD of *dx against the chain-rule gradient, worst component
};

inline StarDxGradientCheck grad_stardx_identity(const GraphSpec& spec, const Vec& x, const Tolerances& tol = {}) {
  const Jet jet = eval_jet(spec, x, 2);
  const int n = jet.n(), m = jet.m();
  const Vec lam = adapted_lambdas(jet);
  const Tensor3 h = adapted_second_fundamental_form(jet, lam);
  const double sd = star_dx(jet).value;
  const Vec grad = star_dx_gradient(jet);
  StarDxGradientCheck out;
  out.frame_derivative = Vec(n);
  out.h_form = Vec(n);
  for (int i = 0; i < n; ++i) {
    out.frame_derivative(i) = grad(i) / std::sqrt(1.0 - lam(i) * lam(i));
    double s = 0.0;
    for (int j = 0; j < std::min(n, m); ++j) s += h(j, i, j) * lam(j);
    out.h_form(i) = s * sd;
  }
  int worst = 0;
  for (int i = 0; i < n; ++i)
    if (std::abs(out.frame_derivative(i) - out.h_form(i)) > std::abs(out.frame_derivative(worst) - out.h_form(worst)))
      worst = i;
  out.analytic = compare("stardx_frame_gradient", out.h_form(worst), out.frame_derivative(worst),
                         tol.analytic * std::max(1.0, std::abs(out.h_form(worst))));

  const FieldSampler f = [&](const Vec& y) { return star_dx(eval_jet(spec, y, 1)).value; };
  const FDJet fd = finite_diff_jet(f, x, FDPolicy::default_at(x));
  CheckReport ow;
  for (int k = 0; k < n; ++k) {
    std::vector<double> ladder;
    for (const auto& g : fd.grad_levels) ladder.push_back(g(k));
    CheckReport r = richardson_check("stardx_gradient_fd", grad(k), ladder,
                                     RichardsonOptions{tol.oracle * std::max(1.0, std::abs(grad(k))), 1.8, -1});
    if (k == 0 || !r.pass || r.abs_discrepancy > ow.abs_discrepancy) ow = r;
    if (!r.pass) break;
  }
  out.oracle = ow;
  return out;
}

struct DriftLaplacian {
  double laplacian = 0.0;  // Laplace-Beltrami of f
  double P = 0.0;          // laplacian - g^ij <X, d_i X> f_j
};

/// Delta f = g^ij f_ij + (d_i g^ij) f_j + (1/2) g^ij d_i(ln det g) f_j.
inline DriftLaplacian laplace_beltrami_P(const GraphSpec& spec, const ScalarField& f, const Vec& x,
                                         Signature sig = Signature::pseudo()) {
  const Jet jet = eval_jet(spec, x, 2);
  const int n = jet.n(), m = jet.m();
  const double s = sig.sign();
  const MetricPack mp = induced_metric(jet, sig);
  const ScalarJet fj = f(x, 2);
  Vec div_ginv = Vec::Zero(n);  // sum_i d_i g^ij
  Vec dlogdet(n);
  for (int k = 0; k < n; ++k) {
    Mat dg(n, n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        double acc = 0.0;
        for (int a = 0; a < m; ++a) acc += jet.d2u(a, p, k) * jet.du(a, q) + jet.du(a, p) * jet.d2u(a, q, k);
        dg(p, q) = s * acc;
      }
    dlogdet(k) = mp.ginv.cwiseProduct(dg).sum();
    const Mat dginv = -mp.ginv * dg * mp.ginv;
    div_ginv += dginv.row(k).transpose();
  }
  DriftLaplacian out;
  out.laplacian = mp.ginv.cwiseProduct(fj.hess).sum() + div_ginv.dot(fj.grad) + 0.5 * dlogdet.dot(mp.ginv * fj.grad);
  const Vec T = tangential_position(jet, sig);
  out.P = out.laplacian - T.dot(mp.ginv * fj.grad);
  return out;
}

namespace detail {

inline double pseudo_inner(const Vec& a, const Vec& b, int n) {
  const auto m = a.size() - n;
  return a.head(n).dot(b.head(n)) - a.tail(m).dot(b.tail(m));
}

// Domain coordinates of the orthonormal tangent frame g^{-1/2} at y.
inline Mat inverse_sqrt_metric(const Mat& g) {
  const auto e = linalg::sym_eigen(g);
  return e.vectors * e.values.cwiseSqrt().cwiseInverse().asDiagonal() * e.vectors.transpose();
}

struct TangentFrameField {
  const GraphSpec& spec;
  Vec p;
  std::vector<Mat> M;  // connection matrices of the raw frame at p

  int n() const { return spec.n; }

  Mat embedding(const Mat& du) const {
    Mat dX(spec.n + spec.m, spec.n);
    dX.topRows(spec.n) = Mat::Identity(spec.n, spec.n);
    dX.bottomRows(spec.m) = du;
    return dX;
  }

  // Raw frame F = dX g^{-1/2}; columns are ambient vectors.
  Mat raw(const Vec& y) const {
    const Jet j = eval_jet(spec, y, 1);
    const Mat W = inverse_sqrt_metric(metric_from_du(j.du, Signature::pseudo()));
    return embedding(j.du) * W;
  }

  Mat rotation(const Vec& y) const {
    const int n = spec.n;
    Mat A = Mat::Zero(n, n);
    for (int l = 0; l < n; ++l) A -= (y(l) - p(l)) * M[l];
    const Mat I = Mat::Identity(n, n);
    return (I - 0.5 * A).partialPivLu().solve(I + 0.5 * A);
  }

  // Frame E = F Cay(A) and the domain directions of its columns.
  std::pair<Mat, Mat> frame(const Vec& y) const {
    const Jet j = eval_jet(spec, y, 1);
    const Mat W = inverse_sqrt_metric(metric_from_du(j.du, Signature::pseudo()));
    const Mat C = rotation(y);
    return {embedding(j.du) * W * C, W * C};
  }
};

}  // namespace detail

/// Second covariant derivative check <D_{e_i} D_{e_i} e_j, e_j> = sum_a (h^a_ij)^2
/// at an adapted point, with a frame whose tangential connection vanishes there.
inline CheckReport frame_hessian_check(const GraphSpec& spec, const Vec& x, int i, int j, const Tolerances& tol = {},
                                       std::optional<FDPolicy> policy = std::nullopt) {
  const int n = spec.n;
  if (i < 0 || j < 0 || i >= n || j >= n) throw Error(ErrorKind::invalid_argument, "frame indices out of range");
  const Jet jet = eval_jet(spec, x, 2);
  const Vec lam = adapted_lambdas(jet);
  const Tensor3 h = adapted_second_fundamental_form(jet, lam);
  double expected = 0.0;
  for (int a = 0; a < spec.m; ++a) expected += h(a, i, j) * h(a, i, j);

  detail::TangentFrameField field{spec, x, {}};
  const double hm = 1e-5 * std::max(1.0, x.norm());
  const Mat F0 = field.raw(x);
  for (int l = 0; l < n; ++l) {
    Vec a = x, b = x;
    a(l) += hm;
    b(l) -= hm;
    const Mat dF = (field.raw(a) - field.raw(b)) / (2.0 * hm);
    Mat Ml(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) Ml(r, c) = detail::pseudo_inner(dF.col(c), F0.col(r), n);
    field.M.push_back(0.5 * (Ml - Ml.transpose()));
  }

  const FDPolicy pol = policy.value_or(FDPolicy::second_order_at(x));
  pol.validate();
  const auto [E0, D0] = field.frame(x);
  std::vector<double> ladder;
  for (int lev = 0; lev < pol.levels; ++lev) {
    const double hs = pol.step(lev);
    auto Y = [&](const Vec& y) {
      const Vec d = field.frame(y).second.col(i);
      return Vec((field.frame(y + hs * d).first.col(j) - field.frame(y - hs * d).first.col(j)) / (2.0 * hs));
    };
    const Vec d0 = D0.col(i);
    const Vec Z = (Y(x + hs * d0) - Y(x - hs * d0)) / (2.0 * hs);
    ladder.push_back(detail::pseudo_inner(Z, E0.col(j), n));
  }
  return richardson_check("frame_second_derivative_fd", expected, ladder,
                          RichardsonOptions{tol.oracle * std::max(1.0, expected), 1.8, -1});
}

struct PseudoFrameData {
  int n = 1;
  int m = 1;
  Vec lambdas;  // n entries, |lambda| < 1, zero beyond min(n, m)
  Tensor3 h;    // m x n x n, symmetric in the last two indices

  void validate() const {
    if (lambdas.size() != n || h.dim(0) != m || h.dim(1) != n || h.dim(2) != n)
      throw Error(ErrorKind::invalid_argument, "frame data dimensions are inconsistent");
    for (int i = std::min(n, m); i < n; ++i)
      if (lambdas(i) != 0.0) throw Error(ErrorKind::invalid_argument, "lambda_i must vanish for i > min(n, m)");
    require_spacelike(lambdas);
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (h(a, i, j) != h(a, j, i)) throw Error(ErrorKind::invalid_argument, "h must be symmetric in i, j");
  }

  double lam(int k) const { return k < n ? lambdas(k) : 0.0; }
  /// h^k_ij, zero for normal labels k >= m.
  double hk(int k, int i, int j) const { return k < m ? h(k, i, j) : 0.0; }
};

/// L_g(-phi) as the three displayed index sums, for a pseudo metric g.
inline double neg_phi_operator_sums(const Mat& du, const Tensor3& d2u, const Mat& gi) {
  const int n = static_cast<int>(du.cols()), m = static_cast<int>(du.rows());
  double t1 = 0.0, t2 = 0.0, t3 = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int p = 0; p < n; ++p)
            for (int k = 0; k < n; ++k)
              for (int q = 0; q < n; ++q)
                for (int l = 0; l < n; ++l) {
                  const double w = gi(i, j) * gi(p, k) * gi(q, l);
                  if (w == 0.0) continue;
                  t1 += w * d2u(a, p, i) * du(a, q) * d2u(b, k, j) * du(b, l);
                  t2 += w * d2u(a, q, i) * du(a, p) * d2u(b, k, j) * du(b, l);
                }
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) t3 += gi(i, j) * gi(p, q) * d2u(a, p, i) * d2u(a, q, j);
  return 2.0 * t1 - 2.0 * t2 + 2.0 * t3;
}

/// The same quantity written with the antisymmetrized square.
inline double neg_phi_operator_squares(const Mat& du, const Tensor3& d2u, const Mat& gi) {
  const int n = static_cast<int>(du.cols()), m = static_cast<int>(du.rows());
  double sq = 0.0, t3 = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int p = 0; p < n; ++p)
            for (int k = 0; k < n; ++k)
              for (int q = 0; q < n; ++q)
                for (int l = 0; l < n; ++l) {
                  const double w = gi(i, j) * gi(p, k) * gi(q, l);
                  if (w == 0.0) continue;
                  sq += w * (d2u(a, p, i) * du(a, q) - d2u(a, q, i) * du(a, p)) *
                        (d2u(b, k, j) * du(b, l) - d2u(b, l, j) * du(b, k));
                }
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) t3 += gi(i, j) * gi(p, q) * d2u(a, p, i) * d2u(a, q, j);
  return sq + 2.0 * t3;
}

struct FrameInequalityReport {
  double cross_abs = 0.0;       // |sum_{i, j != k} lambda_j lambda_k h^k_ij h^j_ik|
  double off_diag_sq = 0.0;     // sum_{i, j != k} (h^k_ij)^2
  double margin_cross_terms = 0.0;       // off_diag_sq - cross_abs
  double bracket = 0.0;         // the drift-Laplacian bracket for *dx
  double gradient_sq = 0.0;     // sum_i (sum_j lambda_j h^j_ij)^2 = |grad *dx|^2 / (*dx)^2
  double margin_gradient = 0.0;       // bracket - gradient_sq
  double intermediate_margin = 0.0;  // bracket - (diagonal cross term + sum lambda_i^2 (h^i_ik)^2)
  double square_identity_lhs = 0.0;
  double square_identity_rhs = 0.0;
  double square_identity_discrepancy = 0.0;
  double min_margin() const { return std::min({margin_cross_terms, margin_gradient, intermediate_margin}); }
};

inline FrameInequalityReport frame_inequality_check(const PseudoFrameData& d) {
  d.validate();
  const int n = d.n;
  FrameInequalityReport r;
  double cross = 0.0, diag_cross = 0.0, all_sq = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (j == k) continue;
        cross += d.lam(j) * d.lam(k) * d.hk(k, i, j) * d.hk(j, i, k);
        diag_cross += d.lam(j) * d.lam(k) * d.hk(j, i, j) * d.hk(k, i, k);
        r.off_diag_sq += d.hk(k, i, j) * d.hk(k, i, j);
      }
  for (int a = 0; a < d.m; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) all_sq += d.h(a, i, j) * d.h(a, i, j);
  r.cross_abs = std::abs(cross);
  r.margin_cross_terms = r.off_diag_sq - r.cross_abs;
  r.bracket = diag_cross - cross + all_sq;
  double lam_sq = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) lam_sq += d.lam(i) * d.lam(i) * d.hk(i, i, k) * d.hk(i, i, k);
  r.intermediate_margin = r.bracket - (diag_cross + lam_sq);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += d.lam(j) * d.hk(j, i, j);
    r.gradient_sq += s * s;
  }
  r.margin_gradient = r.bracket - r.gradient_sq;

  // Coordinate data with du = diag(lambda) and g = diag(1 - lambda^2).
  Mat du = Mat::Zero(d.m, n);
  for (int i = 0; i < std::min(n, d.m); ++i) du(i, i) = d.lambdas(i);
  Tensor3 d2u(d.m, n, n);
  for (int a = 0; a < d.m; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d2u(a, i, j) = d.h(a, i, j) * std::sqrt((1.0 - d.lam(i) * d.lam(i)) * (1.0 - d.lam(j) * d.lam(j)) *
                                                (1.0 - d.lam(a) * d.lam(a)));
  Mat gi = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) gi(i, i) = 1.0 / (1.0 - d.lam(i) * d.lam(i));
  r.square_identity_lhs = neg_phi_operator_sums(du, d2u, gi);
  r.square_identity_rhs = neg_phi_operator_squares(du, d2u, gi);
  r.square_identity_discrepancy = std::abs(r.square_identity_lhs - r.square_identity_rhs);
  return r;
}

struct DecayRow {
  double radius = 0.0;
  double max_ratio = 0.0;  // max over directions of |log det g| / |x|
  double min_detg = 1.0;
  int failed_samples = 0;  // samples that were not spacelike
};

struct DecayProfile {
  std::vector<DecayRow> rows;
  std::vector<std::string> failures;
  std::string trend;  // "decaying", "growing" or "flat"
  bool hypothesis_suspect = false;  // ratio grows with radius
};

inline DecayProfile decay_diagnostic(const GraphSpec& spec, const std::vector<double>& radii, int directions = 64) {
  if (radii.empty()) throw Error(ErrorKind::invalid_argument, "decay diagnostic needs radii");
  for (std::size_t k = 0; k < radii.size(); ++k)
    if (!(radii[k] > 0.0) || (k > 0 && !(radii[k] > radii[k - 1])))
      throw Error(ErrorKind::invalid_radius, "radii must be positive and increasing");
  const auto dirs = sphere_directions(spec.n, directions);
  DecayProfile prof;
  for (double R : radii) {
    DecayRow row{R, 0.0, std::numeric_limits<double>::infinity(), 0};
    for (const auto& d : dirs) {
      const Vec x = R * d;
      const Jet jet = eval_jet(spec, x, 1);
      const Vec lam = linalg::svd(jet.du).sigma;
      try {
        require_spacelike(lam);
      } catch (const Error& e) {
        ++row.failed_samples;
        if (prof.failures.size() < 32) prof.failures.push_back("radius " + std::to_string(R) + ": " + e.what());
        continue;
      }
      double logdet = 0.0;
      for (int i = 0; i < lam.size(); ++i) logdet += std::log1p(-lam(i)) + std::log1p(lam(i));
      row.max_ratio = std::max(row.max_ratio, std::abs(logdet) / R);
      row.min_detg = std::min(row.min_detg, std::exp(logdet));
    }
    prof.rows.push_back(row);
  }
  const double first = prof.rows.front().max_ratio, last = prof.rows.back().max_ratio;
  if (prof.rows.size() < 2 || std::abs(last - first) <= 1e-12 * std::max(1.0, first))
    prof.trend = "flat";
  else
    prof.trend = last < first ? "decaying" : "growing";
  prof.hypothesis_suspect = prof.trend == "growing";
  return prof;
}

}  // namespace ssg
