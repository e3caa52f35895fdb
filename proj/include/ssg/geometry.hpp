#pragma once

// Induced geometry of a graph (x, u(x)) in R^{n+m} with either the
// Euclidean metric or the index-m pseudo-Euclidean metric.

#include "ssg/core.hpp"
#include "ssg/jets.hpp"
#include "ssg/linalg.hpp"

#include <sstream>

namespace ssg {

struct Signature {
  enum class Kind { euclidean, pseudo };
  Kind kind = Kind::euclidean;

  static Signature euclidean() { return {Kind::euclidean}; }
  static Signature pseudo() { return {Kind::pseudo}; }

  bool is_pseudo() const { return kind == Kind::pseudo; }
  /// The sign in g_ij = delta_ij +/- sum_a u^a_i u^a_j.
  double sign() const { return is_pseudo() ? -1.0 : 1.0; }
  const char* name() const { return is_pseudo() ? "pseudo" : "euclidean"; }
};

/// Pseudo geometry requires max singular value <= 1 - kSpacelikeMargin.
inline constexpr double kSpacelikeMargin = 1e-8;

inline void require_spacelike(const Vec& lambdas) {
  const double lmax = lambdas.size() ? lambdas.cwiseAbs().maxCoeff() : 0.0;
  if (lmax > 1.0 - kSpacelikeMargin) {
    std::ostringstream os;
    os.precision(17);
    os << "graph is not spacelike (max singular value " << lmax << ")";
    throw Error(ErrorKind::not_spacelike, os.str());
  }
}

struct MetricPack {
  Mat g;
  Mat ginv;
  double detg = 1.0;
  double nu = 1.0;  // minimum eigenvalue of g
};

inline Mat metric_from_du(const Mat& du, Signature sig) {
  const int n = static_cast<int>(du.cols());
  return Mat::Identity(n, n) + sig.sign() * (du.transpose() * du);
}

inline MetricPack induced_metric(const Jet& jet, Signature sig) {
  if (jet.order < 1) throw Error(ErrorKind::unsupported_order, "induced metric needs a jet of order >= 1");
  if (sig.is_pseudo()) require_spacelike(linalg::svd(jet.du).sigma);
  MetricPack mp;
  mp.g = metric_from_du(jet.du, sig);
  const auto f = linalg::spd_factor(mp.g);
  mp.ginv = f.inverse;
  mp.detg = f.det;
  mp.nu = linalg::sym_eigen(mp.g).values(0);
  return mp;
}

struct SingularFrame {
  Vec lambdas;  // padded with zeros to max(n, m)
  Mat P;        // n x n, rows are the new domain axes
  Mat Q;        // m x m, rows are the new target axes
  Tensor3 rotated_hessians;  // u'^a_pi = Q_ab u^b_jk P_pj P_ik
};

inline SingularFrame singular_frame(const Jet& jet, Signature sig) {
  if (jet.order < 2) throw Error(ErrorKind::unsupported_order, "singular frame needs a jet of order >= 2");
  const int n = jet.n(), m = jet.m();
  const auto s = linalg::svd(jet.du);
  if (sig.is_pseudo()) require_spacelike(s.sigma);
  SingularFrame fr;
  fr.lambdas = Vec::Zero(std::max(n, m));
  fr.lambdas.head(s.sigma.size()) = s.sigma;
  fr.P = s.V.transpose();
  fr.Q = s.U.transpose();
  fr.rotated_hessians = rotate_jet(Jet{jet.x, 2, jet.u, jet.du, jet.d2u, {}}, fr.P, fr.Q).d2u;
  return fr;
}

struct CurvaturePack {
  Tensor3 h;  // h^a_ij, per normal n_a
  Vec Hcomp;  // H^a
  double B2 = 0.0;
  Vec tangential_X;  // <X, d_i X>
};

/// Inner product <X, d_i X> under the signature, for X = (x, u).
inline Vec tangential_position(const Jet& jet, Signature sig) {
  return jet.x + sig.sign() * (jet.du.transpose() * jet.u);
}

inline CurvaturePack curvature_pack(const Jet& jet, Signature sig) {
  if (jet.order < 2) throw Error(ErrorKind::unsupported_order, "curvature needs a jet of order >= 2");
  const int n = jet.n(), m = jet.m();
  const MetricPack mp = induced_metric(jet, sig);
  CurvaturePack cp;
  cp.h = Tensor3(m, n, n);
  cp.Hcomp = Vec(m);
  for (int a = 0; a < m; ++a) {
    const double w = std::sqrt(1.0 + sig.sign() * jet.du.row(a).squaredNorm());
    double tr = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        cp.h(a, i, j) = jet.d2u(a, i, j) / w;
        tr += mp.ginv(i, j) * jet.d2u(a, i, j);
      }
    cp.Hcomp(a) = tr / w;
  }
  // |B|^2 = g^ik g^jl u^a_ij N_ab u^b_kl with the normal-bundle Gram matrix
  // N = (I +/- du du^T)^{-1}.
  const Mat N = linalg::spd_factor(Mat::Identity(m, m) + sig.sign() * (jet.du * jet.du.transpose())).inverse;
  double b2 = 0.0;
  std::vector<Mat> sandwiched(m);
  for (int a = 0; a < m; ++a) sandwiched[a] = mp.ginv * jet.hessian(a) * mp.ginv;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      if (N(a, b) == 0.0) continue;
      b2 += N(a, b) * (sandwiched[a].cwiseProduct(jet.hessian(b))).sum();
    }
  cp.B2 = b2;
  cp.tangential_X = tangential_position(jet, sig);
  return cp;
}

/// R^a = g^ij u^a_ij + u^a - x . Du^a; zero exactly on self-shrinkers.
inline Vec shrinker_residual(const Jet& jet, Signature sig) {
  if (jet.order < 2) throw Error(ErrorKind::unsupported_order, "residual needs a jet of order >= 2");
  const MetricPack mp = induced_metric(jet, sig);
  const int m = jet.m();
  Vec r(m);
  for (int a = 0; a < m; ++a)
    r(a) = (mp.ginv.cwiseProduct(jet.hessian(a))).sum() + jet.u(a) - jet.x.dot(jet.du.row(a));
  return r;
}

/// Residual of the same contraction with an arbitrary coefficient matrix a^ij.
inline Vec elliptic_residual(const Jet& jet, const Mat& a) {
  const int m = jet.m();
  Vec r(m);
  for (int al = 0; al < m; ++al)
    r(al) = (a.cwiseProduct(jet.hessian(al))).sum() + jet.u(al) - jet.x.dot(jet.du.row(al));
  return r;
}

}  // namespace ssg
