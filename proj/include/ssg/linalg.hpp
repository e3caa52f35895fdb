#pragma once

// Small dense decompositions (dimensions <= 8): cyclic Jacobi for symmetric
// eigenproblems and one-sided (Hestenes) Jacobi for the SVD.

#include "ssg/core.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace ssg::linalg {

inline constexpr int kMaxSweeps = 100;
inline constexpr double kOffDiagTol = 1e-14;

struct SymEigen {
  Vec values;   // ascending
  Mat vectors;  // columns
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
inline SymEigen sym_eigen(const Mat& a_in, double tol = kOffDiagTol, int max_sweeps = kMaxSweeps) {
  const int n = static_cast<int>(a_in.rows());
  if (a_in.cols() != n) throw Error(ErrorKind::invalid_argument, "sym_eigen needs a square matrix");
  Mat a = 0.5 * (a_in + a_in.transpose());
  Mat v = Mat::Identity(n, n);
  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());

  auto off = [&] {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };

  int sweep = 0;
  while (off() > tol * scale) {
    if (++sweep > max_sweeps)
      throw Error(ErrorKind::decomposition_failure, "Jacobi eigensolver did not converge");
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
  SymEigen out{Vec(n), Mat(n, n)};
  for (int k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

struct Svd {
  Vec sigma;  // min(m, n) values, descending, >= 0
  Mat U;      // m x m orthogonal
  Mat V;      // n x n orthogonal; A = U * diag(sigma) * V^T
};

/// One-sided Jacobi SVD: orthogonalizes the columns of A by right rotations,
/// which diagonalizes A^T A implicitly.
inline Svd svd(const Mat& a, double tol = kOffDiagTol, int max_sweeps = kMaxSweeps) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  Mat w = a;
  Mat v = Mat::Identity(n, n);

  // Columns below this squared norm are rounding noise of a rank-deficient A.
  const double noise = std::pow(8.0 * std::numeric_limits<double>::epsilon() * a.norm(), 2);

  bool rotated = true;
  int sweep = 0;
  while (rotated) {
    if (++sweep > max_sweeps)
      throw Error(ErrorKind::decomposition_failure, "one-sided Jacobi SVD did not converge");
    rotated = false;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (gamma == 0.0 || alpha <= noise || beta <= noise || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int k = 0; k < m; ++k) {
          const double wp = w(k, p), wq = w(k, q);
          w(k, p) = c * wp - s * wq;
          w(k, q) = s * wp + c * wq;
        }
        for (int k = 0; k < n; ++k) {
          const double vp = v(k, p), vq = v(k, q);
          v(k, p) = c * vp - s * vq;
          v(k, q) = s * vp + c * vq;
        }
      }
    }
  }

  std::vector<double> norms(n);
  for (int j = 0; j < n; ++j) norms[j] = w.col(j).norm();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return norms[i] > norms[j]; });

  const int r = std::min(m, n);
  Svd out{Vec::Zero(r), Mat::Zero(m, m), Mat(n, n)};
  for (int k = 0; k < n; ++k) out.V.col(k) = v.col(order[k]);

  const double smax = n > 0 ? norms[order[0]] : 0.0;
  const double cutoff = smax * std::numeric_limits<double>::epsilon() * std::max(m, n);
  int filled = 0;
  for (int k = 0; k < r; ++k) {
    const double s = norms[order[k]];
    out.sigma(k) = s;
    if (s > cutoff && s > 0.0) {
      out.U.col(k) = w.col(order[k]) / s;
      ++filled;
    }
  }
  // Complete U with standard basis vectors (Gram-Schmidt, done twice).
  std::vector<int> have;
  for (int k = 0; k < filled; ++k) have.push_back(k);
  int next = filled;
  for (int e = 0; e < m && next < m; ++e) {
    Vec cand = Vec::Unit(m, e);
    for (int pass = 0; pass < 2; ++pass)
      for (int k : have) cand -= out.U.col(k).dot(cand) * out.U.col(k);
    const double nrm = cand.norm();
    if (nrm < 1e-8) continue;
    // Slots for zero singular values come first, in index order.
    int slot = -1;
    for (int k = 0; k < m; ++k) {
      if (std::find(have.begin(), have.end(), k) == have.end()) {
        slot = k;
        break;
      }
    }
    out.U.col(slot) = cand / nrm;
    have.push_back(slot);
    ++next;
  }
  return out;
}

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix with
/// the sign convention R_ii > 0).
template <class Rng>
Mat random_orthogonal(int n, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = nd(rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

struct SpdFactor {
  Mat inverse;
  double det = 1.0;
  double log_det = 0.0;
};

/// Inverse and determinant of a symmetric positive-definite matrix.
inline SpdFactor spd_factor(const Mat& g) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::invalid_coefficients, "matrix is not positive definite");
  SpdFactor f;
  const int n = static_cast<int>(g.rows());
  f.inverse = llt.solve(Mat::Identity(n, n));
  f.inverse = 0.5 * (f.inverse + f.inverse.transpose());
  const Mat& l = llt.matrixLLT();
  for (int i = 0; i < n; ++i) f.log_det += 2.0 * std::log(l(i, i));
  f.det = std::exp(f.log_det);
  return f;
}

inline bool is_symmetric(const Mat& a, double tol = 0.0) {
  return a.rows() == a.cols() && (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace ssg::linalg
