#pragma once

// Seeded generators for test maps, potentials and frame data.

#include "ssg/identity_lab.hpp"
#include "ssg/lagrangian.hpp"
#include "ssg/linalg.hpp"
#include "ssg/pseudo_euclid.hpp"

#include <random>

namespace ssg::corpus {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Random linear map with operator norm exactly `norm`.
inline Mat random_matrix_with_norm(int m, int n, double norm, Rng& rng) {
  Mat A(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = uniform(rng, -1.0, 1.0);
  const double s = linalg::svd(A).sigma(0);
  return s > 0.0 ? Mat(A * (norm / s)) : A;
}

inline GraphSpec linear_spec(const Mat& A) {
  GraphSpec g{static_cast<int>(A.cols()), static_cast<int>(A.rows()), {}};
  for (int a = 0; a < A.rows(); ++a) g.components.push_back(make_linear(A.row(a).transpose()));
  return g;
}

/// All exponent vectors of total degree <= deg in n variables.
inline std::vector<std::vector<int>> exponents_up_to(int n, int deg) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(n, 0);
  std::function<void(int, int)> rec = [&](int var, int left) {
    if (var == n) {
      out.push_back(e);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      e[var] = k;
      rec(var + 1, left - k);
    }
    e[var] = 0;
  };
  rec(0, deg);
  return out;
}

/// Random polynomial with rational coefficients p/q, |p| <= num_max, q in 1..den_max,
/// scaled down by (1 + total degree) to keep values moderate near the origin.
inline ScalarExpr random_polynomial(int n, int deg, Rng& rng, int num_max = 6, int den_max = 8) {
  std::uniform_int_distribution<int> num(-num_max, num_max), den(1, den_max);
  std::vector<Monomial> terms;
  for (const auto& e : exponents_up_to(n, deg)) {
    int tot = 0;
    for (int k : e) tot += k;
    const int p = num(rng);
    if (p == 0) continue;
    terms.push_back(Monomial{Rational(p, den(rng) * (1 + tot)), e});
  }
  return make_monomial_poly(std::move(terms));
}

inline GraphSpec random_poly_spec(int n, int m, int deg, Rng& rng) {
  GraphSpec g{n, m, {}};
  for (int a = 0; a < m; ++a) g.components.push_back(random_polynomial(n, deg, rng));
  return g;
}

inline PotentialSpec random_potential(int n, int deg, Rng& rng) { return PotentialSpec{n, random_polynomial(n, deg, rng)}; }

/// Random symmetric frame tensor with entries in [-scale, scale].
inline Tensor3 random_symmetric_tensor(int m, int n, double scale, Rng& rng) {
  Tensor3 t(m, n, n);
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) t(a, i, j) = t(a, j, i) = uniform(rng, -scale, scale);
  return t;
}

inline FrameData random_frame_data(int n, int m, double lambda_max, Rng& rng) {
  FrameData d{n, m, Vec::Zero(n), random_symmetric_tensor(m, n, 2.0, rng)};
  for (int i = 0; i < std::min(n, m); ++i) d.lambdas(i) = uniform(rng, 0.0, lambda_max);
  return d;
}

/// Frame data with lambda_p lambda_q <= 1 for p != q: at most one lambda exceeds 1,
/// and it is bounded by the reciprocal of the next largest.
inline FrameData random_frame_data_bounded_products(int n, int m, Rng& rng) {
  FrameData d = random_frame_data(n, m, 1.0, rng);
  const int k = std::min(n, m);
  if (k >= 1) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    const int big = pick(rng);
    double second = 0.0;
    for (int i = 0; i < k; ++i)
      if (i != big) second = std::max(second, d.lambdas(i));
    const double cap = second > 0.0 ? std::min(4.0, 1.0 / second) : 4.0;
    d.lambdas(big) = uniform(rng, 0.0, cap);
  }
  return d;
}

inline PseudoFrameData random_pseudo_frame_data(int n, int m, double lambda_max, Rng& rng) {
  PseudoFrameData d{n, m, Vec::Zero(n), random_symmetric_tensor(m, n, 2.0, rng)};
  for (int i = 0; i < std::min(n, m); ++i) d.lambdas(i) = uniform(rng, -lambda_max, lambda_max);
  return d;
}

/// u^a = lambda_a x_a + (quadratic perturbation) so du(0) = diag(lambda) exactly.
inline GraphSpec adapted_pseudo_spec(int n, int m, const std::vector<Rational>& lambdas, Rng& rng) {
  GraphSpec g{n, m, {}};
  std::uniform_int_distribution<int> num(-3, 3), den(2, 6);
  for (int a = 0; a < m; ++a) {
    std::vector<Monomial> terms;
    if (a < n) {
      std::vector<int> e(n, 0);
      e[a] = 1;
      terms.push_back(Monomial{lambdas[a], e});
    }
    for (const auto& e : exponents_up_to(n, 3)) {
      int tot = 0;
      for (int k : e) tot += k;
      if (tot < 2) continue;
      const int p = num(rng);
      if (p != 0) terms.push_back(Monomial{Rational(p, den(rng) * tot), e});
    }
    g.components.push_back(make_monomial_poly(std::move(terms)));
  }
  return g;
}

}  // namespace ssg::corpus
