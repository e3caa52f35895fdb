#pragma once

// Graph maps u: R^n -> R^m given in closed form, and their exact jets.

#include "ssg/core.hpp"
#include "ssg/expr.hpp"

#include <string>
#include <vector>

namespace ssg {

/// Closed-form graph map; one scalar expression per target component.
struct GraphSpec {
  int n = 1;
  int m = 1;
  std::vector<ScalarExpr> components;

  static constexpr int kMaxPolyDegree = 4;

  void validate() const {
    if (n < 1 || m < 1) throw Error(ErrorKind::invalid_spec, "graph needs n >= 1 and m >= 1");
    if (static_cast<int>(components.size()) != m)
      throw Error(ErrorKind::invalid_spec, "expected " + std::to_string(m) + " components, got " +
                                               std::to_string(components.size()));
    for (const auto& c : components)
      if (c.poly_degree() > kMaxPolyDegree)
        throw Error(ErrorKind::invalid_spec, "polynomial components are limited to degree 4");
  }
};

/// Point x with u and its derivatives (u^a_i, u^a_ij, u^a_ijp).
struct Jet {
  Vec x;
  int order = 0;
  Vec u;        // m
  Mat du;       // m x n
  Tensor3 d2u;  // m x n x n
  Tensor4 d3u;  // m x n x n x n, present iff order == 3

  int n() const { return static_cast<int>(x.size()); }
  int m() const { return static_cast<int>(u.size()); }
  Mat hessian(int a) const { return d2u.slice(a); }
};

inline void require_finite_point(const Vec& x) {
  if (!x.allFinite()) throw Error(ErrorKind::invalid_point, "point has non-finite coordinates");
}

inline Jet eval_jet(const GraphSpec& spec, const Vec& x, int order) {
  if (order < 0 || order > 3) throw Error(ErrorKind::unsupported_order, "graph jets support order 0..3");
  require_finite_point(x);
  if (x.size() != spec.n)
    throw Error(ErrorKind::invalid_point, "point dimension " + std::to_string(x.size()) +
                                              " does not match n = " + std::to_string(spec.n));
  const int n = spec.n, m = spec.m;
  Jet jet;
  jet.x = x;
  jet.order = order;
  jet.u = Vec(m);
  if (order >= 1) jet.du = Mat(m, n);
  if (order >= 2) jet.d2u = Tensor3(m, n, n);
  if (order >= 3) jet.d3u = Tensor4(m, n, n, n);
  for (int a = 0; a < m; ++a) {
    const ScalarJet s = spec.components[a].jet(x, order);
    jet.u(a) = s.value;
    if (order >= 1) jet.du.row(a) = s.grad.transpose();
    if (order >= 2)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) jet.d2u(a, i, j) = s.hess(i, j);
    if (order >= 3)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) jet.d3u(a, i, j, k) = s.d3(i, j, k);
  }
  return jet;
}

/// Jet of the map y -> Q u(P^T y) at y = P x, for orthogonal P (n x n) and
/// Q (m x m).
inline Jet rotate_jet(const Jet& jet, const Mat& P, const Mat& Q) {
  const int n = jet.n(), m = jet.m();
  Jet r;
  r.order = jet.order;
  r.x = P * jet.x;
  r.u = Q * jet.u;
  if (jet.order >= 1) r.du = Q * jet.du * P.transpose();
  if (jet.order >= 2) {
    // Contract one index at a time.
    Tensor3 t1(m, n, n);
    for (int a = 0; a < m; ++a)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int b = 0; b < m; ++b) s += Q(a, b) * jet.d2u(b, j, k);
          t1(a, j, k) = s;
        }
    r.d2u = Tensor3(m, n, n);
    for (int a = 0; a < m; ++a) {
      const Mat h = P * t1.slice(a) * P.transpose();
      for (int p = 0; p < n; ++p)
        for (int i = 0; i < n; ++i) r.d2u(a, p, i) = h(p, i);
    }
  }
  if (jet.order >= 3) {
    r.d3u = Tensor4(m, n, n, n);
    for (int a = 0; a < m; ++a)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          for (int s = 0; s < n; ++s) {
            double acc = 0.0;
            for (int b = 0; b < m; ++b) {
              if (Q(a, b) == 0.0) continue;
              for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                  for (int k = 0; k < n; ++k)
                    acc += Q(a, b) * P(p, i) * P(q, j) * P(s, k) * jet.d3u(b, i, j, k);
            }
            r.d3u(a, p, q, s) = acc;
          }
  }
  return r;
}

}  // namespace ssg
