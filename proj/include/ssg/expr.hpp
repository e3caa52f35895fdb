#pragma once

// Closed-form scalar expressions over R^n with exact derivatives to order 4.

#include "ssg/core.hpp"
#include "ssg/rational.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <variant>

namespace ssg {

/// Value and derivatives of a scalar field at a point. Derivative tensors
/// are fully symmetric; entries for order > `order` are left empty.
struct ScalarJet {
  int order = 0;
  double value = 0.0;
  Vec grad;
  Mat hess;
  Tensor3 d3;
  Tensor4 d4;
};

namespace detail {

/// Fills every derivative of order 1..order of a jet from a callback that
/// is only evaluated on sorted index tuples; permutations receive copies so
/// the symmetry is exact.
inline void fill_symmetric(ScalarJet& jet, int n, int order,
                           const std::function<double(std::span<const int>)>& f) {
  if (order >= 1) {
    jet.grad = Vec(n);
    for (int i = 0; i < n; ++i) {
      const int idx[1] = {i};
      jet.grad(i) = f(idx);
    }
  }
  if (order >= 2) {
    jet.hess = Mat(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const int idx[2] = {i, j};
        jet.hess(i, j) = jet.hess(j, i) = f(idx);
      }
  }
  if (order >= 3) {
    jet.d3 = Tensor3(n, n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k) {
          std::array<int, 3> idx{i, j, k};
          const double v = f(idx);
          do {
            jet.d3(idx[0], idx[1], idx[2]) = v;
          } while (std::next_permutation(idx.begin(), idx.end()));
        }
  }
  if (order >= 4) {
    jet.d4 = Tensor4(n, n, n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k)
          for (int l = k; l < n; ++l) {
            std::array<int, 4> idx{i, j, k, l};
            const double v = f(idx);
            do {
              jet.d4(idx[0], idx[1], idx[2], idx[3]) = v;
            } while (std::next_permutation(idx.begin(), idx.end()));
          }
  }
}

inline double ipow(double x, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

inline double delta(int i, int j) { return i == j ? 1.0 : 0.0; }

}  // namespace detail

struct Monomial {
  Rational coef;
  std::vector<int> exps;  // one exponent per variable
};

struct Polynomial {
  std::vector<Monomial> terms;

  int degree() const {
    int d = 0;
    for (const auto& t : terms) {
      int s = 0;
      for (int e : t.exps) s += e;
      if (t.coef.num != 0) d = std::max(d, s);
    }
    return d;
  }
};

/// b . x
struct LinearForm {
  Vec coeffs;
};

/// c |x|^2 / 2
struct IsoQuadratic {
  double c = 1.0;
};

/// F(|x|^2) for a named profile F; smooth at the origin by construction.
struct Radial {
  enum class Profile { gaussian, poly_r2, log1p };
  Profile profile = Profile::gaussian;
  double a = 1.0;  // amplitude (gaussian, log1p)
  double b = 1.0;  // rate (gaussian, log1p)
  std::vector<double> coeffs;  // poly_r2: sum_k coeffs[k] * rho^k

  /// F^{(k)}(rho), k = 0..4.
  std::array<double, 5> derivs(double rho) const {
    std::array<double, 5> d{};
    switch (profile) {
      case Profile::gaussian: {
        const double e = a * std::exp(-b * rho);
        double f = 1.0;
        for (int k = 0; k < 5; ++k, f *= -b) d[k] = f * e;
        break;
      }
      case Profile::poly_r2: {
        for (int k = 0; k < 5; ++k) {
          double s = 0.0;
          for (int p = k; p < static_cast<int>(coeffs.size()); ++p) {
            double fall = 1.0;
            for (int q = 0; q < k; ++q) fall *= (p - q);
            s += coeffs[p] * fall * detail::ipow(rho, p - k);
          }
          d[k] = s;
        }
        break;
      }
      case Profile::log1p: {
        const double w = 1.0 + b * rho;
        d[0] = a * std::log1p(b * rho);
        d[1] = a * b / w;
        d[2] = -a * b * b / (w * w);
        d[3] = 2.0 * a * b * b * b / (w * w * w);
        d[4] = -6.0 * a * b * b * b * b / (w * w * w * w);
        break;
      }
    }
    return d;
  }
};

/// f(x_axis) for a named one-variable profile.
struct Axial {
  enum class Profile { exp, sin, erf_ramp };
  Profile profile = Profile::exp;
  int axis = 0;
  double a = 1.0;
  double b = 1.0;

  /// f^{(k)}(t), k = 0..4.
  std::array<double, 5> derivs(double t) const {
    std::array<double, 5> d{};
    switch (profile) {
      case Profile::exp: {
        const double e = a * std::exp(b * t);
        double f = 1.0;
        for (int k = 0; k < 5; ++k, f *= b) d[k] = f * e;
        break;
      }
      case Profile::sin: {
        const double s = std::sin(b * t), c = std::cos(b * t);
        d[0] = a * s;
        d[1] = a * b * c;
        d[2] = -a * b * b * s;
        d[3] = -a * b * b * b * c;
        d[4] = a * b * b * b * b * s;
        break;
      }
      case Profile::erf_ramp: {
        // a (t - (sqrt(pi)/2) erf t): slope a (1 - e^{-t^2})
        const double g = std::exp(-t * t);
        d[0] = a * (t - 0.5 * std::sqrt(std::numbers::pi) * std::erf(t));
        d[1] = a * (1.0 - g);
        d[2] = a * 2.0 * t * g;
        d[3] = a * (2.0 - 4.0 * t * t) * g;
        d[4] = a * (-12.0 * t + 8.0 * t * t * t) * g;
        break;
      }
    }
    return d;
  }
};

class ScalarExpr;

/// outer * f(inner * y); used for the potential rescalings.
struct Scaled {
  Rational outer{1};
  double inner = 1.0;
  std::shared_ptr<const ScalarExpr> base;
};

class ScalarExpr {
 public:
  using Node = std::variant<Polynomial, LinearForm, IsoQuadratic, Radial, Axial, Scaled>;

  ScalarExpr() : node_(Polynomial{}) {}
  ScalarExpr(Node node) : node_(std::move(node)) {}

  const Node& node() const { return node_; }

  /// Jet up to order 4 at x (x.size() is the domain dimension).
  ScalarJet jet(const Vec& x, int order) const {
    if (order < 0 || order > 4) throw Error(ErrorKind::unsupported_order, "scalar jets support order <= 4");
    const int n = static_cast<int>(x.size());
    ScalarJet out;
    out.order = order;
    std::visit([&](const auto& e) { eval(e, x, n, order, out); }, node_);
    return out;
  }

  double value(const Vec& x) const { return jet(x, 0).value; }

  /// Polynomial degree, or -1 for analytic builtins.
  int poly_degree() const {
    if (const auto* p = std::get_if<Polynomial>(&node_)) return p->degree();
    if (std::holds_alternative<LinearForm>(node_)) return 1;
    if (std::holds_alternative<IsoQuadratic>(node_)) return 2;
    if (const auto* s = std::get_if<Scaled>(&node_)) return s->base->poly_degree();
    return -1;
  }

 private:
  static void eval(const Polynomial& p, const Vec& x, int n, int order, ScalarJet& out) {
    for (const auto& t : p.terms)
      if (static_cast<int>(t.exps.size()) != n)
        throw Error(ErrorKind::invalid_spec, "monomial arity does not match point dimension");
    auto term_deriv = [&](const Monomial& t, std::span<const int> idx) {
      int counts[16] = {0};
      for (int i : idx) ++counts[i];
      double v = t.coef.value();
      for (int k = 0; k < n; ++k) {
        const int e = t.exps[k];
        const int c = counts[k];
        if (c > e) return 0.0;
        double fall = 1.0;
        for (int q = 0; q < c; ++q) fall *= (e - q);
        v *= fall * detail::ipow(x(k), e - c);
      }
      return v;
    };
    if (n > 16) throw Error(ErrorKind::invalid_spec, "dimension too large");
    out.value = 0.0;
    for (const auto& t : p.terms) out.value += term_deriv(t, {});
    detail::fill_symmetric(out, n, order, [&](std::span<const int> idx) {
      double s = 0.0;
      for (const auto& t : p.terms) s += term_deriv(t, idx);
      return s;
    });
  }

  static void eval(const LinearForm& l, const Vec& x, int n, int order, ScalarJet& out) {
    if (l.coeffs.size() != n) throw Error(ErrorKind::invalid_spec, "linear form arity mismatch");
    out.value = l.coeffs.dot(x);
    detail::fill_symmetric(out, n, order, [&](std::span<const int> idx) {
      return idx.size() == 1 ? l.coeffs(idx[0]) : 0.0;
    });
  }

  static void eval(const IsoQuadratic& q, const Vec& x, int n, int order, ScalarJet& out) {
    out.value = 0.5 * q.c * x.squaredNorm();
    detail::fill_symmetric(out, n, order, [&](std::span<const int> idx) {
      if (idx.size() == 1) return q.c * x(idx[0]);
      if (idx.size() == 2) return idx[0] == idx[1] ? q.c : 0.0;
      return 0.0;
    });
  }

  static void eval(const Radial& r, const Vec& x, int n, int order, ScalarJet& out) {
    using detail::delta;
    const auto f = r.derivs(x.squaredNorm());
    out.value = f[0];
    detail::fill_symmetric(out, n, order, [&](std::span<const int> id) {
      switch (id.size()) {
        case 1: return 2.0 * f[1] * x(id[0]);
        case 2: {
          const int i = id[0], j = id[1];
          return 4.0 * f[2] * x(i) * x(j) + 2.0 * f[1] * delta(i, j);
        }
        case 3: {
          const int i = id[0], j = id[1], k = id[2];
          return 8.0 * f[3] * x(i) * x(j) * x(k) +
                 4.0 * f[2] * (delta(i, j) * x(k) + delta(i, k) * x(j) + delta(j, k) * x(i));
        }
        default: {
          const int i = id[0], j = id[1], k = id[2], l = id[3];
          return 16.0 * f[4] * x(i) * x(j) * x(k) * x(l) +
                 8.0 * f[3] *
                     (delta(i, j) * x(k) * x(l) + delta(i, k) * x(j) * x(l) + delta(i, l) * x(j) * x(k) +
                      delta(j, k) * x(i) * x(l) + delta(j, l) * x(i) * x(k) + delta(k, l) * x(i) * x(j)) +
                 4.0 * f[2] * (delta(i, j) * delta(k, l) + delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k));
        }
      }
    });
  }

  static void eval(const Axial& a, const Vec& x, int n, int order, ScalarJet& out) {
    if (a.axis < 0 || a.axis >= n) throw Error(ErrorKind::invalid_spec, "axial component axis out of range");
    const auto f = a.derivs(x(a.axis));
    out.value = f[0];
    detail::fill_symmetric(out, n, order, [&](std::span<const int> id) {
      for (int i : id)
        if (i != a.axis) return 0.0;
      return f[id.size()];
    });
  }

  static void eval(const Scaled& s, const Vec& x, int n, int order, ScalarJet& out) {
    const ScalarJet b = s.base->jet(s.inner * x, order);
    const double k = s.outer.value();
    out.value = k * b.value;
    detail::fill_symmetric(out, n, order, [&](std::span<const int> id) {
      const double f = k * detail::ipow(s.inner, static_cast<int>(id.size()));
      switch (id.size()) {
        case 1: return f * b.grad(id[0]);
        case 2: return f * b.hess(id[0], id[1]);
        case 3: return f * b.d3(id[0], id[1], id[2]);
        default: return f * b.d4(id[0], id[1], id[2], id[3]);
      }
    });
  }

  Node node_;
};

/// Scalar field sampler returning jets; ScalarExpr is the usual source.
using ScalarField = std::function<ScalarJet(const Vec&, int)>;

inline ScalarField as_field(ScalarExpr e) {
  return [e = std::move(e)](const Vec& x, int order) { return e.jet(x, order); };
}

// Convenience constructors.
inline ScalarExpr make_monomial_poly(std::vector<Monomial> terms) { return ScalarExpr(Polynomial{std::move(terms)}); }
inline ScalarExpr make_linear(Vec b) { return ScalarExpr(LinearForm{std::move(b)}); }
inline ScalarExpr make_iso_quadratic(double c) { return ScalarExpr(IsoQuadratic{c}); }
inline ScalarExpr make_constant(int n, Rational c) {
  return ScalarExpr(Polynomial{{Monomial{c, std::vector<int>(n, 0)}}});
}
inline ScalarExpr make_axial(Axial::Profile p, int axis, double a, double b) {
  return ScalarExpr(Axial{p, axis, a, b});
}
inline ScalarExpr make_scaled(Rational outer, double inner, ScalarExpr base) {
  return ScalarExpr(Scaled{outer, inner, std::make_shared<const ScalarExpr>(std::move(base))});
}

}  // namespace ssg
