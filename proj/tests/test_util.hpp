#pragma once

#include "ssg/corpus.hpp"
#include "ssg/ssg.hpp"

#include <gtest/gtest.h>

namespace ssg::testing {

inline Vec vec(std::initializer_list<double> v) {
  Vec x(v.size());
  int i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

inline Monomial mono(Rational c, std::vector<int> e) { return Monomial{c, std::move(e)}; }

inline GraphSpec scalar_graph(int n, ScalarExpr e) { return GraphSpec{n, 1, {std::move(e)}}; }

inline GraphSpec zero_graph(int n, int m) {
  GraphSpec g{n, m, {}};
  for (int a = 0; a < m; ++a) g.components.push_back(make_constant(n, Rational(0)));
  return g;
}

/// u = x^2 on the line.
inline GraphSpec square_graph() { return scalar_graph(1, make_monomial_poly({mono(1, {2})})); }

template <class F>
ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an ssg::Error";
  return ErrorKind::invalid_argument;
}

}  // namespace ssg::testing
