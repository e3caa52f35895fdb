#pragma once

// JSON schema for graph specs, potential specs, signatures and grids.
// Schema violations throw Error(invalid_spec) with a JSON pointer.

#include "ssg/geometry.hpp"
#include "ssg/jets.hpp"
#include "ssg/lagrangian.hpp"
#include "ssg/sampling.hpp"

#include "json.hpp"  // vendored nlohmann/json

namespace ssg::json {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& ptr, const std::string& msg) {
  throw Error(ErrorKind::invalid_spec, (ptr.empty() ? "/" : ptr) + ": " + msg);
}

inline const json& at(const json& j, const std::string& key, const std::string& ptr) {
  if (!j.is_object()) fail(ptr, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(ptr + "/" + key, "missing required field");
  return *it;
}

inline double number(const json& j, const std::string& ptr) {
  if (!j.is_number()) fail(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(ptr, "expected a finite number");
  return v;
}

inline double number_or(const json& j, const std::string& key, double dflt, const std::string& ptr) {
  auto it = j.find(key);
  return it == j.end() ? dflt : number(*it, ptr + "/" + key);
}

inline int integer(const json& j, const std::string& ptr) {
  if (!j.is_number_integer()) fail(ptr, "expected an integer");
  return j.get<int>();
}

inline Rational rational(const json& j, const std::string& ptr) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_string()) {
    try {
      return Rational::parse(j.get<std::string>());
    } catch (const Error& e) {
      fail(ptr, e.what());
    }
  }
  fail(ptr, "expected an integer or a \"p/q\" string");
}

inline Vec vector(const json& j, const std::string& ptr, int expected = -1) {
  if (!j.is_array()) fail(ptr, "expected an array of numbers");
  if (expected >= 0 && static_cast<int>(j.size()) != expected)
    fail(ptr, "expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], ptr + "/" + std::to_string(i));
  return v;
}

/// Parses one scalar component; "linear" with a "matrix" yields several.
inline std::vector<ScalarExpr> components(const json& c, int n, const std::string& ptr) {
  const json& kj = at(c, "kind", ptr);
  if (!kj.is_string()) fail(ptr + "/kind", "expected a string");
  const std::string kind = kj.get<std::string>();
  if (kind == "poly") {
    const json& terms = at(c, "terms", ptr);
    if (!terms.is_array()) fail(ptr + "/terms", "expected an array");
    std::vector<Monomial> mons;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string tp = ptr + "/terms/" + std::to_string(t);
      const Rational coef = rational(at(terms[t], "coef", tp), tp + "/coef");
      const json& ex = at(terms[t], "exps", tp);
      if (!ex.is_array() || static_cast<int>(ex.size()) != n) fail(tp + "/exps", "expected " + std::to_string(n) + " exponents");
      std::vector<int> exps;
      for (std::size_t i = 0; i < ex.size(); ++i) {
        const int e = integer(ex[i], tp + "/exps/" + std::to_string(i));
        if (e < 0) fail(tp + "/exps/" + std::to_string(i), "exponents must be >= 0");
        exps.push_back(e);
      }
      mons.push_back(Monomial{coef, exps});
    }
    return {make_monomial_poly(std::move(mons))};
  }
  if (kind == "linear") {
    if (c.contains("matrix")) {
      const json& M = c["matrix"];
      if (!M.is_array() || M.empty()) fail(ptr + "/matrix", "expected a nonempty list of rows");
      std::vector<ScalarExpr> out;
      for (std::size_t r = 0; r < M.size(); ++r) out.push_back(make_linear(vector(M[r], ptr + "/matrix/" + std::to_string(r), n)));
      return out;
    }
    return {make_linear(vector(at(c, "coeffs", ptr), ptr + "/coeffs", n))};
  }
  if (kind == "iso_quadratic") return {make_iso_quadratic(number(at(c, "c", ptr), ptr + "/c"))};
  if (kind == "radial") {
    const std::string prof = at(c, "profile", ptr).is_string() ? c["profile"].get<std::string>() : "";
    Radial r;
    if (prof == "gaussian") r.profile = Radial::Profile::gaussian;
    else if (prof == "poly_r2") r.profile = Radial::Profile::poly_r2;
    else if (prof == "log1p") r.profile = Radial::Profile::log1p;
    else fail(ptr + "/profile", "expected gaussian, poly_r2 or log1p");
    r.a = number_or(c, "a", 1.0, ptr);
    r.b = number_or(c, "b", 1.0, ptr);
    if (r.profile == Radial::Profile::poly_r2) r.coeffs = to_std(vector(at(c, "coeffs", ptr), ptr + "/coeffs"));
    if (r.profile == Radial::Profile::log1p && !(r.b > 0)) fail(ptr + "/b", "log1p profile needs b > 0");
    return {ScalarExpr(r)};
  }
  if (kind == "axial") {
    const std::string prof = at(c, "profile", ptr).is_string() ? c["profile"].get<std::string>() : "";
    Axial::Profile p;
    if (prof == "exp") p = Axial::Profile::exp;
    else if (prof == "sin") p = Axial::Profile::sin;
    else if (prof == "erf_ramp") p = Axial::Profile::erf_ramp;
    else fail(ptr + "/profile", "expected exp, sin or erf_ramp");
    const int axis = integer(at(c, "axis", ptr), ptr + "/axis");
    if (axis < 0 || axis >= n) fail(ptr + "/axis", "axis out of range");
    return {make_axial(p, axis, number_or(c, "a", 1.0, ptr), number_or(c, "b", 1.0, ptr))};
  }
  if (kind == "scaled") {
    const auto base = components(at(c, "base", ptr), n, ptr + "/base");
    if (base.size() != 1) fail(ptr + "/base", "scaled base must be a single component");
    return {make_scaled(rational(at(c, "outer", ptr), ptr + "/outer"), number(at(c, "inner", ptr), ptr + "/inner"), base[0])};
  }
  fail(ptr + "/kind", "unknown component kind '" + kind + "'");
}

inline GraphSpec graph_spec(const json& j, const std::string& ptr = "") {
  GraphSpec g;
  g.n = integer(at(j, "n", ptr), ptr + "/n");
  g.m = integer(at(j, "m", ptr), ptr + "/m");
  if (g.n < 1 || g.n > 8) fail(ptr + "/n", "n must lie in 1..8");
  if (g.m < 1 || g.m > 8) fail(ptr + "/m", "m must lie in 1..8");
  const json& cs = at(j, "components", ptr);
  if (!cs.is_array()) fail(ptr + "/components", "expected an array");
  for (std::size_t k = 0; k < cs.size(); ++k)
    for (auto& e : components(cs[k], g.n, ptr + "/components/" + std::to_string(k))) g.components.push_back(std::move(e));
  try {
    g.validate();
  } catch (const Error& e) {
    fail(ptr + "/components", e.what());
  }
  return g;
}

inline PotentialSpec potential_spec(const json& j, const std::string& ptr = "") {
  PotentialSpec p;
  p.n = integer(at(j, "n", ptr), ptr + "/n");
  if (p.n < 1 || p.n > 8) fail(ptr + "/n", "n must lie in 1..8");
  const auto v = components(at(j, "v", ptr), p.n, ptr + "/v");
  if (v.size() != 1) fail(ptr + "/v", "potential must be a single scalar component");
  p.v = v[0];
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ptr + "/v", e.what());
  }
  return p;
}

inline Signature signature(const json& j, const std::string& ptr) {
  if (!j.is_string()) fail(ptr, "expected \"euclidean\" or \"pseudo\"");
  const auto s = j.get<std::string>();
  if (s == "euclidean") return Signature::euclidean();
  if (s == "pseudo") return Signature::pseudo();
  fail(ptr, "expected \"euclidean\" or \"pseudo\"");
}

/// {"box": {"lo", "hi", "count"}} | {"points": [[...], ...]} | {"ball": {"radius", "count"}}
inline std::vector<Vec> grid(const json& j, int n, const std::string& ptr) {
  if (!j.is_object()) fail(ptr, "expected a grid object");
  if (j.contains("points")) {
    const json& P = j["points"];
    if (!P.is_array() || P.empty()) fail(ptr + "/points", "expected a nonempty array of points");
    std::vector<Vec> pts;
    for (std::size_t k = 0; k < P.size(); ++k) pts.push_back(vector(P[k], ptr + "/points/" + std::to_string(k), n));
    return pts;
  }
  if (j.contains("box")) {
    const json& b = j["box"];
    const std::string bp = ptr + "/box";
    const double lo = number(at(b, "lo", bp), bp + "/lo"), hi = number(at(b, "hi", bp), bp + "/hi");
    const int count = integer(at(b, "count", bp), bp + "/count");
    if (count < 1 || count > 1000) fail(bp + "/count", "count must lie in 1..1000");
    if (!(hi >= lo)) fail(bp, "need lo <= hi");
    return box_grid(n, lo, hi, count);
  }
  if (j.contains("ball")) {
    const json& b = j["ball"];
    const std::string bp = ptr + "/ball";
    const double r = number(at(b, "radius", bp), bp + "/radius");
    const int count = integer(at(b, "count", bp), bp + "/count");
    if (!(r > 0)) fail(bp + "/radius", "radius must be positive");
    if (count < 1 || count > 1000000) fail(bp + "/count", "count must lie in 1..1e6");
    return ball_points(n, r, count);
  }
  fail(ptr, "grid needs one of points, box or ball");
}

}  // namespace ssg::json
