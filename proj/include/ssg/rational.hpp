#pragma once

#include "ssg/core.hpp"

#include <charconv>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>

namespace ssg {

/// Exact rational coefficient p/q, q > 0, reduced. Converted to double only
/// at evaluation sites.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  Rational(std::int64_t p, std::int64_t q = 1) : num(p), den(q) {
    if (den == 0) throw Error(ErrorKind::invalid_spec, "rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }

  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num * b.num, a.den * b.den);
  }

  /// Parses "p/q", "p" or a plain decimal integer string.
  static Rational parse(std::string_view s) {
    auto parse_int = [&](std::string_view t) {
      std::int64_t v = 0;
      if (!t.empty() && t.front() == '+') t.remove_prefix(1);
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw Error(ErrorKind::invalid_spec, "bad rational literal '" + std::string(s) + "'");
      return v;
    };
    const auto slash = s.find('/');
    if (slash == std::string_view::npos) return Rational(parse_int(s));
    return Rational(parse_int(s.substr(0, slash)), parse_int(s.substr(slash + 1)));
  }
};

}  // namespace ssg
