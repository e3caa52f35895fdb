#pragma once

// Deterministic point sets: Halton sequences, boxes, balls and spheres.

#include "ssg/core.hpp"
#include "ssg/jets.hpp"

#include <random>

namespace ssg {

namespace detail {
inline constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

inline double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}
}  // namespace detail

/// The k-th point (k >= 1) of the n-dimensional Halton sequence in [0,1)^n.
inline Vec halton(std::uint64_t k, int n) {
  if (n < 1 || n > 16) throw Error(ErrorKind::invalid_argument, "Halton points support 1 <= n <= 16");
  Vec p(n);
  for (int d = 0; d < n; ++d) p(d) = detail::radical_inverse(k, detail::kPrimes[d]);
  return p;
}

/// Tensor grid on [lo, hi]^n with `count` points per axis (count >= 1).
inline std::vector<Vec> box_grid(int n, double lo, double hi, int count) {
  if (count < 1 || n < 1) throw Error(ErrorKind::invalid_argument, "box grid needs n >= 1 and count >= 1");
  std::vector<Vec> pts;
  std::vector<int> idx(n, 0);
  auto coord = [&](int i) { return count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (count - 1); };
  while (true) {
    Vec p(n);
    for (int d = 0; d < n; ++d) p(d) = coord(idx[d]);
    pts.push_back(p);
    int d = 0;
    while (d < n && ++idx[d] == count) idx[d++] = 0;
    if (d == n) break;
  }
  return pts;
}

/// First `count` Halton points of the unit cube mapped into the closed ball
/// of radius `radius` by rejection from [-1,1]^n.
inline std::vector<Vec> ball_points(int n, double radius, int count) {
  std::vector<Vec> pts;
  pts.reserve(count);
  for (std::uint64_t k = 1; static_cast<int>(pts.size()) < count; ++k) {
    Vec p = 2.0 * halton(k, n) - Vec::Ones(n);
    if (p.squaredNorm() <= 1.0) pts.push_back(radius * p);
  }
  return pts;
}

/// Deterministic unit directions; for n = 1 these are +-1.
inline std::vector<Vec> sphere_directions(int n, int count) {
  std::vector<Vec> dirs;
  if (n == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
    return dirs;
  }
  for (int d = 0; d < n; ++d) {
    Vec e = Vec::Zero(n);
    e(d) = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  for (std::uint64_t k = 1; static_cast<int>(dirs.size()) < count; ++k) {
    Vec p = 2.0 * halton(k, n) - Vec::Ones(n);
    const double r = p.norm();
    if (r > 1e-3 && r <= 1.0) dirs.push_back(p / r);
  }
  return dirs;
}

/// Uniform random points in the ball of the given radius (seeded).
inline std::vector<Vec> random_ball_points(int n, double radius, int count, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> pts;
  pts.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vec d(n);
    for (int i = 0; i < n; ++i) d(i) = normal(rng);
    const double nrm = d.norm();
    if (nrm == 0.0) {
      --k;
      continue;
    }
    pts.push_back(radius * std::pow(unif(rng), 1.0 / n) * d / nrm);
  }
  return pts;
}

struct BallSup {
  double sup_u2 = 0.0;       // max |u|^2 over all samples
  double half_sup_u2 = 0.0;  // max over the first half; difference indicates sampling error
  double sampling_error() const { return sup_u2 - half_sup_u2; }
};

/// Sampled sup of |u|^2 over the unit-ball point set scaled to `radius`.
inline BallSup ball_sup_u2(const GraphSpec& spec, const std::vector<Vec>& unit_ball, double radius) {
  BallSup s;
  for (std::size_t k = 0; k < unit_ball.size(); ++k) {
    const double v = eval_jet(spec, radius * unit_ball[k], 0).u.squaredNorm();
    s.sup_u2 = std::max(s.sup_u2, v);
    if (2 * k < unit_ball.size()) s.half_sup_u2 = std::max(s.half_sup_u2, v);
  }
  return s;
}

}  // namespace ssg
