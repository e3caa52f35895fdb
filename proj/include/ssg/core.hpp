#pragma once

// Shared value types for the ssg library: dense vectors/matrices, small
// symmetric tensors, errors and check reports.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorKind {
  unsupported_order,
  invalid_point,
  invalid_spec,
  sampling_failure,
  oracle_divergence,
  not_spacelike,
  decomposition_failure,
  invalid_coefficients,
  invalid_threshold,
  invalid_radius,
  invalid_time,
  below_threshold,
  out_of_range,
  degenerate_rotation,
  frame_not_adapted,
  invalid_argument,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::unsupported_order: return "unsupported-order";
    case ErrorKind::invalid_point: return "invalid-point";
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::sampling_failure: return "sampling-failure";
    case ErrorKind::oracle_divergence: return "oracle-divergence";
    case ErrorKind::not_spacelike: return "not-spacelike";
    case ErrorKind::decomposition_failure: return "decomposition-failure";
    case ErrorKind::invalid_coefficients: return "invalid-coefficients";
    case ErrorKind::invalid_threshold: return "invalid-threshold";
    case ErrorKind::invalid_radius: return "invalid-radius";
    case ErrorKind::invalid_time: return "invalid-time";
    case ErrorKind::below_threshold: return "below-threshold";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::degenerate_rotation: return "degenerate-rotation";
    case ErrorKind::frame_not_adapted: return "frame-not-adapted";
    case ErrorKind::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Dense rank-3 array, row-major in (a, i, j).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int d0, int d1, int d2)
      : d_{d0, d1, d2}, v_(static_cast<std::size_t>(d0) * d1 * d2, 0.0) {}

  double& operator()(int a, int i, int j) { return v_[index(a, i, j)]; }
  double operator()(int a, int i, int j) const { return v_[index(a, i, j)]; }
  int dim(int k) const { return d_[k]; }
  bool empty() const { return v_.empty(); }
  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }

  /// Slice a fixed leading index into a d1 x d2 matrix.
  Mat slice(int a) const {
    Mat s(d_[1], d_[2]);
    for (int i = 0; i < d_[1]; ++i)
      for (int j = 0; j < d_[2]; ++j) s(i, j) = (*this)(a, i, j);
    return s;
  }

 private:
  std::size_t index(int a, int i, int j) const {
    return (static_cast<std::size_t>(a) * d_[1] + i) * d_[2] + j;
  }
  std::array<int, 3> d_{0, 0, 0};
  std::vector<double> v_;
};

/// Dense rank-4 array, row-major in (a, i, j, k).
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int d0, int d1, int d2, int d3)
      : d_{d0, d1, d2, d3}, v_(static_cast<std::size_t>(d0) * d1 * d2 * d3, 0.0) {}

  double& operator()(int a, int i, int j, int k) { return v_[index(a, i, j, k)]; }
  double operator()(int a, int i, int j, int k) const { return v_[index(a, i, j, k)]; }
  int dim(int k) const { return d_[k]; }
  bool empty() const { return v_.empty(); }
  const std::vector<double>& data() const { return v_; }

 private:
  std::size_t index(int a, int i, int j, int k) const {
    return ((static_cast<std::size_t>(a) * d_[1] + i) * d_[2] + j) * d_[3] + k;
  }
  std::array<int, 4> d_{0, 0, 0, 0};
  std::vector<double> v_;
};

/// Tolerance tiers: pure algebra, analytic-vs-analytic with inversion, and
/// the finite-difference oracle band.
struct Tolerances {
  double algebra = 1e-12;
  double analytic = 1e-9;
  double oracle = 1e-6;
};

/// Outcome of comparing two routes to the same quantity.
struct CheckReport {
  std::string check_id;
  double expected = 0.0;  // reference route (analytic or closed form)
  double actual = 0.0;    // route under test (oracle, frame form, ...)
  double abs_discrepancy = 0.0;
  double rel_discrepancy = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::optional<double> observed_order;
  std::vector<double> ladder;  // per-level oracle values when an FD oracle was used
  std::string note;
};

inline CheckReport compare(std::string id, double expected, double actual, double tol) {
  CheckReport r;
  r.check_id = std::move(id);
  r.expected = expected;
  r.actual = actual;
  r.abs_discrepancy = std::abs(expected - actual);
  const double scale = std::max(std::abs(expected), std::abs(actual));
  r.rel_discrepancy = scale > 0.0 ? r.abs_discrepancy / scale : 0.0;
  r.tolerance = tol;
  r.pass = std::isfinite(r.abs_discrepancy) && r.abs_discrepancy <= tol;
  return r;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace ssg
