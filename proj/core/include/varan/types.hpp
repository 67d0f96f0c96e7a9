#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace varan {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ErrorCode {
  registry,
  config,
  contract,
  improper,
  prox_unbounded,
  non_differentiable,
  path_divergence,
  anchor_infeasible,
  envelope_unbounded,
  precondition,
  empty_bundle,
  numerical,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Value in R ∪ {+∞}. Negative infinity and NaN are rejected.
class ExtendedReal {
 public:
  ExtendedReal() = default;
  ExtendedReal(double v);  // NOLINT: implicit from double is intended

  static ExtendedReal infinity() { return ExtendedReal(kInf); }

  bool is_finite() const { return finite_; }
  /// Throws on +∞.
  double value() const;
  /// Finite value or +inf.
  double as_double() const { return finite_ ? v_ : kInf; }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.finite_ == b.finite_ && (!a.finite_ || a.v_ == b.v_);
  }
  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (!a.finite_) return false;
    if (!b.finite_) return true;
    return a.v_ < b.v_;
  }
  friend bool operator<=(const ExtendedReal& a, const ExtendedReal& b) {
    return a < b || a == b;
  }
  friend ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b) {
    if (!a.finite_ || !b.finite_) return infinity();
    return ExtendedReal(a.v_ + b.v_);
  }

 private:
  bool finite_ = true;
  double v_ = 0.0;
};

/// Axis-aligned box [lo, hi].
struct Box {
  Vec lo;
  Vec hi;

  Box() = default;
  Box(Vec l, Vec h);
  static Box cube(int n, double lo, double hi);
  static Box around(const Vec& c, double half_width);

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x, double tol = 1e-12) const;
  double diameter() const { return (hi - lo).norm(); }
  Box intersect(const Box& other) const;
  bool empty() const;
  bool operator==(const Box& o) const { return lo == o.lo && hi == o.hi; }
};

}  // namespace varan
