#include "varan/types.hpp"

#include <cmath>

namespace varan {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::registry: return "registry";
    case ErrorCode::config: return "config";
    case ErrorCode::contract: return "contract";
    case ErrorCode::improper: return "improper";
    case ErrorCode::prox_unbounded: return "prox_unbounded";
    case ErrorCode::non_differentiable: return "non_differentiable";
    case ErrorCode::path_divergence: return "path_divergence";
    case ErrorCode::anchor_infeasible: return "anchor_infeasible";
    case ErrorCode::envelope_unbounded: return "envelope_unbounded";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::empty_bundle: return "empty_bundle";
    case ErrorCode::numerical: return "numerical";
  }
  return "unknown";
}

ExtendedReal::ExtendedReal(double v) {
  if (std::isnan(v) || v == -kInf) {
    throw Error(ErrorCode::contract, "extended real must be finite or +inf");
  }
  finite_ = std::isfinite(v);
  v_ = finite_ ? v : 0.0;
}

double ExtendedReal::value() const {
  if (!finite_) throw Error(ErrorCode::contract, "value() on +inf");
  return v_;
}

Box::Box(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {
  if (lo.size() != hi.size()) {
    throw Error(ErrorCode::contract, "box bounds differ in dimension");
  }
}

Box Box::cube(int n, double l, double h) {
  return Box(Vec::Constant(n, l), Vec::Constant(n, h));
}

Box Box::around(const Vec& c, double half_width) {
  return Box(c.array() - half_width, c.array() + half_width);
}

bool Box::contains(const Vec& x, double tol) const {
  if (x.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lo[i] - tol && x[i] <= hi[i] + tol)) return false;
  }
  return true;
}

Box Box::intersect(const Box& other) const {
  return Box(lo.cwiseMax(other.lo), hi.cwiseMin(other.hi));
}

bool Box::empty() const {
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) return true;
  }
  return false;
}

}  // namespace varan
