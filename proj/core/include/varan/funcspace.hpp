#pragma once

#include "varan/types.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace varan {

using ParamMap = std::map<std::string, double>;

/// (x, v, f(x)) with v a subgradient of f at x. fx is finite.
struct SubgradientPair {
  Vec x;
  Vec v;
  double fx = 0.0;
};

/// f-attentive ε-localization around an anchor pair.
struct Localization {
  SubgradientPair anchor;
  double epsilon = 0.1;
};

struct FunctionMeta {
  std::string name;
  std::string description;
  ParamMap params;
  /// Declared prox-regularity level r (f + (r/2)|.|^2 locally convex).
  double prox_level = 0.0;
  /// Declared modulus of variational convexity at the first anchor.
  std::optional<double> s;
  /// Declared tilt-stability modulus at the first anchor.
  std::optional<double> kappa;
  bool c11 = false;
  bool negative_control = false;
  /// Anchors at which f is prox-regular.
  std::vector<SubgradientPair> anchors;
};

/// Extended-real-valued function on R^n given by oracles. Oracles must be
/// pure: handles are shared across worker threads.
class FunctionHandle {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using HessFn = std::function<Mat(const Vec&)>;
  using ProxFn = std::function<Vec(double, const Vec&)>;

  FunctionHandle(int n, ValueFn value, Box box, FunctionMeta meta);

  int dim() const { return n_; }
  const Box& box() const { return box_; }
  const FunctionMeta& meta() const { return meta_; }
  FunctionMeta& mutable_meta() { return meta_; }
  const std::string& name() const { return meta_.name; }

  /// Value with +inf for points outside dom f. Points outside the domain
  /// box are a contract violation.
  double eval(const Vec& x) const;
  ExtendedReal value(const Vec& x) const { return ExtendedReal(eval(x)); }

  bool has_gradient() const { return static_cast<bool>(grad_); }
  bool has_hessian() const { return static_cast<bool>(hess_); }
  bool has_prox() const { return static_cast<bool>(prox_); }

  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
  Vec prox_oracle(double lambda, const Vec& z) const;

  FunctionHandle& set_gradient(GradFn g) { grad_ = std::move(g); return *this; }
  FunctionHandle& set_hessian(HessFn h) { hess_ = std::move(h); return *this; }
  FunctionHandle& set_prox(ProxFn p) { prox_ = std::move(p); return *this; }
  FunctionHandle& set_box(Box b);

  const ValueFn& raw_value() const { return value_; }
  const GradFn& raw_gradient() const { return grad_; }
  const HessFn& raw_hessian() const { return hess_; }
  const ProxFn& raw_prox() const { return prox_; }

 private:
  void check_point(const Vec& x) const;

  int n_;
  ValueFn value_;
  GradFn grad_;
  HessFn hess_;
  ProxFn prox_;
  Box box_;
  FunctionMeta meta_;
};

/// Builds a pair with fx = f(x). Throws anchor_infeasible if f(x) = +inf.
SubgradientPair make_pair(const FunctionHandle& f, const Vec& x, const Vec& v);

bool attentive_member(const SubgradientPair& pair, const Localization& loc);

struct LscConfig {
  double radius = 0.1;
  int levels = 24;
  int tail = 6;
  double tol = 1e-9;
};

/// Sampled lower semicontinuity at x along axis and diagonal sequences.
bool lsc_probe(const FunctionHandle& f, const Vec& x, const LscConfig& cfg = {});

/// Sublinear slack o(t) = C * t^p used by the sampled subgradient test.
struct SlackSchedule {
  double C = 10.0;
  double power = 1.5;
  double operator()(double t) const;
};

struct SubgradientCheck {
  bool ok = true;
  double worst_margin = 0.0;
  Vec witness;
};

/// Samples f(x') >= fx + <v, x'-x> - o(|x'-x|) on a ball of the given radius.
SubgradientCheck subgradient_check(const FunctionHandle& f,
                                   const SubgradientPair& pair,
                                   double radius = 0.05,
                                   const SlackSchedule& slack = {});

// Combinators ---------------------------------------------------------------

/// f + ½<x - c, H(x - c)>. Anchors and declared moduli are shifted.
FunctionHandle add_quadratic(const FunctionHandle& f, const Mat& H,
                             const Vec& center);
/// f + g on the intersection of their boxes.
FunctionHandle sum(const FunctionHandle& f, const FunctionHandle& g);

// Corpus ------------------------------------------------------------------

std::vector<std::string> corpus_names();
/// Throws registry error listing available names (or parameters).
FunctionHandle corpus_get(const std::string& name, const ParamMap& params = {});
/// One line per entry: name, dimension, parameters, declared moduli.
std::string corpus_catalog();

}  // namespace varan
