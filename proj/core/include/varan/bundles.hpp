#pragma once

#include "varan/moreau.hpp"
#include "varan/secondorder.hpp"

#include <functional>
#include <string>
#include <vector>

namespace varan {

/// Radii rho0 * 2^-j for j = 0..shells-1 with `directions` offsets each.
struct ShellConfig {
  double rho0 = 0.25;
  int shells = 9;
  int directions = 32;
  std::vector<double> radii() const;
};

struct FdGateConfig {
  double h = 1e-3;
  double agree = 1e-3;
  double symmetry = 1e-6;
};

struct FdHessian {
  bool ok = false;
  Mat H;
  double disagreement = 0.0;
  double asymmetry = 0.0;
};

/// Gradient-difference Hessian at steps h and h/2; accepted when the two
/// agree within cfg.agree (spectral, relative to max(1, |H|)) and the raw
/// estimate is symmetric within cfg.symmetry.
FdHessian fd_hessian_gate(const std::function<Vec(const Vec&)>& grad, const Vec& x, double h,
                          const FdGateConfig& cfg);

/// Central-difference gradient of a value oracle.
Vec fd_gradient(const FunctionHandle& f, const Vec& x, double h = 1e-6);

// Hessian bundle -------------------------------------------------------------

struct HessianBundleConfig {
  ShellConfig shells;
  FdGateConfig gate;
  double cluster_radius = 5e-2;
};

struct HessianSample {
  int shell = 0;
  Vec x;
  Mat H;
};

struct HessianMember {
  Mat H;
  int count = 0;
  std::vector<int> shells;
};

struct HessianBundle {
  Vec anchor;
  std::vector<HessianMember> members;
  std::vector<HessianMember> unstable;
  std::vector<double> radii;
  int tried = 0;
  std::vector<HessianSample> samples;
  std::vector<Mat> matrices() const;
};

/// Limits of finite-difference Hessians on shrinking shells around the
/// anchor, clustered in spectral norm. Throws empty_bundle if no sample
/// passes the gate.
HessianBundle hessian_bundle(const FunctionHandle& f, const Vec& anchor,
                             const HessianBundleConfig& cfg = {});

// Quadratic bundle -----------------------------------------------------------

enum class BundleVariant { revised, original };

const char* to_string(BundleVariant v);

struct QuadBundleConfig {
  /// 0 picks default_lambda(prox_level).
  double lambda = 0.0;
  BundleVariant variant = BundleVariant::revised;
  ShellConfig shells;
  /// Shell j keeps pairs with |f(x) - f(x̄)| <= eps0 * 2^-j (revised only).
  double eps0 = 0.5;
  /// Gradient-oracle pairs on shell j need |v - v̄| <= cv * 2^-j.
  double cv = 4.0;
  bool gradient_pairs = true;
  FdGateConfig gate;
  double cluster_radius = 5e-2;
  int sphere_count = 32;
  D2Config d2;
  GqfFitConfig fit;
  ProxConfig prox;
};

struct BundleSample {
  int shell = 0;
  /// "envelope" or "gradient".
  std::string source;
  SubgradientPair pair;
  GQF form;
  double residual = 0.0;
};

struct QuadMember {
  GQF form;
  int count = 0;
  std::vector<int> shells;
  double max_residual = 0.0;
  /// Largest |f(x) - f(x̄)| among the cluster's samples, per shell.
  std::vector<double> f_gaps;
};

struct QuadraticBundle {
  SubgradientPair anchor;
  double lambda = 0.0;
  BundleVariant variant = BundleVariant::revised;
  std::vector<QuadMember> members;
  std::vector<QuadMember> unstable;
  std::vector<double> radii;
  std::vector<BundleSample> samples;
  int rejected_gate = 0;
  int rejected_attentive = 0;
  int rejected_fit = 0;
  std::vector<std::string> skipped;
  std::vector<GQF> forms() const;
};

/// Members are stored as ½ d^2 f at sampled pairs, clustered across shells.
/// Throws empty_bundle when nothing survives.
QuadraticBundle quad_bundle(const FunctionHandle& f, const SubgradientPair& anchor,
                            const QuadBundleConfig& cfg = {});

/// min over members of min q on the unit sphere of L; +inf if every member
/// has L = {0}. Throws precondition on an empty set.
double uniform_lower_bound(const std::vector<GQF>& forms);
double uniform_lower_bound(const QuadraticBundle& bundle);

/// Member q_A + δ_L becomes q_{A + H/2} + δ_L.
QuadraticBundle bundle_shift(const QuadraticBundle& bundle, const Mat& H);
std::vector<GQF> bundle_shift(const std::vector<GQF>& forms, const Mat& H);

bool nonemptiness_check(const FunctionHandle& f, const SubgradientPair& anchor,
                        const QuadBundleConfig& cfg = {});

/// Hausdorff distance between finite GQF sets under gqf_distance.
double bundle_set_distance(const std::vector<GQF>& a, const std::vector<GQF>& b);

}  // namespace varan
