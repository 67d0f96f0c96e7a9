#pragma once

#include "varan/bundles.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace varan {

/// Sources of f-attentive pairs around an anchor: gradient oracle on a ball
/// grid plus envelope pairs on z shells around x̄ + λv̄. Grid sizes given per
/// axis apply in 1D; higher dimensions use per_axis^(2/(n+1)) points per axis.
struct PairSamplerConfig {
  /// Localization radius ε for attentive_member.
  double epsilon = 0.5;
  int per_axis = 101;
  bool envelope = true;
  /// 0 picks default_lambda(prox_level).
  double lambda = 0.0;
  ShellConfig shells;
  ProxConfig prox;
};

/// The anchor first, then gradient pairs, then envelope pairs; all inside
/// the ε-localization.
std::vector<SubgradientPair> sample_attentive_pairs(const FunctionHandle& f,
                                                    const SubgradientPair& anchor,
                                                    const PairSamplerConfig& cfg = {});

struct SvarConfig {
  /// Ball U around x̄.
  double radius = 0.5;
  int per_axis = 101;
  /// Absolute slack is tol * (1 + |f(x̄)|).
  double tol = 1e-9;
  PairSamplerConfig pairs;
  double bisect_lo = -10.0;
  double bisect_hi = 10.0;
  int bisect_iters = 30;
};

struct SvarResult {
  bool ok = false;
  /// Only the anchor itself was available as a pair.
  bool inconclusive = false;
  /// min over samples of f(x') - f(x) - <v, x'-x> - (s/2)|x'-x|^2.
  double worst_margin = kInf;
  Vec witness_x;
  Vec witness_xp;
  int pairs = 0;
  int points = 0;
};

/// Sampled local s-convexity inequality over x' in U and attentive pairs.
SvarResult svar_check(const FunctionHandle& f, const SubgradientPair& anchor, double s,
                      const SvarConfig& cfg = {});

struct SDirect {
  /// Largest passing s found by bisection; empty if even the lower end fails.
  std::optional<double> s;
  int iterations = 0;
  int pairs = 0;
};

SDirect s_direct(const FunctionHandle& f, const SubgradientPair& anchor,
                 const SvarConfig& cfg = {});

struct CnvConfig {
  double beta0 = 0.5;
  int stages = 7;
  int tau_levels = 11;
  int sphere_count = 32;
  double stage_tol = 5e-2;
  PairSamplerConfig pairs;
};

struct CnvEstimate {
  double value = 0.0;
  bool low_confidence = false;
  std::vector<double> betas;
  std::vector<double> stages;
  int pairs = 0;
};

/// Stage β: min of Δ²_τ f(x|v)(w) over pairs within β of the anchor in x, v
/// and f, unit w, and τ = β 2^-i. The estimate is the last stage.
CnvEstimate cnv_estimate(const FunctionHandle& f, const SubgradientPair& anchor,
                         const CnvConfig& cfg = {});

enum class GrowthMode { forward, backward };

struct GrowthConfig {
  double radius = 0.1;
  int per_axis = 101;
  int sphere_count = 32;
  double tol = 1e-9;
  double d2_tol = 1e-3;
  int shrink_steps = 12;
  D2Config d2;
};

struct GrowthCheck {
  bool premise = false;
  bool conclusion = false;
  bool ok = false;
  /// min over unit w of d^2 f(x̄|v̄)(w).
  double d2_min = 0.0;
  /// Ball radius on which growth was verified (backward mode).
  double radius = 0.0;
};

/// forward: growth f(x) >= f(x̄) + <v̄, x - x̄> + (κ/2)|x - x̄|^2 on the ball
/// implies d^2 >= κ on the unit sphere. backward: d^2 >= μ > κ implies growth
/// with κ on some located ball. ok = premise && conclusion.
GrowthCheck growth_vs_d2(const FunctionHandle& f, const SubgradientPair& anchor, double kappa,
                         GrowthMode mode, const GrowthConfig& cfg = {});

enum class ConvexityMode { i_to_ii, ii_to_iii, iii_to_i };

struct ConvexityConfig {
  double radius = 0.1;
  int per_axis = 21;
  double tol = 1e-2;
  double near_radius = 0.05;
  HessianBundleConfig bundle;
};

struct ConvexityCheck {
  bool premise = false;
  bool conclusion = false;
  bool ok = false;
  double modulus = 0.0;
};

/// Strong convexity of a C^{1,1} function versus Hessian-bundle moduli.
ConvexityCheck hessian_convexity_check(const FunctionHandle& f, const Vec& xbar, double s,
                                       ConvexityMode mode, const ConvexityConfig& cfg = {});

struct TiltConfig {
  double delta = 1.0;
  double v_radius = 0.25;
  int radii = 7;
  int directions = 64;
  int max_halvings = 4;
  int grid_points = 201;
};

struct TiltMap {
  std::vector<Vec> minimizers;
  bool boundary_active = false;
};

/// argmin over |x - x̄| <= δ of f(x) - f(x̄) - <v, x - x̄>.
TiltMap tilt_map(const FunctionHandle& f, const Vec& xbar, double delta, const Vec& v,
                 const TiltConfig& cfg = {});

struct TiltResult {
  bool stable = false;
  double kappa_hat = 0.0;
  double delta = 0.0;
  int halvings = 0;
  std::string reason;
  Vec witness;
};

/// Single-valuedness and Lipschitz modulus of the tilt map over a v grid.
/// Each radius class also contains v = 0.
TiltResult tilt_check(const FunctionHandle& f, const Vec& xbar, const TiltConfig& cfg = {});

struct Relationship {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  /// "equal": |lhs - rhs| <= tol; "at_least": lhs >= rhs - tol.
  std::string kind;
  bool pass = false;
  std::string note;
};

Relationship make_equal(std::string name, double lhs, double rhs, double tol);
Relationship make_at_least(std::string name, double lhs, double rhs, double tol);

struct ModulusReport {
  std::string function;
  SubgradientPair anchor;
  std::optional<double> s_direct;
  std::optional<double> mu;
  std::optional<double> cnv;
  bool cnv_low_confidence = false;
  std::optional<double> kappa;
  std::optional<bool> tilt_stable;
  std::vector<Relationship> relationships;
  std::map<std::string, double> config;
  std::optional<QuadraticBundle> bundle;
  bool all_pass() const;
};

struct ModulusCheckConfig {
  QuadBundleConfig bundle;
  SvarConfig svar;
  CnvConfig cnv;
  double tol = 5e-2;
  double reverse_margin = 0.1;
  /// r in the shift check f + r|x - x̄|^2; 0 disables it.
  double shift_r = 1.0;
};

ModulusReport modulus_crosscheck(const FunctionHandle& f, const SubgradientPair& anchor,
                                 const ModulusCheckConfig& cfg = {});

struct TiltCheckConfig {
  TiltConfig tilt;
  QuadBundleConfig bundle;
  double tol = 1e-3;
};

ModulusReport tilt_crosscheck(const FunctionHandle& f, const Vec& xbar,
                              const TiltCheckConfig& cfg = {});
/// Same with the bundle at (x̄, 0) already computed.
ModulusReport tilt_crosscheck(const FunctionHandle& f, const Vec& xbar,
                              const QuadraticBundle& bundle, const TiltCheckConfig& cfg);

struct SemidefiniteCheck {
  bool precondition = false;
  bool ok = false;
  double min_value = kInf;
};

/// Requires svar_check at s = 0; then every bundle member must be >= -tol on
/// its unit L-sphere.
SemidefiniteCheck semidefinite_necessity_check(const FunctionHandle& f,
                                               const SubgradientPair& anchor,
                                               const QuadBundleConfig& bcfg = {},
                                               const SvarConfig& scfg = {}, double tol = 1e-6);

}  // namespace varan
