#pragma once

#include "varan/epi.hpp"
#include "varan/funcspace.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace varan {

using ScalarFn = std::function<double(const Vec&)>;

/// [f(x + t w) - f(x) - t<v, w>] / (t^2 / 2). Throws anchor_infeasible if
/// f(x) = +inf.
ExtendedReal delta2(const FunctionHandle& f, const Vec& x, const Vec& v, double t,
                    const Vec& w);

struct D2Config {
  /// t_k = 2^-k for k = k_first..k_last.
  int k_first = 3;
  int k_last = 18;
  /// w' window radius coef * t^power.
  double window_coef = 0.5;
  double window_power = 0.5;
  /// Values above cap are +inf.
  double cap = 1e9;
  /// Scale-normalized divergence: t * E_k roughly constant over the tail with
  /// E_last above this floor.
  double divergence_floor = 1e3;
  double divergence_ratio = 0.75;
  /// Relative agreement of the last two levels.
  double agree_tol = 1e-2;
  int tail = 4;
};

struct D2Estimate {
  ExtendedReal value;
  bool low_confidence = false;
  /// Window minimum per level.
  std::vector<double> levels;
  std::vector<double> t;
};

/// Second-order subderivative d^2 f(x|v)(w) as the liminf of windowed
/// difference quotients along the t schedule, with a Richardson correction
/// for the window bias.
D2Estimate d2(const FunctionHandle& f, const Vec& x, const Vec& v, const Vec& w,
              const D2Config& cfg = {});
/// Same for a plain scalar function with known value fx at x.
D2Estimate d2(const ScalarFn& f, const Vec& x, double fx, const Vec& v, const Vec& w,
              const D2Config& cfg = {});

/// q(w) = <w, A w> on the subspace L, +inf off L. Stored canonically with
/// an orthonormal basis of L and A compressed to Q A Q.
class GQF {
 public:
  GQF() = default;
  /// Basis columns need not be orthonormal; they are re-orthonormalized.
  GQF(const Mat& A, const Mat& basis, double rank_tol = 1e-9);

  static GQF full(const Mat& A);
  /// δ_{0} in dimension n.
  static GQF zero_subspace(int n);
  /// Stores already canonical data verbatim (used when reading files back).
  static GQF from_canonical(Mat A, Mat basis);

  int dim() const { return static_cast<int>(A_.rows()); }
  int rank() const { return static_cast<int>(basis_.cols()); }
  const Mat& A() const { return A_; }
  const Mat& basis() const { return basis_; }
  Mat projector() const { return basis_ * basis_.transpose(); }

  ExtendedReal operator()(const Vec& w, double tol = 1e-9) const;
  GQF scaled(double c) const;
  /// Min of q on the unit sphere of L; +inf when L = {0}.
  double min_on_sphere() const;

 private:
  Mat A_;
  Mat basis_;
};

/// |Q - Q'|_2 + |QAQ - Q'A'Q'|_2.
double gqf_distance(const GQF& a, const GQF& b);

struct GqfSample {
  Vec w;
  ExtendedReal value;
};

struct GqfFitConfig {
  double cap = 1e9;
  double residual_tol = 1e-2;
  double subspace_tol = 1e-6;
};

struct GqfFit {
  bool ok = false;
  GQF form;
  std::string reason;
  double residual = 0.0;
  int finite = 0;
};

/// Fits q = q_A + δ_L to sampled values on a symmetric direction grid.
GqfFit gqf_fit(const std::vector<GqfSample>& samples, const GqfFitConfig& cfg = {});

/// e_λ[½ q](w) = min over u in L of ½<u, A u> + |u - w|^2 / (2λ).
/// Throws envelope_unbounded if the quadratic is not bounded below.
double gqf_half_envelope(const GQF& q, double lambda, const Vec& w);

/// lhs = <x, A x> + <y, A^-1 y>, rhs = 2<x, y>. Throws precondition unless A
/// is symmetric positive definite.
std::pair<double, double> gen_cs(const Mat& A, const Vec& x, const Vec& y);

/// Q A Q + σ(I - Q). Throws precondition with a witness if <w, A w> < σ|w|^2
/// somewhere on a sphere grid of L.
Mat extend_posdef(const Mat& A, const Mat& basis, double sigma);

struct SumRuleCheck {
  bool ok = true;
  std::vector<Vec> witnesses;
  std::vector<std::pair<double, double>> values;
};

/// d^2(f + g)(x | ∇f(x) + v_g)(w) = <w, ∇^2 f(x) w> + d^2 g(x | v_g)(w) on
/// the grid, with +inf = +inf accepted.
SumRuleCheck d2_sum_rule_check(const FunctionHandle& f_smooth, const FunctionHandle& g,
                               const Vec& x, const Vec& v_g, const std::vector<Vec>& w_grid,
                               double tol = 1e-3, const D2Config& cfg = {});

struct TwiceEpiProbe {
  bool epi_differentiable = false;
  /// The constructed-sequence search failed; not a proof of failure.
  bool inconclusive = false;
  EpiCertificate certificate;
  GqfFit fit;
};

/// Tests Δ²_{1/k} f(x|v) → d^2 f(x|v) epigraphically on a w box and fits
/// the limit on the sphere grid.
TwiceEpiProbe twice_epi_diff_probe(const FunctionHandle& f, const Vec& x, const Vec& v,
                                   const std::vector<Vec>& sphere, const EpiConfig& ecfg = {},
                                   const D2Config& dcfg = {});

/// d^2 samples of f at (x, v) on the directions.
std::vector<GqfSample> d2_samples(const FunctionHandle& f, const Vec& x, const Vec& v,
                                  const std::vector<Vec>& dirs, const D2Config& cfg = {});

}  // namespace varan
