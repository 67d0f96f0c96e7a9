#pragma once

#include "varan/funcspace.hpp"

#include <functional>
#include <vector>

namespace varan {

/// Sampled epigraph: points (x, α) with α >= f(x) inside a box of R^{n+1}
/// whose last coordinate is α.
struct EpigraphCloud {
  std::vector<Vec> points;
  Box box;
  double resolution = 0.0;
};

/// Graph points (x, f(x)) plus vertical samples on the α lattice above them.
/// Throws improper if f is +inf on every grid point of the box.
EpigraphCloud epi_cloud(const FunctionHandle& f, const Box& box, double resolution);

/// max over lattice points p of the shared box with |p| <= rho of
/// |d(p, c1) - d(p, c2)|. Throws config on mismatched boxes or resolutions.
double epi_distance(const EpigraphCloud& c1, const EpigraphCloud& c2, double rho);

/// Family of functions indexed by k = 1, 2, ...
using IndexedFamily = std::function<FunctionHandle(long k)>;

struct EpiConfig {
  /// Index schedule k = 2^j, j = 0..max_power. The last `tail` entries and
  /// their successors 2^j + 1 are sampled.
  int max_power = 20;
  int tail = 3;
  /// Sequence window |x_k - x| <= window / sqrt(k).
  double window = 0.1;
  int window_samples = 8;
  int per_axis = 21;
  /// Absolute tolerance is tol * max(1, |f(x)|).
  double tol = 1e-3;
  double cap = 1e9;
};

struct EpiWitness {
  Vec x;
  double limit = 0.0;
  double sampled = 0.0;
  std::vector<Vec> sequence;
};

struct EpiCertificate {
  std::vector<long> schedule;
  bool liminf_ok = true;
  bool limsup_ok = true;
  double worst_liminf_gap = 0.0;
  double worst_limsup_gap = 0.0;
  /// Worst point for each condition, with its sampled sequence.
  EpiWitness liminf_witness;
  EpiWitness limsup_witness;
  int points = 0;
};

struct EpiResult {
  bool converges = false;
  EpiCertificate certificate;
};

/// Two-sided sampled test: (a) liminf over window sequences stays above
/// f(x) - tol; (b) some constructed sequence has limsup at most f(x) + tol.
EpiResult epi_converges(const IndexedFamily& seq, const FunctionHandle& f, const Box& box,
                        const EpiConfig& cfg = {});

struct LowerBoundStability {
  bool ok = false;
  /// First index from which f_k(w) >= (μ - δ)|w|^2 holds on the sphere
  /// sample for every later k; count + 1 if none.
  int index = 0;
  /// Last violation before `index`.
  int witness_k = 0;
  Vec witness_w;
};

/// Families f_k for k = 1..count of degree-2 homogeneous functions.
/// Throws precondition if f_limit(w) < μ|w|^2 on the sphere sample.
LowerBoundStability quadratic_lowerbound_stability(
    const std::function<double(int, const Vec&)>& seq, int count,
    const std::function<double(const Vec&)>& f_limit, double mu, double delta,
    const std::vector<Vec>& sphere);

}  // namespace varan
