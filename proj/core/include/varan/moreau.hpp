#pragma once

#include "varan/funcspace.hpp"
#include "varan/minimize.hpp"

#include <string>
#include <vector>

namespace varan {

struct ProxConfig {
  int grid_points = 401;
  std::size_t max_grid_total = 170000;
  double refine_step = 1e-10;
  double multistart_tol = 1e-6;
  double value_tol = 1e-8;
  /// Dedup radius as a fraction of the search-box diameter.
  double dedup_factor = 1e-5;
  /// Half-width of the trust box around z; 0 picks max(0.5, 4 lambda).
  double halfwidth = 0.0;
  int max_expand = 8;
  bool polish = true;
};

struct ProxCertificate {
  int grid_points = 0;
  double halfwidth = 0.0;
  double grid_step = 0.0;
  int refine_halvings = 0;
  int starts = 0;
  int expansions = 0;
  double dedup_radius = 0.0;
};

struct ProxResult {
  std::vector<Vec> minimizers;
  ExtendedReal value;
  ProxCertificate certificate;
  bool single_valued() const { return minimizers.size() == 1; }
};

/// λ = min(0.5 / r, 0.1), and 0.1 for r = 0.
double default_lambda(double prox_level);

ProxResult prox(const FunctionHandle& f, double lambda, const Vec& z,
                const ProxConfig& cfg = {});
ExtendedReal envelope(const FunctionHandle& f, double lambda, const Vec& z,
                      const ProxConfig& cfg = {});
/// (z - P(z)) / λ. Throws non_differentiable when the prox is multivalued.
Vec envelope_gradient(const FunctionHandle& f, double lambda, const Vec& z,
                      const ProxConfig& cfg = {});

/// Prox by local refinement from `start` only (no grid scan).
ProxResult prox_local(const FunctionHandle& f, double lambda, const Vec& z,
                      const Vec& start, double step0, const ProxConfig& cfg = {});

/// Envelope near a center point, evaluated by refinement warm-started from
/// the prox at the center. Valid where the prox is single-valued and
/// continuous around the center.
class LocalEnvelope {
 public:
  LocalEnvelope(const FunctionHandle& f, double lambda, const Vec& center,
                const ProxConfig& cfg = {});
  /// Center prox already known.
  LocalEnvelope(const FunctionHandle& f, double lambda, const Vec& center,
                const Vec& center_prox, const ProxConfig& cfg = {});
  double value(const Vec& z) const;
  Vec prox_point(const Vec& z) const;
  Vec gradient(const Vec& z) const;
  const Vec& center() const { return center_; }
  const Vec& center_prox() const { return p_center_; }
  double lambda() const { return lambda_; }

 private:
  FunctionHandle f_;
  double lambda_;
  Vec center_;
  Vec p_center_;
  ProxConfig cfg_;
};

struct SkipRecord {
  std::size_t index = 0;
  std::string reason;
};

struct AttentivePath {
  std::vector<SubgradientPair> pairs;
  /// Index into z_seq of each pair.
  std::vector<std::size_t> source;
  std::vector<SkipRecord> skipped;
};

/// Pairs (x_k, v_k, f(x_k)) with v_k = ∇e_λf(z_k), x_k = z_k - λ v_k.
/// Kinks of the envelope are skipped with a record. When `check` is set the
/// tail is asserted to approach the anchor (path_divergence otherwise).
AttentivePath attentive_path(const FunctionHandle& f, const SubgradientPair& anchor,
                             double lambda, const std::vector<Vec>& z_seq,
                             const ProxConfig& cfg = {}, bool check = true);

/// Slope test on nested boxes for a single λ.
bool prox_bounded_at(const FunctionHandle& f, double lambda);
/// True iff some λ in 1, 1/2, ..., 1/64 passes prox_bounded_at.
bool prox_bounded_probe(const FunctionHandle& f);

struct C11Result {
  double lipschitz = 0.0;
  int samples = 0;
  std::vector<Vec> excluded;
};

/// Empirical Lipschitz constant of ∇e_λf over a ball grid.
C11Result c11_probe(const FunctionHandle& f, double lambda, const Vec& center,
                    double radius, int per_axis = 21, const ProxConfig& cfg = {});

/// e_λf as a handle: value and gradient via the global prox solver.
FunctionHandle make_envelope_handle(const FunctionHandle& f, double lambda,
                                    const ProxConfig& cfg = {});

}  // namespace varan
