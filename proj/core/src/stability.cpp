#include "varan/stability.hpp"

#include "varan/grids.hpp"
#include "varan/minimize.hpp"
#include "varan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace varan {
namespace {

/// Odd so the center is a grid point.
int grid_count(int per_axis, int n) {
  if (n <= 1) return per_axis;
  const double m = std::pow(static_cast<double>(per_axis), 2.0 / (n + 1));
  return std::max(5, static_cast<int>(std::lround(m)) | 1);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

/// Cached gaps g = f(x') - f(x) - <v, x' - x> with d = |x' - x|^2.
struct GapTable {
  std::vector<double> gap;
  std::vector<double> dist2;
  std::vector<std::size_t> pair_index;
  std::vector<Vec> xp;
  std::vector<SubgradientPair> pairs;
  std::size_t points = 0;
  double slack = 0.0;
};

GapTable build_gaps(const FunctionHandle& f, const SubgradientPair& anchor,
                    const SvarConfig& cfg) {
  GapTable t;
  t.pairs = sample_attentive_pairs(f, anchor, cfg.pairs);
  const auto grid = ball_grid(anchor.x, cfg.radius, grid_count(cfg.per_axis, f.dim()));
  std::vector<Vec> pts;
  std::vector<double> vals;
  for (const Vec& x : grid) {
    if (!f.box().contains(x, 0.0)) continue;
    const double fx = f.eval(x);
    if (std::isinf(fx)) continue;
    pts.push_back(x);
    vals.push_back(fx);
  }
  t.points = pts.size();
  t.slack = cfg.tol * (1.0 + std::abs(anchor.fx));
  for (std::size_t p = 0; p < t.pairs.size(); ++p) {
    const SubgradientPair& pr = t.pairs[p];
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec d = pts[i] - pr.x;
      t.gap.push_back(vals[i] - pr.fx - pr.v.dot(d));
      t.dist2.push_back(d.squaredNorm());
      t.pair_index.push_back(p);
      t.xp.push_back(pts[i]);
    }
  }
  return t;
}

SvarResult evaluate_gaps(const GapTable& t, double s) {
  SvarResult r;
  r.pairs = static_cast<int>(t.pairs.size());
  r.points = static_cast<int>(t.points);
  r.inconclusive = t.pairs.size() <= 1;
  std::size_t worst = 0;
  for (std::size_t k = 0; k < t.gap.size(); ++k) {
    const double m = t.gap[k] - 0.5 * s * t.dist2[k];
    if (m < r.worst_margin) {
      r.worst_margin = m;
      worst = k;
    }
  }
  if (!t.gap.empty()) {
    r.witness_x = t.pairs[t.pair_index[worst]].x;
    r.witness_xp = t.xp[worst];
  }
  r.ok = r.worst_margin >= -t.slack;
  return r;
}

/// Min over unit w of d^2 f(x̄|v̄)(w) on the sphere grid.
double d2_sphere_min(const FunctionHandle& f, const SubgradientPair& a, int count,
                     const D2Config& cfg) {
  const auto samples = d2_samples(f, a.x, a.v, sphere_grid(f.dim(), count), cfg);
  double m = kInf;
  for (const auto& s : samples) m = std::min(m, s.value.as_double());
  return m;
}

/// Largest violation of the growth inequality with modulus κ on the ball.
double growth_margin(const FunctionHandle& f, const SubgradientPair& a, double kappa,
                     double radius, int per_axis) {
  double worst = kInf;
  for (const Vec& x : ball_grid(a.x, radius, grid_count(per_axis, f.dim()))) {
    if (!f.box().contains(x, 0.0)) continue;
    const double fx = f.eval(x);
    if (std::isinf(fx)) continue;
    const Vec d = x - a.x;
    worst = std::min(worst, fx - a.fx - a.v.dot(d) - 0.5 * kappa * d.squaredNorm());
  }
  return worst;
}

/// Strong convexity inequality with modulus s over pairs of ball grid points.
bool strongly_convex_on(const FunctionHandle& f, const Vec& c, double radius, int per_axis,
                        double s) {
  std::vector<Vec> pts;
  std::vector<double> vals;
  std::vector<Vec> grads;
  for (const Vec& x : ball_grid(c, radius, grid_count(per_axis, f.dim()))) {
    if (!f.box().contains(x, 0.0)) continue;
    pts.push_back(x);
  }
  vals.resize(pts.size());
  grads.resize(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    vals[i] = f.eval(pts[i]);
    grads[i] = f.has_gradient() ? f.gradient(pts[i]) : fd_gradient(f, pts[i]);
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      const Vec d = pts[j] - pts[i];
      const double m = vals[j] - vals[i] - grads[i].dot(d) - 0.5 * s * d.squaredNorm();
      if (m < -1e-9 * (1.0 + std::abs(vals[i]))) return false;
    }
  }
  return true;
}

double bundle_modulus(const std::vector<Mat>& Hs) {
  double m = kInf;
  for (const Mat& H : Hs) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

}  // namespace

std::vector<SubgradientPair> sample_attentive_pairs(const FunctionHandle& f,
                                                    const SubgradientPair& anchor,
                                                    const PairSamplerConfig& cfg) {
  const int n = f.dim();
  const Localization loc{anchor, cfg.epsilon};
  std::vector<SubgradientPair> out{anchor};

  if (f.has_gradient()) {
    const auto grid = ball_grid(anchor.x, cfg.epsilon, grid_count(cfg.per_axis, n));
    std::vector<std::optional<SubgradientPair>> found(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
      const Vec& x = grid[i];
      if ((x - anchor.x).norm() == 0.0 || !f.box().contains(x, 0.0)) return;
      const double fx = f.eval(x);
      if (std::isinf(fx)) return;
      SubgradientPair p{x, f.gradient(x), fx};
      if (attentive_member(p, loc)) found[i] = std::move(p);
    });
    for (auto& p : found) {
      if (p) out.push_back(std::move(*p));
    }
  }

  if (cfg.envelope) {
    const double lambda = cfg.lambda > 0 ? cfg.lambda : default_lambda(f.meta().prox_level);
    const auto offsets = shell_offsets(n, cfg.shells.directions);
    const auto radii = cfg.shells.radii();
    const Vec zbar = anchor.x + lambda * anchor.v;
    std::vector<std::vector<SubgradientPair>> per_dir(offsets.size());
    parallel_for(offsets.size(), [&](std::size_t d) {
      std::vector<Vec> zs;
      for (double r : radii) zs.push_back(zbar + r * offsets[d]);
      try {
        const AttentivePath path = attentive_path(f, anchor, lambda, zs, cfg.prox, false);
        for (const auto& p : path.pairs) {
          if (attentive_member(p, loc)) per_dir[d].push_back(p);
        }
      } catch (const Error&) {
        // Directions whose path cannot be followed contribute nothing.
      }
    });
    for (auto& v : per_dir) {
      for (auto& p : v) out.push_back(std::move(p));
    }
  }
  return out;
}

SvarResult svar_check(const FunctionHandle& f, const SubgradientPair& anchor, double s,
                      const SvarConfig& cfg) {
  return evaluate_gaps(build_gaps(f, anchor, cfg), s);
}

SDirect s_direct(const FunctionHandle& f, const SubgradientPair& anchor,
                 const SvarConfig& cfg) {
  const GapTable t = build_gaps(f, anchor, cfg);
  SDirect out;
  out.pairs = static_cast<int>(t.pairs.size());
  double lo = cfg.bisect_lo;
  double hi = cfg.bisect_hi;
  if (!evaluate_gaps(t, lo).ok) return out;
  if (evaluate_gaps(t, hi).ok) {
    out.s = hi;
    return out;
  }
  for (int i = 0; i < cfg.bisect_iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    (evaluate_gaps(t, mid).ok ? lo : hi) = mid;
    ++out.iterations;
  }
  out.s = lo;
  return out;
}

CnvEstimate cnv_estimate(const FunctionHandle& f, const SubgradientPair& anchor,
                         const CnvConfig& cfg) {
  CnvEstimate out;
  const auto pairs = sample_attentive_pairs(f, anchor, cfg.pairs);
  out.pairs = static_cast<int>(pairs.size());
  const auto sphere = sphere_grid(f.dim(), cfg.sphere_count);
  for (int j = 0; j < cfg.stages; ++j) {
    const double beta = cfg.beta0 * std::ldexp(1.0, -j);
    std::vector<const SubgradientPair*> sel;
    for (const auto& p : pairs) {
      if ((p.x - anchor.x).norm() <= beta && (p.v - anchor.v).norm() <= beta &&
          std::abs(p.fx - anchor.fx) <= beta) {
        sel.push_back(&p);
      }
    }
    std::vector<double> best(sel.size(), kInf);
    parallel_for(sel.size(), [&](std::size_t k) {
      const SubgradientPair& p = *sel[k];
      for (int i = 0; i < cfg.tau_levels; ++i) {
        const double tau = beta * std::ldexp(1.0, -i);
        for (const Vec& w : sphere) {
          const Vec y = p.x + tau * w;
          if (!f.box().contains(y, 0.0)) continue;
          const double q = delta2(f, p.x, p.v, tau, w).as_double();
          best[k] = std::min(best[k], q);
        }
      }
    });
    double m = kInf;
    for (double b : best) m = std::min(m, b);
    out.betas.push_back(beta);
    out.stages.push_back(m);
  }
  out.value = out.stages.empty() ? kInf : out.stages.back();
  if (out.stages.size() >= 2) {
    const double a = out.stages[out.stages.size() - 2];
    const double b = out.stages.back();
    const bool both_inf = std::isinf(a) && std::isinf(b);
    out.low_confidence = !both_inf && !(std::abs(a - b) <= cfg.stage_tol);
  }
  return out;
}

GrowthCheck growth_vs_d2(const FunctionHandle& f, const SubgradientPair& anchor, double kappa,
                         GrowthMode mode, const GrowthConfig& cfg) {
  GrowthCheck out;
  out.d2_min = d2_sphere_min(f, anchor, cfg.sphere_count, cfg.d2);
  const double slack = cfg.tol * (1.0 + std::abs(anchor.fx));
  if (mode == GrowthMode::forward) {
    out.radius = cfg.radius;
    out.premise = growth_margin(f, anchor, kappa, cfg.radius, cfg.per_axis) >= -slack;
    out.conclusion = out.d2_min >= kappa - cfg.d2_tol * std::max(1.0, std::abs(kappa));
  } else {
    out.premise = out.d2_min > kappa;
    double r = cfg.radius;
    for (int i = 0; i <= cfg.shrink_steps && !out.conclusion; ++i, r *= 0.5) {
      if (growth_margin(f, anchor, kappa, r, cfg.per_axis) >= -slack) {
        out.conclusion = true;
        out.radius = r;
      }
    }
  }
  out.ok = out.premise && out.conclusion;
  return out;
}

ConvexityCheck hessian_convexity_check(const FunctionHandle& f, const Vec& xbar, double s,
                                       ConvexityMode mode, const ConvexityConfig& cfg) {
  ConvexityCheck out;
  const HessianBundle hb = hessian_bundle(f, xbar, cfg.bundle);
  switch (mode) {
    case ConvexityMode::i_to_ii:
      out.premise = strongly_convex_on(f, xbar, cfg.radius, cfg.per_axis, s);
      out.modulus = bundle_modulus(hb.matrices());
      out.conclusion = out.modulus >= s - cfg.tol;
      break;
    case ConvexityMode::ii_to_iii: {
      out.modulus = bundle_modulus(hb.matrices());
      out.premise = out.modulus >= s - cfg.tol;
      double near = kInf;
      for (const Vec& d : probe_directions(f.dim())) {
        const Vec x = xbar + cfg.near_radius * d;
        if (!f.box().contains(x, 0.0)) continue;
        near = std::min(near, bundle_modulus(hessian_bundle(f, x, cfg.bundle).matrices()));
      }
      out.modulus = std::min(out.modulus, near);
      out.conclusion = near >= s - cfg.tol;
      break;
    }
    case ConvexityMode::iii_to_i: {
      std::vector<Mat> all;
      for (const auto& smp : hb.samples) all.push_back(smp.H);
      out.modulus = bundle_modulus(all);
      out.premise = out.modulus >= s - cfg.tol;
      out.conclusion = strongly_convex_on(f, xbar, cfg.radius, cfg.per_axis, s - cfg.tol);
      break;
    }
  }
  out.ok = out.premise && out.conclusion;
  return out;
}

TiltMap tilt_map(const FunctionHandle& f, const Vec& xbar, double delta, const Vec& v,
                 const TiltConfig& cfg) {
  const double fbar = f.eval(xbar);
  if (std::isinf(fbar)) throw Error(ErrorCode::anchor_infeasible, "tilt_map: f(x̄) = +inf");
  Objective obj;
  obj.value = [&, fbar](const Vec& y) {
    if ((y - xbar).norm() > delta) return kInf;
    return f.eval(y) - fbar - v.dot(y - xbar);
  };
  if (f.has_gradient() && f.has_hessian()) {
    obj.gradient = [&](const Vec& y) -> Vec { return f.gradient(y) - v; };
    obj.hessian = [&](const Vec& y) -> Mat { return f.hessian(y); };
  }
  const Box search = Box::around(xbar, delta).intersect(f.box());
  MinimizeConfig mc;
  mc.grid_points = cfg.grid_points;
  mc.dedup_radius = 1e-5 * std::max(search.diameter(), 1e-12);
  const GridMinResult r = grid_minimize(obj, search, search, mc);
  TiltMap out;
  out.minimizers = r.minimizers;
  for (const Vec& m : out.minimizers) {
    if ((m - xbar).norm() >= delta * (1.0 - 1e-6)) out.boundary_active = true;
  }
  return out;
}

TiltResult tilt_check(const FunctionHandle& f, const Vec& xbar, const TiltConfig& cfg) {
  const int n = f.dim();
  const auto dirs = n == 1 ? sphere_grid(1, 2) : sphere_grid(n, cfg.directions);
  std::vector<std::vector<Vec>> classes;
  for (int j = 0; j < cfg.radii; ++j) {
    const double rho = cfg.v_radius * std::ldexp(1.0, -j);
    std::vector<Vec> cls{Vec::Zero(n)};
    for (const Vec& d : dirs) cls.push_back(rho * d);
    classes.push_back(std::move(cls));
  }

  TiltResult out;
  double delta = cfg.delta;
  for (int h = 0;; ++h) {
    out.delta = delta;
    out.halvings = h;
    std::vector<std::vector<TiltMap>> maps(classes.size());
    bool boundary = false;
    Vec boundary_v;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      maps[c].resize(classes[c].size());
      parallel_for(classes[c].size(),
                   [&](std::size_t i) { maps[c][i] = tilt_map(f, xbar, delta, classes[c][i], cfg); });
      for (std::size_t i = 0; i < maps[c].size() && !boundary; ++i) {
        if (maps[c][i].boundary_active) {
          boundary = true;
          boundary_v = classes[c][i];
        }
      }
    }
    if (boundary) {
      if (h < cfg.max_halvings) {
        delta *= 0.5;
        continue;
      }
      out.stable = false;
      out.reason = "minimizer on the boundary of the δ-ball after " +
                   std::to_string(h) + " halvings";
      out.witness = boundary_v;
      return out;
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
      for (std::size_t i = 0; i < maps[c].size(); ++i) {
        if (maps[c][i].minimizers.size() != 1) {
          out.stable = false;
          out.reason = maps[c][i].minimizers.empty() ? "no minimizer found"
                                                     : "tilt map multivalued";
          out.witness = classes[c][i];
          return out;
        }
      }
    }
    double kappa = 0.0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      for (std::size_t i = 0; i < maps[c].size(); ++i) {
        for (std::size_t k = i + 1; k < maps[c].size(); ++k) {
          const double dv = (classes[c][i] - classes[c][k]).norm();
          if (dv == 0.0) continue;
          const double dx = (maps[c][i].minimizers[0] - maps[c][k].minimizers[0]).norm();
          kappa = std::max(kappa, dx / dv);
        }
      }
    }
    out.stable = true;
    out.kappa_hat = kappa;
    return out;
  }
}

Relationship make_equal(std::string name, double lhs, double rhs, double tol) {
  Relationship r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.tolerance = tol;
  r.kind = "equal";
  r.pass = (std::isinf(lhs) && std::isinf(rhs) && lhs == rhs) || std::abs(lhs - rhs) <= tol;
  return r;
}

Relationship make_at_least(std::string name, double lhs, double rhs, double tol) {
  Relationship r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.tolerance = tol;
  r.kind = "at_least";
  r.pass = lhs >= rhs - tol;
  return r;
}

bool ModulusReport::all_pass() const {
  return std::all_of(relationships.begin(), relationships.end(),
                     [](const Relationship& r) { return r.pass; });
}

ModulusReport modulus_crosscheck(const FunctionHandle& f, const SubgradientPair& anchor,
                                 const ModulusCheckConfig& cfg) {
  ModulusReport rep;
  rep.function = f.name();
  rep.anchor = anchor;

  const SDirect sd = s_direct(f, anchor, cfg.svar);
  rep.s_direct = sd.s;
  const QuadraticBundle qb = quad_bundle(f, anchor, cfg.bundle);
  const double mu = uniform_lower_bound(qb);
  rep.mu = mu;
  rep.bundle = qb;
  const CnvEstimate cnv = cnv_estimate(f, anchor, cfg.cnv);
  rep.cnv = cnv.value;
  rep.cnv_low_confidence = cnv.low_confidence;

  rep.config = {{"lambda", qb.lambda},
                {"epsilon", cfg.svar.pairs.epsilon},
                {"svar_radius", cfg.svar.radius},
                {"tol", cfg.tol},
                {"reverse_margin", cfg.reverse_margin},
                {"shift_r", cfg.shift_r},
                {"cnv_beta0", cfg.cnv.beta0}};

  if (sd.s) {
    const double s = *sd.s;
    rep.relationships.push_back(make_at_least("mu >= s/2", mu, 0.5 * s, cfg.tol));
    if (std::isfinite(mu)) {
      rep.relationships.push_back(make_equal("mu = s/2", mu, 0.5 * s, cfg.tol));
    }
    auto c = make_equal("cnv = s", cnv.value, s, cfg.tol * std::max(1.0, std::abs(s)));
    if (cnv.low_confidence) c.note = "cnv stages disagree";
    rep.relationships.push_back(std::move(c));
  } else {
    Relationship r;
    r.name = "s_direct exists";
    r.kind = "at_least";
    r.lhs = cfg.svar.bisect_lo;
    r.rhs = cfg.svar.bisect_lo;
    r.note = "svar fails at the lower bisection bound";
    rep.relationships.push_back(std::move(r));
  }

  if (std::isfinite(mu)) {
    for (double extra : {0.0, 0.5, 1.0}) {
      const double s = 2 * mu - cfg.reverse_margin - extra;
      if (s < cfg.svar.bisect_lo) continue;
      const SvarResult sv = svar_check(f, anchor, s, cfg.svar);
      auto r = make_at_least("svar at s = 2mu - " + fmt(cfg.reverse_margin + extra),
                             sv.worst_margin, 0.0, cfg.svar.tol * (1.0 + std::abs(anchor.fx)));
      if (sv.inconclusive) r.note = "only the anchor was sampled";
      rep.relationships.push_back(std::move(r));
    }
  } else {
    Relationship r;
    r.name = "svar at s = 2mu - margin";
    r.kind = "at_least";
    r.lhs = kInf;
    r.rhs = 0.0;
    r.pass = true;
    r.note = "vacuous: mu = +inf";
    rep.relationships.push_back(std::move(r));
  }

  if (cfg.shift_r > 0) {
    const int n = f.dim();
    const Mat H = 2 * cfg.shift_r * Mat::Identity(n, n);
    const FunctionHandle g = add_quadratic(f, H, anchor.x);
    QuadBundleConfig gcfg = cfg.bundle;
    gcfg.lambda = qb.lambda;
    const QuadraticBundle gb = quad_bundle(g, anchor, gcfg);
    const double dist = bundle_set_distance(gb.forms(), bundle_shift(qb.forms(), H));
    rep.relationships.push_back(
        make_equal("bundle of f + r|x - x̄|^2 = shifted bundle", dist, 0.0, cfg.tol));
    const double mu_g = uniform_lower_bound(gb);
    rep.relationships.push_back(
        make_equal("mu(f + r|x - x̄|^2) = mu + r", mu_g, mu + cfg.shift_r, cfg.tol));
  }
  return rep;
}

ModulusReport tilt_crosscheck(const FunctionHandle& f, const Vec& xbar,
                              const TiltCheckConfig& cfg) {
  const SubgradientPair anchor = make_pair(f, xbar, Vec::Zero(f.dim()));
  return tilt_crosscheck(f, xbar, quad_bundle(f, anchor, cfg.bundle), cfg);
}

ModulusReport tilt_crosscheck(const FunctionHandle& f, const Vec& xbar,
                              const QuadraticBundle& qb, const TiltCheckConfig& cfg) {
  ModulusReport rep;
  rep.function = f.name();
  rep.anchor = make_pair(f, xbar, Vec::Zero(f.dim()));

  const TiltResult tilt = tilt_check(f, xbar, cfg.tilt);
  rep.tilt_stable = tilt.stable;
  const double mu = uniform_lower_bound(qb);
  rep.mu = mu;
  rep.bundle = qb;
  rep.config = {{"lambda", qb.lambda},
                {"delta", tilt.delta},
                {"v_radius", cfg.tilt.v_radius},
                {"tol", cfg.tol}};

  if (!tilt.stable) {
    Relationship r;
    r.name = "tilt stable";
    r.kind = "equal";
    r.note = tilt.reason;
    rep.relationships.push_back(std::move(r));
    return rep;
  }
  rep.kappa = tilt.kappa_hat;
  if (tilt.kappa_hat > 1e-12) {
    const double target = 1.0 / (2 * tilt.kappa_hat);
    rep.relationships.push_back(make_at_least("mu >= 1/(2 kappa)", mu, target, cfg.tol));
    rep.relationships.push_back(make_equal("mu = 1/(2 kappa)", mu, target, cfg.tol));
  } else {
    Relationship r;
    r.name = "mu >= 1/(2 kappa)";
    r.kind = "at_least";
    r.lhs = mu;
    r.rhs = kInf;
    r.pass = true;
    r.note = "vacuous: kappa_hat = 0";
    rep.relationships.push_back(std::move(r));
  }
  if (std::isfinite(mu) && mu > 0) {
    rep.relationships.push_back(
        make_at_least("kappa <= 1/(2 mu)", 1.0 / (2 * mu), tilt.kappa_hat, cfg.tol));
  }
  return rep;
}

SemidefiniteCheck semidefinite_necessity_check(const FunctionHandle& f,
                                               const SubgradientPair& anchor,
                                               const QuadBundleConfig& bcfg,
                                               const SvarConfig& scfg, double tol) {
  SemidefiniteCheck out;
  const SvarResult sv = svar_check(f, anchor, 0.0, scfg);
  out.precondition = sv.ok && !sv.inconclusive;
  if (!out.precondition) return out;
  const QuadraticBundle qb = quad_bundle(f, anchor, bcfg);
  for (const GQF& q : qb.forms()) out.min_value = std::min(out.min_value, q.min_on_sphere());
  out.ok = out.min_value >= -tol;
  return out;
}

}  // namespace varan
