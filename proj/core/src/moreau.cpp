#include "varan/moreau.hpp"

#include "varan/grids.hpp"
#include "varan/parallel.hpp"

#include <cmath>
#include <memory>

namespace varan {
namespace {

Objective prox_objective(const FunctionHandle& f, double lambda, const Vec& z) {
  Objective obj;
  obj.value = [&f, lambda, z](const Vec& u) {
    const double v = f.eval(u);
    return std::isinf(v) ? v : v + (u - z).squaredNorm() / (2 * lambda);
  };
  if (f.has_gradient() && f.has_hessian()) {
    obj.gradient = [&f, lambda, z](const Vec& u) -> Vec {
      return f.gradient(u) + (u - z) / lambda;
    };
    obj.hessian = [&f, lambda](const Vec& u) -> Mat {
      const auto n = u.size();
      return f.hessian(u) + Mat::Identity(n, n) / lambda;
    };
  }
  return obj;
}

void check_lambda(double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::contract, "lambda must be a positive finite number");
  }
}

}  // namespace

double default_lambda(double prox_level) {
  if (prox_level <= 0) return 0.1;
  return std::min(0.5 / prox_level, 0.1);
}

ProxResult prox(const FunctionHandle& f, double lambda, const Vec& z,
                const ProxConfig& cfg) {
  check_lambda(lambda);
  if (!f.box().contains(z, 1e-9)) {
    throw Error(ErrorCode::contract, f.name() + ": prox center outside domain box");
  }
  std::vector<Vec> extras;
  if (f.has_prox()) {
    Vec p = f.prox_oracle(lambda, z);
    if (f.box().contains(p, 0.0)) extras.push_back(std::move(p));
  }
  const Objective obj = prox_objective(f, lambda, z);
  double H = cfg.halfwidth > 0 ? cfg.halfwidth : std::max(0.5, 4 * lambda);
  const Box& dom = f.box();
  for (int e = 0; e <= cfg.max_expand; ++e, H *= 2) {
    const Box search = Box::around(z, H).intersect(dom);
    MinimizeConfig mc;
    mc.grid_points = cfg.grid_points;
    mc.max_grid_total = cfg.max_grid_total;
    mc.refine_step = cfg.refine_step;
    mc.multistart_tol = cfg.multistart_tol;
    mc.value_tol = cfg.value_tol;
    mc.dedup_radius = cfg.dedup_factor * search.diameter();
    mc.polish = cfg.polish;
    const GridMinResult r = grid_minimize(obj, search, dom, mc, extras);
    const bool whole = search == dom;
    if (r.all_infinite) {
      if (whole) throw Error(ErrorCode::improper, f.name() + ": f is +inf on the domain box");
      continue;
    }
    bool trust_face = false;
    bool domain_face = false;
    for (int d = 0; d < dom.dim(); ++d) {
      if (r.face_lo[d]) (search.lo[d] > dom.lo[d] ? trust_face : domain_face) = true;
      if (r.face_hi[d]) (search.hi[d] < dom.hi[d] ? trust_face : domain_face) = true;
    }
    if (trust_face) continue;
    if (domain_face) {
      throw Error(ErrorCode::prox_unbounded,
                  f.name() + ": prox objective decreases toward the domain boundary");
    }
    ProxResult out;
    out.minimizers = r.minimizers;
    out.value = ExtendedReal(r.value);
    out.certificate = {r.grid_points, H, r.grid_step, r.halvings, r.starts, e,
                       mc.dedup_radius};
    return out;
  }
  throw Error(ErrorCode::numerical, f.name() + ": prox trust box expansion limit reached");
}

ExtendedReal envelope(const FunctionHandle& f, double lambda, const Vec& z,
                      const ProxConfig& cfg) {
  return prox(f, lambda, z, cfg).value;
}

Vec envelope_gradient(const FunctionHandle& f, double lambda, const Vec& z,
                      const ProxConfig& cfg) {
  const ProxResult r = prox(f, lambda, z, cfg);
  if (!r.single_valued()) {
    throw Error(ErrorCode::non_differentiable,
                f.name() + ": prox is multivalued, envelope not differentiable here");
  }
  return (z - r.minimizers.front()) / lambda;
}

ProxResult prox_local(const FunctionHandle& f, double lambda, const Vec& z,
                      const Vec& start, double step0, const ProxConfig& cfg) {
  check_lambda(lambda);
  const Objective obj = prox_objective(f, lambda, z);
  RefineResult r = pattern_refine(obj, start, step0, cfg.refine_step, f.box(), cfg.polish);
  if (f.has_prox()) {
    const Vec p = f.prox_oracle(lambda, z);
    if (f.box().contains(p, 0.0)) {
      const double vp = obj.value(p);
      if (vp <= r.value + cfg.value_tol) r = {p, std::min(vp, r.value), r.halvings};
    }
  }
  ProxResult out;
  out.minimizers = {r.x};
  out.value = ExtendedReal(r.value);
  out.certificate.refine_halvings = r.halvings;
  out.certificate.starts = 1;
  return out;
}

LocalEnvelope::LocalEnvelope(const FunctionHandle& f, double lambda,
                             const Vec& center, const ProxConfig& cfg)
    : f_(f), lambda_(lambda), center_(center), cfg_(cfg) {
  const ProxResult r = prox(f_, lambda_, center_, cfg_);
  if (!r.single_valued()) {
    throw Error(ErrorCode::non_differentiable, f.name() + ": prox multivalued at center");
  }
  p_center_ = r.minimizers.front();
}

LocalEnvelope::LocalEnvelope(const FunctionHandle& f, double lambda, const Vec& center,
                             const Vec& center_prox, const ProxConfig& cfg)
    : f_(f), lambda_(lambda), center_(center), p_center_(center_prox), cfg_(cfg) {}

Vec LocalEnvelope::prox_point(const Vec& z) const {
  const double step0 = std::max(2 * (z - center_).norm(), 1e-9);
  return prox_local(f_, lambda_, z, p_center_, step0, cfg_).minimizers.front();
}

double LocalEnvelope::value(const Vec& z) const {
  const double step0 = std::max(2 * (z - center_).norm(), 1e-9);
  return prox_local(f_, lambda_, z, p_center_, step0, cfg_).value.as_double();
}

Vec LocalEnvelope::gradient(const Vec& z) const { return (z - prox_point(z)) / lambda_; }

AttentivePath attentive_path(const FunctionHandle& f, const SubgradientPair& anchor,
                             double lambda, const std::vector<Vec>& z_seq,
                             const ProxConfig& cfg, bool check) {
  check_lambda(lambda);
  const double r = f.meta().prox_level;
  if (lambda * r >= 1) {
    throw Error(ErrorCode::contract, "attentive_path needs lambda < 1/r");
  }
  AttentivePath out;
  std::vector<ProxResult> results(z_seq.size());
  std::vector<std::string> failures(z_seq.size());
  parallel_for(z_seq.size(), [&](std::size_t k) {
    try {
      results[k] = prox(f, lambda, z_seq[k], cfg);
    } catch (const Error& e) {
      failures[k] = e.what();
    }
  });
  for (std::size_t k = 0; k < z_seq.size(); ++k) {
    if (!failures[k].empty()) {
      out.skipped.push_back({k, failures[k]});
      continue;
    }
    if (!results[k].single_valued()) {
      out.skipped.push_back({k, "envelope not differentiable: prox is multivalued"});
      continue;
    }
    const Vec& x = results[k].minimizers.front();
    const Vec v = (z_seq[k] - x) / lambda;
    out.pairs.push_back({x, v, f.eval(x)});
    out.source.push_back(k);
  }
  if (!check || out.pairs.empty()) return out;

  const Vec zbar = anchor.x + lambda * anchor.v;
  const double cx = 1.5 / (1 - lambda * r);
  const std::size_t m = out.pairs.size();
  for (std::size_t i = m - std::min<std::size_t>(3, m); i < m; ++i) {
    const auto& p = out.pairs[i];
    const Vec& z = z_seq[out.source[i]];
    const double dz = (z - zbar).norm();
    const double dx = (p.x - anchor.x).norm();
    const double dv = (p.v - anchor.v).norm();
    const double df = p.fx - anchor.fx;
    const double f_hi = dx * (anchor.x + p.x - 2 * z).norm() / (2 * lambda);
    const double f_lo = anchor.v.norm() * dx + (r + 1) * dx * dx;
    const bool ok = dx <= cx * dz + 1e-7 && dv <= (1 + cx) * dz / lambda + 1e-6 &&
                    df <= f_hi + 1e-7 && df >= -f_lo - 1e-7;
    if (!ok) {
      throw Error(ErrorCode::path_divergence,
                  f.name() + ": attentive path does not approach the anchor (step " +
                      std::to_string(out.source[i]) + ")");
    }
  }
  return out;
}

bool prox_bounded_at(const FunctionHandle& f, double lambda) {
  check_lambda(lambda);
  const Box& box = f.box();
  const int n = f.dim();
  const Vec c = 0.5 * (box.lo + box.hi);
  const Vec half = 0.5 * (box.hi - box.lo);
  const Vec x0 = c + 0.37 * Vec::Ones(n).cwiseMin(0.5 * half);
  int G = 401;
  if (n > 1) G = static_cast<int>(std::floor(std::pow(40000.0, 1.0 / n)));
  if (G % 2 == 0) --G;
  const TensorGrid grid(box, G);
  std::vector<double> vals(grid.size());
  std::vector<double> scaled(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const Vec u = grid.point(i);
    const double fu = f.eval(u);
    vals[i] = std::isinf(fu) ? fu : fu + (u - x0).squaredNorm() / (2 * lambda);
    scaled[i] = ((u - c).cwiseAbs().array() / half.array()).maxCoeff();
  });
  double inner = kInf;
  double outer = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    (scaled[i] <= 0.5 ? inner : outer) = std::min(scaled[i] <= 0.5 ? inner : outer, vals[i]);
  }
  if (!std::isfinite(inner)) return false;
  return outer > inner + 1e-9 * std::max(1.0, std::abs(inner));
}

bool prox_bounded_probe(const FunctionHandle& f) {
  for (int j = 0; j <= 6; ++j) {
    if (prox_bounded_at(f, std::ldexp(1.0, -j))) return true;
  }
  return false;
}

C11Result c11_probe(const FunctionHandle& f, double lambda, const Vec& center,
                    double radius, int per_axis, const ProxConfig& cfg) {
  const auto pts = ball_grid(center, radius, per_axis);
  std::vector<Vec> grads(pts.size());
  std::vector<char> ok(pts.size(), 0);
  parallel_for(pts.size(), [&](std::size_t i) {
    try {
      grads[i] = envelope_gradient(f, lambda, pts[i], cfg);
      ok[i] = 1;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::non_differentiable) throw;
    }
  });
  C11Result out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!ok[i]) {
      out.excluded.push_back(pts[i]);
      continue;
    }
    ++out.samples;
    for (std::size_t j = 0; j < i; ++j) {
      if (!ok[j]) continue;
      const double dz = (pts[i] - pts[j]).norm();
      if (dz > 0) out.lipschitz = std::max(out.lipschitz, (grads[i] - grads[j]).norm() / dz);
    }
  }
  return out;
}

FunctionHandle make_envelope_handle(const FunctionHandle& f, double lambda,
                                    const ProxConfig& cfg) {
  check_lambda(lambda);
  const double r = f.meta().prox_level;
  FunctionMeta meta;
  meta.name = "env(" + f.name() + ")";
  meta.description = "Moreau envelope of " + f.name();
  meta.params = f.meta().params;
  meta.params["env_lambda"] = lambda;
  meta.c11 = lambda * r < 1;
  meta.prox_level = lambda * r < 1 ? r / (1 - lambda * r) : r;
  if (f.meta().s && 1 + lambda * *f.meta().s > 0) {
    meta.s = *f.meta().s / (1 + lambda * *f.meta().s);
  }
  for (const auto& a : f.meta().anchors) {
    meta.anchors.push_back({a.x + lambda * a.v, a.v, a.fx + 0.5 * lambda * a.v.squaredNorm()});
  }
  auto base = std::make_shared<FunctionHandle>(f);
  FunctionHandle h(
      f.dim(),
      [base, lambda, cfg](const Vec& z) { return envelope(*base, lambda, z, cfg).as_double(); },
      f.box(), meta);
  h.set_gradient(
      [base, lambda, cfg](const Vec& z) -> Vec { return envelope_gradient(*base, lambda, z, cfg); });
  return h;
}

}  // namespace varan
