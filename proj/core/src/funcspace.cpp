#include "varan/funcspace.hpp"

#include "varan/grids.hpp"

#include <cmath>

namespace varan {

FunctionHandle::FunctionHandle(int n, ValueFn value, Box box, FunctionMeta meta)
    : n_(n), value_(std::move(value)), box_(std::move(box)), meta_(std::move(meta)) {
  if (n_ <= 0) throw Error(ErrorCode::contract, "dimension must be positive");
  if (box_.dim() != n_) throw Error(ErrorCode::contract, "box dimension mismatch");
}

FunctionHandle& FunctionHandle::set_box(Box b) {
  if (b.dim() != n_) throw Error(ErrorCode::contract, "box dimension mismatch");
  box_ = std::move(b);
  return *this;
}

void FunctionHandle::check_point(const Vec& x) const {
  if (x.size() != n_) {
    throw Error(ErrorCode::contract, meta_.name + ": point has wrong dimension");
  }
  if (!box_.contains(x, 1e-9)) {
    throw Error(ErrorCode::contract, meta_.name + ": point outside domain box");
  }
}

double FunctionHandle::eval(const Vec& x) const {
  check_point(x);
  const double v = value_(x);
  if (std::isnan(v) || v == -kInf) {
    throw Error(ErrorCode::contract, meta_.name + ": oracle returned NaN or -inf");
  }
  return v;
}

Vec FunctionHandle::gradient(const Vec& x) const {
  if (!grad_) throw Error(ErrorCode::contract, meta_.name + ": no gradient oracle");
  check_point(x);
  return grad_(x);
}

Mat FunctionHandle::hessian(const Vec& x) const {
  if (!hess_) throw Error(ErrorCode::contract, meta_.name + ": no hessian oracle");
  check_point(x);
  return hess_(x);
}

Vec FunctionHandle::prox_oracle(double lambda, const Vec& z) const {
  if (!prox_) throw Error(ErrorCode::contract, meta_.name + ": no prox oracle");
  if (!(lambda > 0)) throw Error(ErrorCode::contract, "lambda must be positive");
  return prox_(lambda, z);
}

SubgradientPair make_pair(const FunctionHandle& f, const Vec& x, const Vec& v) {
  const double fx = f.eval(x);
  if (!std::isfinite(fx)) {
    throw Error(ErrorCode::anchor_infeasible, f.name() + ": f(x) is +inf at pair");
  }
  return {x, v, fx};
}

bool attentive_member(const SubgradientPair& pair, const Localization& loc) {
  const double eps = loc.epsilon;
  return (pair.x - loc.anchor.x).norm() < eps &&
         (pair.v - loc.anchor.v).norm() < eps &&
         pair.fx < loc.anchor.fx + eps;
}

bool lsc_probe(const FunctionHandle& f, const Vec& x, const LscConfig& cfg) {
  const double fx = f.eval(x);
  const auto dirs = probe_directions(f.dim());
  for (const Vec& d : dirs) {
    // Steps halve along the tail, so 2 f_k - f_{k-1} removes the first-order
    // term of a locally Lipschitz f and leaves jumps intact.
    double tail_min = kInf;
    double prev = kInf;
    for (int k = cfg.levels - cfg.tail - 1; k < cfg.levels; ++k) {
      const Vec xk = x + cfg.radius * std::ldexp(1.0, -k) * d;
      if (!f.box().contains(xk)) continue;
      const double fk = f.eval(xk);
      if (k >= cfg.levels - cfg.tail) {
        tail_min = std::min(tail_min, std::isfinite(prev) && std::isfinite(fk) ? 2 * fk - prev : fk);
      }
      prev = fk;
    }
    if (std::isinf(fx)) {
      if (std::isfinite(tail_min)) return false;
      continue;
    }
    if (tail_min < fx - cfg.tol * std::max(1.0, std::abs(fx))) return false;
  }
  return true;
}

double SlackSchedule::operator()(double t) const { return C * std::pow(t, power); }

SubgradientCheck subgradient_check(const FunctionHandle& f,
                                   const SubgradientPair& pair, double radius,
                                   const SlackSchedule& slack) {
  SubgradientCheck out;
  out.witness = pair.x;
  const auto dirs = probe_directions(f.dim());
  const double floor = 1e-12 * (1.0 + std::abs(pair.fx));
  for (const Vec& d : dirs) {
    for (int k = 0; k < 16; ++k) {
      const double t = radius * std::ldexp(1.0, -k);
      const Vec xp = pair.x + t * d;
      if (!f.box().contains(xp)) continue;
      const double fp = f.eval(xp);
      if (std::isinf(fp)) continue;
      const double margin = fp - pair.fx - pair.v.dot(xp - pair.x) + slack(t);
      if (margin < out.worst_margin) {
        out.worst_margin = margin;
        out.witness = xp;
      }
    }
  }
  out.ok = out.worst_margin >= -floor;
  return out;
}

FunctionHandle add_quadratic(const FunctionHandle& f, const Mat& H,
                             const Vec& center) {
  const int n = f.dim();
  if (H.rows() != n || H.cols() != n || center.size() != n) {
    throw Error(ErrorCode::contract, "add_quadratic: dimension mismatch");
  }
  const Mat Hs = 0.5 * (H + H.transpose());
  auto base = f.raw_value();
  FunctionMeta meta = f.meta();
  meta.name = f.name() + "+quad";
  meta.description = f.meta().description + " plus a quadratic";
  const double hmin = Eigen::SelfAdjointEigenSolver<Mat>(Hs).eigenvalues().minCoeff();
  meta.prox_level = std::max(0.0, f.meta().prox_level - hmin);
  if (meta.s) *meta.s += hmin;
  meta.kappa.reset();
  meta.anchors.clear();
  for (const auto& a : f.meta().anchors) {
    const Vec d = a.x - center;
    meta.anchors.push_back({a.x, a.v + Hs * d, a.fx + 0.5 * d.dot(Hs * d)});
  }
  FunctionHandle g(
      n,
      [base, Hs, center](const Vec& x) {
        const double v = base(x);
        if (std::isinf(v)) return v;
        const Vec d = x - center;
        return v + 0.5 * d.dot(Hs * d);
      },
      f.box(), meta);
  if (f.has_gradient()) {
    auto gf = f.raw_gradient();
    g.set_gradient([gf, Hs, center](const Vec& x) -> Vec { return gf(x) + Hs * (x - center); });
  }
  if (f.has_hessian()) {
    auto hf = f.raw_hessian();
    g.set_hessian([hf, Hs](const Vec& x) -> Mat { return hf(x) + Hs; });
  }
  // Prox stays closed-form when H is a multiple of the identity.
  const double h = Hs(0, 0);
  if (f.has_prox() && Hs.isApprox(h * Mat::Identity(n, n), 1e-14)) {
    auto pf = f.raw_prox();
    g.set_prox([pf, h, center](double lambda, const Vec& z) -> Vec {
      const double denom = 1.0 + lambda * h;
      if (!(denom > 0)) {
        throw Error(ErrorCode::prox_unbounded, "prox of shifted function unbounded");
      }
      const Vec y = (z + lambda * h * center) / denom;
      return pf(lambda / denom, y);
    });
  }
  return g;
}

FunctionHandle sum(const FunctionHandle& f, const FunctionHandle& g) {
  if (f.dim() != g.dim()) throw Error(ErrorCode::contract, "sum: dimension mismatch");
  FunctionMeta meta;
  meta.name = f.name() + "+" + g.name();
  meta.description = "sum of " + f.name() + " and " + g.name();
  meta.prox_level = f.meta().prox_level + g.meta().prox_level;
  auto fv = f.raw_value();
  auto gv = g.raw_value();
  FunctionHandle h(
      f.dim(),
      [fv, gv](const Vec& x) {
        const double a = fv(x);
        if (std::isinf(a)) return a;
        const double b = gv(x);
        return std::isinf(b) ? b : a + b;
      },
      f.box().intersect(g.box()), meta);
  if (f.has_gradient() && g.has_gradient()) {
    auto fg = f.raw_gradient();
    auto gg = g.raw_gradient();
    h.set_gradient([fg, gg](const Vec& x) -> Vec { return fg(x) + gg(x); });
  }
  if (f.has_hessian() && g.has_hessian()) {
    auto fh = f.raw_hessian();
    auto gh = g.raw_hessian();
    h.set_hessian([fh, gh](const Vec& x) -> Mat { return fh(x) + gh(x); });
  }
  return h;
}

}  // namespace varan
