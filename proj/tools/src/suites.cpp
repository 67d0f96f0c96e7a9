#include "varan_app/suites.hpp"

#include "varan/grids.hpp"
#include "varan/parallel.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

namespace varan::app {
namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

Mat diag(std::initializer_list<double> d) {
  Mat m = Mat::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) {
    m(i, i) = x;
    ++i;
  }
  return m;
}

struct Entry {
  std::string label;
  FunctionHandle f;
  SubgradientPair anchor;
};

/// Every declared anchor of every corpus entry at default parameters.
std::vector<Entry> corpus_anchors(bool first_only) {
  std::vector<Entry> out;
  for (const auto& name : corpus_names()) {
    FunctionHandle f = corpus_get(name);
    const auto& anchors = f.meta().anchors;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      out.push_back({name + "#" + std::to_string(i), f, anchors[i]});
      if (first_only) break;
    }
  }
  return out;
}

QuadBundleConfig bundle_cfg(double lambda = 0.1) {
  QuadBundleConfig c;
  c.lambda = lambda;
  return c;
}

/// Evenly spaced pick of up to k items.
template <class T>
std::vector<T> spread(const std::vector<T>& items, std::size_t k) {
  if (items.size() <= k) return items;
  std::vector<T> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(items[i * items.size() / k]);
  return out;
}

CriterionRow start(int id, std::string name) {
  CriterionRow r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

// Criteria ------------------------------------------------------------------

CriterionRow c1_example_bundle() {
  CriterionRow row = start(1, "quadratic bundle of the piecewise example at (0,0)");
  row.budget = 30;
  row.tolerance = 5e-2;
  const FunctionHandle f = corpus_get("jump_square");
  const SubgradientPair a = f.meta().anchors.front();
  QuadBundleConfig cfg = bundle_cfg(0.1);
  const QuadraticBundle rev = quad_bundle(f, a, cfg);
  const std::vector<GQF> expected{GQF::full(Mat::Identity(1, 1)), GQF::zero_subspace(1)};
  const double d_rev = bundle_set_distance(rev.forms(), expected);

  cfg.variant = BundleVariant::original;
  const QuadraticBundle orig = quad_bundle(f, a, cfg);
  const GQF q0 = GQF::full(Mat::Zero(1, 1));
  double d_q0 = kInf;
  for (const GQF& q : orig.forms()) d_q0 = std::min(d_q0, gqf_distance(q, q0));
  double d_orig = 0.0;
  for (const GQF& e : expected) {
    double best = kInf;
    for (const GQF& q : orig.forms()) best = std::min(best, gqf_distance(q, e));
    d_orig = std::max(d_orig, best);
  }
  row.measured = std::max({d_rev, d_q0, d_orig});
  row.pass = rev.members.size() == 2 && row.measured <= row.tolerance;
  row.detail = "revised members=" + std::to_string(rev.members.size()) +
               " hausdorff=" + fmt(d_rev) + "; original members=" +
               std::to_string(orig.members.size()) + " dist(q_[0])=" + fmt(d_q0);
  return row;
}

CriterionRow c2_modulus_constants() {
  CriterionRow row = start(2, "mu = s_direct/2 on the modulus subset");
  row.budget = 120;
  row.tolerance = 5e-2;
  std::vector<FunctionHandle> fs;
  for (double s : {1.0, 2.0, 3.0}) fs.push_back(corpus_get("quad_s", {{"s", s}}));
  fs.push_back(corpus_get("jump_square"));
  fs.push_back(corpus_get("huber_quad"));
  double worst = 0.0;
  std::string detail;
  bool ok = true;
  for (const auto& f : fs) {
    const SubgradientPair a = f.meta().anchors.front();
    const SDirect sd = s_direct(f, a);
    const double mu = uniform_lower_bound(quad_bundle(f, a, bundle_cfg()));
    if (!sd.s) {
      ok = false;
      detail += f.name() + ": no s_direct; ";
      continue;
    }
    const double e = std::abs(mu - 0.5 * *sd.s);
    worst = std::max(worst, e);
    detail += f.name() + "(s=" + fmt(*sd.s) + ",mu=" + fmt(mu) + ") ";
  }
  row.measured = worst;
  row.pass = ok && worst <= row.tolerance;
  row.detail = detail;
  return row;
}

CriterionRow c3_tilt_constants() {
  CriterionRow row = start(3, "mu = 1/(2 kappa_hat) for quadratics and the piecewise example");
  row.budget = 60;
  row.tolerance = 1e-3;
  TiltCheckConfig cfg;
  cfg.bundle = bundle_cfg();
  double worst = 0.0;
  bool ok = true;
  std::string detail;
  for (double a : {0.5, 1.0, 4.0}) {
    const FunctionHandle f = corpus_get("quad_s", {{"s", a}});
    const ModulusReport r = tilt_crosscheck(f, Vec::Zero(1), cfg);
    if (!r.tilt_stable.value_or(false) || !r.kappa || *r.kappa <= 0) {
      ok = false;
      detail += "a=" + fmt(a) + " not tilt stable; ";
      continue;
    }
    const double e = std::abs(*r.mu - 1.0 / (2 * *r.kappa));
    worst = std::max(worst, e);
    detail += "a=" + fmt(a) + "(kappa=" + fmt(*r.kappa) + ",mu=" + fmt(*r.mu) + ") ";
  }
  const FunctionHandle pe = corpus_get("jump_square");
  const ModulusReport r = tilt_crosscheck(pe, Vec::Zero(1), cfg);
  const double kappa = r.kappa.value_or(kInf);
  const double mu = r.mu.value_or(kInf);
  const bool pe_ok = r.tilt_stable.value_or(false) && std::abs(kappa - 0.5) <= 1e-2 &&
                     std::abs(mu - 1.0) <= 5e-2;
  detail += "jump_square(kappa=" + fmt(kappa) + ",mu=" + fmt(mu) + ")";
  row.measured = worst;
  row.pass = ok && pe_ok && worst <= row.tolerance;
  row.detail = detail;
  return row;
}

CriterionRow c4_envelope_identity() {
  CriterionRow row = start(4, "half envelope of d2 = FD second derivative of the envelope");
  row.budget = 60;
  row.tolerance = 1e-3;
  double worst = 0.0;
  int pairs = 0;
  int entries = 0;
  std::string thin;
  for (const Entry& e : corpus_anchors(true)) {
    const FunctionHandle& f = e.f;
    const double lambda = default_lambda(f.meta().prox_level);
    const QuadraticBundle b = quad_bundle(f, e.anchor, bundle_cfg(lambda));
    std::vector<const BundleSample*> env;
    std::vector<const BundleSample*> grad;
    for (const auto& s : b.samples) (s.source == "envelope" ? env : grad).push_back(&s);
    std::vector<const BundleSample*> pool = spread(env, 20);
    for (const auto* s : spread(grad, 20 - pool.size())) pool.push_back(s);
    const auto sphere = sphere_grid(f.dim(), 32);
    std::vector<double> errs(pool.size(), -1.0);
    parallel_for(pool.size(), [&](std::size_t i) {
      const BundleSample& s = *pool[i];
      const Vec z = s.pair.x + lambda * s.pair.v;
      const LocalEnvelope env_f(f, lambda, z, s.pair.x);
      FdGateConfig gate;
      gate.agree = 1e-2;
      const FdHessian h =
          fd_hessian_gate([&env_f](const Vec& y) { return env_f.gradient(y); }, z, 1e-4, gate);
      if (!h.ok) return;
      const GQF q = s.form.scaled(2.0);
      double m = 0.0;
      for (const Vec& w : sphere) {
        const double lhs = gqf_half_envelope(q, lambda, w);
        const double rhs = 0.5 * w.dot(h.H * w);
        m = std::max(m, rel_err(lhs, rhs));
      }
      errs[i] = m;
    });
    int used = 0;
    for (double x : errs) {
      if (x < 0) continue;
      worst = std::max(worst, x);
      ++used;
    }
    pairs += used;
    ++entries;
    if (used < 20) thin += e.label + ":" + std::to_string(used) + " ";
  }
  row.measured = worst;
  row.pass = worst <= row.tolerance && pairs > 0;
  row.detail = std::to_string(pairs) + " pairs over " + std::to_string(entries) + " entries" +
               (thin.empty() ? "" : "; fewer than 20 fitted pairs: " + thin);
  return row;
}

CriterionRow c5_envelope_gradient() {
  CriterionRow row = start(5, "envelope gradient = central differences of the envelope");
  row.tolerance = 1e-4;
  double worst = 0.0;
  int points = 0;
  std::string detail;
  for (const Entry& e : corpus_anchors(true)) {
    const FunctionHandle& f = e.f;
    const int n = f.dim();
    const double lambda = default_lambda(f.meta().prox_level);
    const Vec zbar = e.anchor.x + lambda * e.anchor.v;
    // Two interleaved grids; the second fills in for kinks of the prox.
    std::vector<Vec> cand;
    for (int pass = 0; pass < 2; ++pass) {
      const double shift = pass == 0 ? 0.0 : 0.5;
      if (n == 1) {
        for (int k = 0; k < 100; ++k) {
          cand.push_back(zbar + Vec::Constant(1, -0.5 + (k + shift + 0.25) / 100.0));
        }
      } else {
        const TensorGrid g(Box::around(zbar, 0.5), 10);
        const double offset = (shift + 0.25) * g.step()[0] / 2;
        for (std::size_t k = 0; k < g.size(); ++k) {
          cand.push_back(g.point(k) + Vec::Constant(n, offset));
        }
      }
    }
    std::vector<double> errs(cand.size(), -1.0);
    parallel_for(cand.size(), [&](std::size_t i) {
      const Vec& z = cand[i];
      Vec g;
      try {
        g = envelope_gradient(f, lambda, z);
      } catch (const Error& err) {
        if (err.code() == ErrorCode::non_differentiable) return;
        throw;
      }
      const double h = 1e-5;
      double m = 0.0;
      for (int k = 0; k < n; ++k) {
        Vec dz = Vec::Zero(n);
        dz[k] = h;
        const double fd =
            (envelope(f, lambda, z + dz).value() - envelope(f, lambda, z - dz).value()) / (2 * h);
        m = std::max(m, rel_err(g[k], fd));
      }
      errs[i] = m;
    });
    int used = 0;
    for (double x : errs) {
      if (x < 0 || used == 100) continue;
      worst = std::max(worst, x);
      ++used;
    }
    points += used;
    if (used < 100) detail += e.label + ":" + std::to_string(used) + " ";
  }
  row.measured = worst;
  row.pass = worst <= row.tolerance && detail.empty();
  row.detail = std::to_string(points) + " points" +
               (detail.empty() ? "" : "; entries short of 100 points: " + detail);
  return row;
}

CriterionRow c6_gen_cs(std::uint64_t seed) {
  CriterionRow row = start(6, "generalized Cauchy-Schwarz over random SPD instances");
  row.tolerance = 1e-10;
  const GenCsSweep s = gen_cs_sweep(10000, seed);
  row.measured = s.min_gap;
  row.expected = 0.0;
  row.pass = s.min_gap >= -1e-10 && s.max_equality_error <= 1e-10;
  row.detail = std::to_string(s.instances) + " instances; min(lhs-rhs)=" + fmt(s.min_gap) +
               " max equality error=" + fmt(s.max_equality_error);
  return row;
}

CriterionRow c7_nonemptiness() {
  CriterionRow row = start(7, "quadratic bundle nonempty at every corpus anchor");
  const auto entries = corpus_anchors(false);
  int nonempty = 0;
  std::string empty;
  for (const Entry& e : entries) {
    bool ok = false;
    try {
      ok = nonemptiness_check(e.f, e.anchor, bundle_cfg(default_lambda(e.f.meta().prox_level)));
    } catch (const Error&) {
      ok = false;
    }
    if (ok) {
      ++nonempty;
    } else {
      empty += e.label + " ";
    }
  }
  row.measured = nonempty;
  row.expected = static_cast<double>(entries.size());
  row.pass = empty.empty() && entries.size() >= 8;
  row.detail = std::to_string(nonempty) + "/" + std::to_string(entries.size()) + " anchors" +
               (empty.empty() ? "" : "; empty at " + empty);
  return row;
}

CriterionRow c8_hessian_bundle_modulus() {
  CriterionRow row = start(8, "Hessian-bundle eigenvalues of strongly convex C11 entries");
  row.tolerance = 1e-2;
  struct Case {
    FunctionHandle f;
    double modulus;
  };
  std::vector<Case> cases;
  for (const auto& name : corpus_names()) {
    const FunctionHandle f = corpus_get(name);
    if (f.meta().c11 && f.meta().s && *f.meta().s > 0 && !f.meta().anchors.empty()) {
      cases.push_back({f, *f.meta().s});
    }
  }
  const double lam = 0.1;
  for (double s : {1.0, 3.0}) {
    cases.push_back({make_envelope_handle(corpus_get("quad_s", {{"s", s}}), lam), s / (1 + s * lam)});
  }
  {
    const FunctionHandle hq = corpus_get("huber_quad");
    const double s = *hq.meta().s;
    FunctionHandle env = make_envelope_handle(hq, lam);
    cases.push_back({env, s / (1 + s * lam)});
  }
  double worst = kInf;
  std::string detail;
  for (const Case& c : cases) {
    const Vec x = c.f.meta().anchors.empty() ? Vec::Zero(c.f.dim()) : c.f.meta().anchors[0].x;
    const HessianBundle hb = hessian_bundle(c.f, x);
    double m = kInf;
    for (const Mat& H : hb.matrices()) {
      m = std::min(m, Eigen::SelfAdjointEigenSolver<Mat>(H).eigenvalues().minCoeff());
    }
    worst = std::min(worst, m - c.modulus);
    detail += c.f.name() + "(min eig=" + fmt(m) + ",s=" + fmt(c.modulus) + ") ";
  }
  row.measured = worst;
  row.expected = 0.0;
  row.pass = worst >= -row.tolerance;
  row.detail = detail;
  return row;
}

CriterionRow c9_d2_hessian() {
  CriterionRow row = start(9, "d2 at twice-differentiable points = Hessian form");
  row.tolerance = 1e-3;
  // Candidate points per entry, visited round-robin until 50 are accepted.
  std::vector<std::pair<FunctionHandle, std::vector<Vec>>> pools;
  for (const auto& name : corpus_names()) {
    const FunctionHandle f = corpus_get(name);
    if (!f.has_gradient() || !f.has_hessian() || f.meta().negative_control) continue;
    const int n = f.dim();
    std::vector<Vec> pts;
    if (n == 1) {
      for (int k = 0; k < 12; ++k) pts.push_back(Vec::Constant(1, -0.83 + 0.151 * k));
    } else {
      const TensorGrid g(Box::cube(n, -0.8, 0.8), 4);
      for (std::size_t k = 0; k < g.size(); ++k) pts.push_back(g.point(k) + Vec::Constant(n, 0.037));
    }
    pools.push_back({f, pts});
  }
  struct Point {
    const FunctionHandle* f;
    Vec x;
  };
  std::vector<Point> chosen;
  FdGateConfig gate;
  for (std::size_t round = 0; chosen.size() < 50; ++round) {
    bool any = false;
    for (auto& [f, pts] : pools) {
      if (round >= pts.size() || chosen.size() >= 50) continue;
      any = true;
      const Vec& x = pts[round];
      if (!f.box().contains(x, 0.0) || std::isinf(f.eval(x))) continue;
      // Smooth at the d2 window scale: gradient differences at 1e-2 agree
      // with the Hessian oracle.
      const FdHessian h =
          fd_hessian_gate([&f](const Vec& y) { return f.gradient(y); }, x, 1e-2, gate);
      if (!h.ok || (h.H - f.hessian(x)).norm() > 1e-3 * std::max(1.0, f.hessian(x).norm())) {
        continue;
      }
      chosen.push_back({&f, x});
    }
    if (!any) break;
  }
  std::vector<double> errs(chosen.size(), 0.0);
  parallel_for(chosen.size(), [&](std::size_t i) {
    const FunctionHandle& f = *chosen[i].f;
    const Vec& x = chosen[i].x;
    const Vec v = f.gradient(x);
    const Mat H = f.hessian(x);
    double m = 0.0;
    for (const Vec& w : sphere_grid(f.dim(), 32)) {
      const D2Estimate e = d2(f, x, v, w);
      m = std::max(m, rel_err(e.value.as_double(), w.dot(H * w)));
    }
    errs[i] = m;
  });
  double worst = 0.0;
  for (double e : errs) worst = std::max(worst, e);
  row.measured = worst;
  row.pass = chosen.size() >= 50 && worst <= row.tolerance;
  row.detail = std::to_string(chosen.size()) + " points";
  return row;
}

CriterionRow c10_cnv() {
  CriterionRow row = start(10, "cnv of (s/2)|x|^2 equals s; cnv of the piecewise example");
  row.tolerance = 1e-6;
  double worst = 0.0;
  std::string detail;
  for (double s : {-1.0, 0.0, 1.0, 3.0}) {
    const FunctionHandle f = corpus_get("quad_s", {{"s", s}});
    const CnvEstimate c = cnv_estimate(f, f.meta().anchors.front());
    worst = std::max(worst, std::abs(c.value - s));
    detail += "s=" + fmt(s) + ":" + fmt(c.value) + " ";
  }
  const FunctionHandle pe = corpus_get("jump_square");
  const CnvEstimate c = cnv_estimate(pe, pe.meta().anchors.front());
  detail += "jump_square:" + fmt(c.value);
  row.measured = worst;
  row.pass = worst <= row.tolerance && std::abs(c.value - 2.0) <= 5e-2;
  row.detail = detail;
  return row;
}

CriterionRow c11_sum_rule() {
  CriterionRow row = start(11, "bundle of g + <x,Hx>/2 = shifted bundle of g");
  row.tolerance = 5e-2;
  struct Case {
    std::string g;
    Mat H;
    double vbar;
  };
  const std::vector<Case> cases = {
      {"abs", diag({2}), 0.0},           {"abs", diag({2}), 1.0},
      {"jump_square", diag({2}), 0.0}, {"abs", diag({1, 3}), 0.0},
      {"abs", diag({1, 3}), 1.0},        {"jump_square", diag({1, 3}), 0.0},
  };
  double worst = 0.0;
  std::string detail;
  for (const Case& c : cases) {
    const int n = static_cast<int>(c.H.rows());
    const FunctionHandle g = corpus_get(c.g, {{"n", n}});
    const SubgradientPair a = make_pair(g, Vec::Zero(n), Vec::Constant(n, c.vbar));
    const QuadraticBundle bg = quad_bundle(g, a, bundle_cfg());
    const FunctionHandle gh = add_quadratic(g, c.H, a.x);
    const QuadraticBundle bh = quad_bundle(gh, a, bundle_cfg());
    const double d = bundle_set_distance(bh.forms(), bundle_shift(bg.forms(), c.H));
    worst = std::max(worst, d);
    detail += c.g + "(n=" + std::to_string(n) + ",v=" + fmt(c.vbar) + "):" + fmt(d) + "[" +
              std::to_string(bh.members.size()) + "] ";
  }
  row.measured = worst;
  row.pass = worst <= row.tolerance;
  row.detail = detail;
  return row;
}

template <class Fn>
CriterionRow timed(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionRow row;
  try {
    row = fn();
  } catch (const Error& e) {
    row.pass = false;
    row.detail = std::string("error ") + to_string(e.code()) + ": " + e.what();
  }
  row.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (row.budget > 0 && row.seconds > row.budget) {
    row.pass = false;
    row.detail += " (over the " + fmt(row.budget) + " s budget)";
  }
  return row;
}

void emit(SuiteReport& rep, CriterionRow row, const SuiteOptions& opt) {
  if (opt.on_row) opt.on_row(row);
  rep.rows.push_back(std::move(row));
}

/// Rows of a property battery share this helper.
CriterionRow make_row(int id, std::string name, bool pass, double measured, double expected,
                      double tol, std::string detail) {
  CriterionRow r;
  r.id = id;
  r.name = std::move(name);
  r.pass = pass;
  r.measured = measured;
  r.expected = expected;
  r.tolerance = tol;
  r.detail = std::move(detail);
  return r;
}

}  // namespace

bool SuiteReport::all_pass() const {
  return !rows.empty() &&
         std::all_of(rows.begin(), rows.end(), [](const CriterionRow& r) { return r.pass; });
}

Json SuiteReport::to_json() const {
  Json j;
  j["schema"] = "varan.suite/1";
  j["suite"] = name;
  j["timestamp"] = utc_timestamp();
  j["seed"] = seed;
  Json rows_j = Json::array();
  for (const auto& r : rows) {
    Json x;
    x["id"] = r.id;
    x["name"] = r.name;
    x["pass"] = r.pass;
    x["measured"] = number(r.measured);
    x["expected"] = number(r.expected);
    x["tolerance"] = number(r.tolerance);
    x["detail"] = r.detail;
    rows_j.push_back(x);
  }
  j["rows"] = rows_j;
  j["all_pass"] = all_pass();
  return j;
}

std::string SuiteReport::table() const {
  std::ostringstream os;
  for (const auto& r : rows) {
    char head[160];
    std::snprintf(head, sizeof head, "[%s] %2d %-62s measured=%-12s expected=%-8s tol=%-8s %.1fs",
                  r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), fmt(r.measured).c_str(),
                  fmt(r.expected).c_str(), fmt(r.tolerance).c_str(), r.seconds);
    os << head << "\n";
  }
  return os.str();
}

GenCsSweep gen_cs_sweep(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> dim(1, 4);
  GenCsSweep out;
  for (int i = 0; i < instances; ++i) {
    const int n = dim(rng);
    Mat B(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) B(r, c) = normal(rng);
    }
    const Mat A = B.transpose() * B + 0.1 * Mat::Identity(n, n);
    Vec x(n);
    Vec y(n);
    for (int k = 0; k < n; ++k) x[k] = normal(rng);
    for (int k = 0; k < n; ++k) y[k] = normal(rng);
    const auto [lhs, rhs] = gen_cs(A, x, y);
    out.min_gap = std::min(out.min_gap, lhs - rhs);
    const auto [le, re] = gen_cs(A, x, A * x);
    out.max_equality_error = std::max(out.max_equality_error, rel_err(le, re));
    ++out.instances;
  }
  return out;
}

OracleCheck prox_oracle_invariant(const FunctionHandle& f, double lambda, int points,
                                  double tol) {
  OracleCheck out;
  if (!f.has_prox()) return out;
  const int n = f.dim();
  std::vector<Vec> zs;
  for (const auto& a : f.meta().anchors) {
    const Vec c = a.x + lambda * a.v;
    for (int k = 0; k < points; ++k) {
      const double t = -0.5 + static_cast<double>(k) / std::max(1, points - 1);
      zs.push_back(c + Vec::Constant(n, t));
    }
  }
  std::vector<double> err(zs.size(), 0.0);
  parallel_for(zs.size(), [&](std::size_t i) {
    ProxConfig cfg;
    FunctionHandle plain(f.dim(), [&f](const Vec& x) { return f.eval(x); }, f.box(), f.meta());
    const ProxResult p = prox(plain, lambda, zs[i], cfg);
    const Vec o = f.prox_oracle(lambda, zs[i]);
    double best = kInf;
    for (const Vec& m : p.minimizers) best = std::min(best, (m - o).norm());
    err[i] = best;
  });
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (err[i] > out.worst) {
      out.worst = err[i];
      out.witness = zs[i];
    }
  }
  out.ok = out.worst <= tol;
  return out;
}

CriterionRow acceptance_criterion(int id, const SuiteOptions& opt) {
  switch (id) {
    case 1: return timed(c1_example_bundle);
    case 2: return timed(c2_modulus_constants);
    case 3: return timed(c3_tilt_constants);
    case 4: return timed(c4_envelope_identity);
    case 5: return timed(c5_envelope_gradient);
    case 6: return timed([&] { return c6_gen_cs(opt.seed); });
    case 7: return timed(c7_nonemptiness);
    case 8: return timed(c8_hessian_bundle_modulus);
    case 9: return timed(c9_d2_hessian);
    case 10: return timed(c10_cnv);
    case 11: return timed(c11_sum_rule);
    default:
      throw Error(ErrorCode::config, "acceptance criterion " + std::to_string(id) +
                                         " is not a single-run criterion");
  }
}

SuiteReport run_acceptance(const SuiteOptions& opt) {
  SuiteReport rep;
  rep.name = "acceptance";
  rep.seed = opt.seed;
  for (int id = 1; id < kAcceptanceCriteria; ++id) emit(rep, acceptance_criterion(id, opt), opt);

  const auto t0 = std::chrono::steady_clock::now();
  SuiteReport again;
  again.name = rep.name;
  again.seed = rep.seed;
  for (int id = 1; id < kAcceptanceCriteria; ++id) {
    again.rows.push_back(acceptance_criterion(id, SuiteOptions{opt.seed, nullptr}));
  }
  const std::string a = dump(without_timestamp(rep.to_json()));
  const std::string b = dump(without_timestamp(again.to_json()));
  std::size_t diff = 0;
  while (diff < a.size() && diff < b.size() && a[diff] == b[diff]) ++diff;
  CriterionRow row = start(12, "two acceptance runs give byte-identical reports");
  row.pass = a == b;
  row.measured = row.pass ? 0.0 : 1.0;
  row.detail = row.pass ? std::to_string(a.size()) + " bytes identical"
                        : "first difference at byte " + std::to_string(diff);
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit(rep, row, opt);
  return rep;
}

SuiteReport run_properties(const SuiteOptions& opt) {
  SuiteReport rep;
  rep.name = "properties";
  rep.seed = opt.seed;
  int id = 0;
  auto add = [&](auto fn) {
    CriterionRow r = timed(fn);
    r.id = ++id;
    emit(rep, r, opt);
  };

  add([&] {
    const GenCsSweep s = gen_cs_sweep(10000, opt.seed);
    return make_row(0, "gen_cs sweep", s.min_gap >= -1e-10 && s.max_equality_error <= 1e-10,
                    s.min_gap, 0.0, 1e-10, std::to_string(s.instances) + " instances");
  });

  const auto anchors = corpus_anchors(false);
  add([&] {
    const std::vector<double> grid{-2, -1, 0, 0.5, 1, 1.5, 2, 3};
    std::string bad;
    for (const Entry& e : anchors) {
      bool seen_fail = false;
      for (double s : grid) {
        const bool ok = svar_check(e.f, e.anchor, s).ok;
        if (ok && seen_fail) bad += e.label + "@" + fmt(s) + " ";
        seen_fail = seen_fail || !ok;
      }
    }
    return make_row(0, "svar_check monotone in s", bad.empty(), bad.empty() ? 0 : 1, 0, 0, bad);
  });

  std::vector<std::optional<double>> sdirect(anchors.size());
  std::vector<double> mus(anchors.size(), kInf);
  add([&] {
    const SvarConfig cfg;
    const double step = (cfg.bisect_hi - cfg.bisect_lo) / std::ldexp(1.0, cfg.bisect_iters);
    double worst = 0.0;
    std::string detail;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      sdirect[i] = s_direct(anchors[i].f, anchors[i].anchor, cfg).s;
      const auto& declared = anchors[i].f.meta().s;
      const bool first = anchors[i].label.size() >= 2 &&
                         anchors[i].label.compare(anchors[i].label.size() - 2, 2, "#0") == 0;
      if (!declared || !first || !sdirect[i]) continue;
      const double e = std::abs(*sdirect[i] - *declared);
      worst = std::max(worst, e);
      detail += anchors[i].label + ":" + fmt(*sdirect[i]) + " ";
    }
    return make_row(0, "s_direct within one bisection step of the declared modulus",
                    worst <= step, worst, 0.0, step, detail);
  });

  add([&] {
    double worst = kInf;
    std::string detail;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      const FunctionHandle& f = anchors[i].f;
      mus[i] = uniform_lower_bound(
          quad_bundle(f, anchors[i].anchor, bundle_cfg(default_lambda(f.meta().prox_level))));
      if (!sdirect[i]) continue;
      const double m = mus[i] - 0.5 * *sdirect[i];
      if (m < worst) {
        worst = m;
        detail = "tightest at " + anchors[i].label;
      }
    }
    return make_row(0, "mu >= s_direct/2 - 5e-2 on the corpus", worst >= -5e-2, worst, 0.0,
                    5e-2, detail);
  });

  add([] {
    double worst = 0.0;
    for (double a : {0.5, 1.0, 4.0}) {
      const FunctionHandle f = corpus_get("quad_s", {{"s", a}});
      const ModulusReport r = tilt_crosscheck(f, Vec::Zero(1));
      worst = std::max(worst, std::abs(r.mu.value_or(kInf) - 1.0 / (2 * r.kappa.value_or(0.0))));
    }
    return make_row(0, "|mu - 1/(2 kappa_hat)| for a/2 x^2", worst <= 1e-3, worst, 0.0, 1e-3, "");
  });

  add([&] {
    std::string bad;
    std::string detail;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      if (anchors[i].anchor.v.norm() != 0.0) continue;
      const bool tilt = tilt_check(anchors[i].f, anchors[i].anchor.x).stable;
      const bool strong = sdirect[i] && *sdirect[i] > 1e-6;
      detail += anchors[i].label + (tilt ? ":T" : ":F") + (strong ? "T " : "F ");
      if (tilt != strong) bad += anchors[i].label + " ";
    }
    return make_row(0, "tilt stable iff svar passes for some s > 0", bad.empty(),
                    bad.empty() ? 0 : 1, 0, 0, bad.empty() ? detail : "mismatch at " + bad);
  });

  add([] {
    double worst = 0.0;
    for (double s : {-1.0, 0.0, 1.0, 3.0}) {
      const FunctionHandle f = corpus_get("quad_s", {{"s", s}});
      worst = std::max(worst, std::abs(cnv_estimate(f, f.meta().anchors.front()).value - s));
    }
    return make_row(0, "cnv of (s/2)|x|^2 equals s", worst <= 1e-6, worst, 0.0, 1e-6, "");
  });

  add([] {
    double worst = 0.0;
    std::string detail;
    for (const auto& name : corpus_names()) {
      const FunctionHandle f = corpus_get(name);
      if (!f.has_prox() || f.meta().anchors.empty()) continue;
      const OracleCheck c = prox_oracle_invariant(f, default_lambda(f.meta().prox_level));
      if (c.worst > worst) {
        worst = c.worst;
        detail = name;
      }
    }
    return make_row(0, "prox oracles agree with the numerical prox", worst <= 1e-6, worst, 0.0,
                    1e-6, detail);
  });

  add([] {
    FunctionHandle f = corpus_get("quad_s");
    const auto good = f;
    f.set_prox([good](double lambda, const Vec& z) -> Vec {
      return good.prox_oracle(lambda, z) + Vec::Constant(z.size(), 1e-3);
    });
    const OracleCheck c = prox_oracle_invariant(f, 0.1);
    std::string w = "witness z=";
    for (Eigen::Index i = 0; i < c.witness.size(); ++i) w += fmt(c.witness[i]) + " ";
    return make_row(0, "mutated prox oracle is detected", !c.ok, c.worst, 1e-3, 1e-6,
                    "quad_s with shifted oracle; " + w);
  });

  add([] {
    const FunctionHandle f = corpus_get("jump_square");
    const QuadraticBundle b = quad_bundle(f, f.meta().anchors.front(), bundle_cfg());
    const auto parsed = parse_bundle_csv(bundle_csv(b));
    bool same = parsed.size() == b.members.size() + b.unstable.size();
    for (std::size_t i = 0; same && i < b.members.size(); ++i) {
      same = parsed[i].form.A() == b.members[i].form.A() &&
             parsed[i].form.basis() == b.members[i].form.basis();
    }
    return make_row(0, "bundle_members.csv round-trips exactly", same, same ? 0 : 1, 0, 0,
                    std::to_string(parsed.size()) + " members");
  });
  return rep;
}

SuiteReport run_corpus_sweep(const SuiteOptions& opt) {
  SuiteReport rep;
  rep.name = "corpus-sweep";
  rep.seed = opt.seed;
  int id = 0;
  for (const Entry& e : corpus_anchors(false)) {
    CriterionRow r = timed([&] {
      const FunctionHandle& f = e.f;
      const QuadraticBundle b =
          quad_bundle(f, e.anchor, bundle_cfg(default_lambda(f.meta().prox_level)));
      const double mu = uniform_lower_bound(b);
      const SDirect sd = s_direct(f, e.anchor);
      std::string detail = "members=" + std::to_string(b.members.size()) + " mu=" + fmt(mu) +
                           " s_direct=" + (sd.s ? fmt(*sd.s) : std::string("none"));
      const bool ok = !b.members.empty() && (!sd.s || mu >= 0.5 * *sd.s - 5e-2);
      return make_row(0, e.label + " bundle and moduli", ok, mu,
                      sd.s ? 0.5 * *sd.s : std::nan(""), 5e-2, detail);
    });
    r.id = ++id;
    emit(rep, r, opt);
  }
  for (const auto& name : corpus_names()) {
    const FunctionHandle f = corpus_get(name);
    if (!f.meta().negative_control) continue;
    CriterionRow r = timed([&] {
      const Vec zero = Vec::Zero(f.dim());
      const bool lsc = lsc_probe(f, zero);
      const bool bounded = prox_bounded_probe(f);
      const bool tilt = lsc && bounded && tilt_check(f, zero).stable;
      return make_row(0, name + " rejected as negative control", !(lsc && bounded && tilt), 0, 0,
                      0,
                      std::string("lsc=") + (lsc ? "yes" : "no") +
                          " prox_bounded=" + (bounded ? "yes" : "no") +
                          " tilt_stable=" + (tilt ? "yes" : "no"));
    });
    r.id = ++id;
    emit(rep, r, opt);
  }
  return rep;
}

SuiteReport run_suite(const std::string& name, const SuiteOptions& opt) {
  if (name == "acceptance") return run_acceptance(opt);
  if (name == "properties") return run_properties(opt);
  if (name == "corpus-sweep") return run_corpus_sweep(opt);
  throw Error(ErrorCode::config,
              "suite.name: unknown suite '" + name + "' (acceptance, properties, corpus-sweep)");
}

}  // namespace varan::app
