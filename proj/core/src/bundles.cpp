#include "varan/bundles.hpp"

#include "varan/grids.hpp"
#include "varan/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace varan {
namespace {

Mat symmetrize(const Mat& A) { return 0.5 * (A + A.transpose()); }

double spectral_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()[0];
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& grad, const Vec& x, double h) {
  const Eigen::Index n = x.size();
  Mat H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = h;
    H.col(i) = (grad(x + e) - grad(x - e)) / (2 * h);
  }
  return H;
}

/// Greedy clustering against the latest member of each cluster. Items must
/// be ordered by shell.
template <class Item, class Dist>
std::vector<std::vector<std::size_t>> cluster(const std::vector<Item>& items, double radius,
                                              Dist dist) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) {
    bool placed = false;
    for (auto& g : groups) {
      if (dist(items[g.back()], items[i]) <= radius) {
        g.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({i});
  }
  return groups;
}

std::vector<int> shells_of(const std::vector<int>& shell_ids) {
  std::vector<int> out;
  for (int s : shell_ids) {
    if (out.empty() || out.back() != s) out.push_back(s);
  }
  return out;
}

bool stable_in_last_two(const std::vector<int>& shells, int count) {
  bool last = false;
  bool prev = false;
  for (int s : shells) {
    last |= s == count - 1;
    prev |= s == count - 2;
  }
  return last && (prev || count < 2);
}

/// Average of forms: mean projector thresholded at ½ gives L; mean compressed
/// matrix is re-compressed onto L.
GQF average(const std::vector<const GQF*>& forms) {
  const int n = forms.front()->dim();
  Mat P = Mat::Zero(n, n);
  Mat A = Mat::Zero(n, n);
  for (const GQF* q : forms) {
    P += q->projector();
    A += q->A();
  }
  P /= static_cast<double>(forms.size());
  A /= static_cast<double>(forms.size());
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(P));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (es.eigenvalues()[i] > 0.5) keep.push_back(i);
  }
  Mat B(n, keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) B.col(k) = es.eigenvectors().col(keep[k]);
  return GQF(A, B);
}

}  // namespace

std::vector<double> ShellConfig::radii() const {
  std::vector<double> r;
  for (int j = 0; j < shells; ++j) r.push_back(rho0 * std::ldexp(1.0, -j));
  return r;
}

FdHessian fd_hessian_gate(const std::function<Vec(const Vec&)>& grad, const Vec& x, double h,
                          const FdGateConfig& cfg) {
  FdHessian out;
  const Mat H1 = fd_jacobian(grad, x, h);
  const Mat H2 = fd_jacobian(grad, x, 0.5 * h);
  const double scale = std::max(1.0, spectral_norm(H2));
  out.asymmetry = std::max(spectral_norm(H1 - H1.transpose()), spectral_norm(H2 - H2.transpose())) /
                  scale;
  out.H = symmetrize(H2);
  out.disagreement = spectral_norm(symmetrize(H1) - out.H) / scale;
  out.ok = H1.allFinite() && H2.allFinite() && out.disagreement <= cfg.agree &&
           out.asymmetry < cfg.symmetry;
  return out;
}

Vec fd_gradient(const FunctionHandle& f, const Vec& x, double h) {
  const Eigen::Index n = x.size();
  Vec g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = h;
    g[i] = (f.eval(x + e) - f.eval(x - e)) / (2 * h);
  }
  return g;
}

// Hessian bundle -------------------------------------------------------------

std::vector<Mat> HessianBundle::matrices() const {
  std::vector<Mat> out;
  for (const auto& m : members) out.push_back(m.H);
  return out;
}

HessianBundle hessian_bundle(const FunctionHandle& f, const Vec& anchor,
                             const HessianBundleConfig& cfg) {
  const int n = f.dim();
  HessianBundle out;
  out.anchor = anchor;
  out.radii = cfg.shells.radii();
  const auto offsets = shell_offsets(n, cfg.shells.directions);
  std::function<Vec(const Vec&)> grad;
  if (f.has_gradient()) {
    grad = [&f](const Vec& x) { return f.gradient(x); };
  } else {
    grad = [&f](const Vec& x) { return fd_gradient(f, x); };
  }
  struct Task {
    int shell;
    Vec x;
    double h;
  };
  std::vector<Task> tasks;
  for (int j = 0; j < cfg.shells.shells; ++j) {
    for (const Vec& o : offsets) {
      const Vec x = anchor + out.radii[j] * o;
      if (!f.box().contains(x, 0.0)) continue;
      tasks.push_back({j, x, std::min(cfg.gate.h, out.radii[j] / 4)});
    }
  }
  out.tried = static_cast<int>(tasks.size());
  std::vector<FdHessian> res(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    if (std::isinf(f.eval(tasks[i].x))) return;
    try {
      res[i] = fd_hessian_gate(grad, tasks[i].x, tasks[i].h, cfg.gate);
    } catch (const Error&) {
      res[i].ok = false;
    }
  });
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (res[i].ok) out.samples.push_back({tasks[i].shell, tasks[i].x, res[i].H});
  }
  if (out.samples.empty()) {
    throw Error(ErrorCode::empty_bundle, f.name() + ": no twice-differentiable sample on any shell");
  }
  const auto groups = cluster(out.samples, cfg.cluster_radius,
                              [](const HessianSample& a, const HessianSample& b) {
                                return spectral_norm(a.H - b.H);
                              });
  for (const auto& g : groups) {
    std::vector<int> ids;
    for (std::size_t i : g) ids.push_back(out.samples[i].shell);
    HessianMember m;
    m.count = static_cast<int>(g.size());
    m.shells = shells_of(ids);
    const int last = m.shells.back();
    Mat acc = Mat::Zero(n, n);
    int k = 0;
    for (std::size_t i : g) {
      if (out.samples[i].shell == last) {
        acc += out.samples[i].H;
        ++k;
      }
    }
    m.H = acc / k;
    (stable_in_last_two(m.shells, cfg.shells.shells) ? out.members : out.unstable).push_back(m);
  }
  return out;
}

// Quadratic bundle -----------------------------------------------------------

const char* to_string(BundleVariant v) {
  return v == BundleVariant::revised ? "revised" : "original";
}

std::vector<GQF> QuadraticBundle::forms() const {
  std::vector<GQF> out;
  for (const auto& m : members) out.push_back(m.form);
  return out;
}

QuadraticBundle quad_bundle(const FunctionHandle& f, const SubgradientPair& anchor,
                            const QuadBundleConfig& cfg) {
  const int n = f.dim();
  QuadraticBundle out;
  out.anchor = anchor;
  out.variant = cfg.variant;
  out.lambda = cfg.lambda > 0 ? cfg.lambda : default_lambda(f.meta().prox_level);
  out.radii = cfg.shells.radii();
  const double lambda = out.lambda;
  const int S = cfg.shells.shells;
  const auto offsets = shell_offsets(n, cfg.shells.directions);
  const auto sphere = sphere_grid(n, cfg.sphere_count);
  const Vec zbar = anchor.x + lambda * anchor.v;
  const bool revised = cfg.variant == BundleVariant::revised;

  enum Outcome { kept, gate, attentive, fit };
  struct Candidate {
    int shell = 0;
    std::string source;
    SubgradientPair pair;
    Outcome outcome = kept;
    GqfFit fit;
  };

  auto finish = [&](Candidate& c) {
    if (revised && std::abs(c.pair.fx - anchor.fx) > cfg.eps0 * std::ldexp(1.0, -c.shell)) {
      c.outcome = attentive;
      return;
    }
    c.fit = gqf_fit(d2_samples(f, c.pair.x, c.pair.v, sphere, cfg.d2), cfg.fit);
    c.outcome = c.fit.ok ? kept : fit;
  };

  // Envelope pairs: one attentive path per direction.
  std::vector<std::vector<Candidate>> per_dir(offsets.size());
  std::vector<std::string> dir_skip(offsets.size());
  parallel_for(offsets.size(), [&](std::size_t d) {
    std::vector<Vec> zs;
    for (int j = 0; j < S; ++j) zs.push_back(zbar + out.radii[j] * offsets[d]);
    AttentivePath path;
    try {
      path = attentive_path(f, anchor, lambda, zs, cfg.prox, true);
    } catch (const Error& e) {
      dir_skip[d] = e.what();
      return;
    }
    for (std::size_t k = 0; k < path.pairs.size(); ++k) {
      Candidate c;
      c.shell = static_cast<int>(path.source[k]);
      c.source = "envelope";
      c.pair = path.pairs[k];
      const Vec& z = zs[path.source[k]];
      const LocalEnvelope env(f, lambda, z, c.pair.x, cfg.prox);
      const double h = std::min(cfg.gate.h, out.radii[c.shell] / 4);
      const FdHessian g =
          fd_hessian_gate([&env](const Vec& y) { return env.gradient(y); }, z, h, cfg.gate);
      if (!g.ok) {
        c.outcome = gate;
      } else {
        finish(c);
      }
      per_dir[d].push_back(std::move(c));
    }
  });

  // Gradient-oracle pairs on x shells.
  std::vector<Candidate> grad_cands;
  if (cfg.gradient_pairs && f.has_gradient()) {
    std::vector<Candidate> pending;
    for (int j = 0; j < S; ++j) {
      for (const Vec& o : offsets) {
        const Vec x = anchor.x + out.radii[j] * o;
        if (!f.box().contains(x, 0.0)) continue;
        const double fx = f.eval(x);
        if (std::isinf(fx)) continue;
        const Vec v = f.gradient(x);
        if ((v - anchor.v).norm() > cfg.cv * std::ldexp(1.0, -j)) continue;
        Candidate c;
        c.shell = j;
        c.source = "gradient";
        c.pair = {x, v, fx};
        pending.push_back(std::move(c));
      }
    }
    parallel_for(pending.size(), [&](std::size_t i) { finish(pending[i]); });
    grad_cands = std::move(pending);
  }

  std::vector<Candidate> all;
  for (std::size_t d = 0; d < offsets.size(); ++d) {
    if (!dir_skip[d].empty()) out.skipped.push_back(dir_skip[d]);
    for (auto& c : per_dir[d]) all.push_back(std::move(c));
  }
  for (auto& c : grad_cands) all.push_back(std::move(c));
  std::stable_sort(all.begin(), all.end(),
                   [](const Candidate& a, const Candidate& b) { return a.shell < b.shell; });
  for (auto& c : all) {
    switch (c.outcome) {
      case gate: ++out.rejected_gate; break;
      case attentive: ++out.rejected_attentive; break;
      case fit: ++out.rejected_fit; break;
      case kept:
        out.samples.push_back({c.shell, c.source, c.pair, c.fit.form.scaled(0.5), c.fit.residual});
        break;
    }
  }
  if (out.samples.empty()) {
    throw Error(ErrorCode::empty_bundle,
                f.name() + ": no generalized twice-differentiable pair found on any shell");
  }

  const auto groups = cluster(out.samples, cfg.cluster_radius,
                              [](const BundleSample& a, const BundleSample& b) {
                                return gqf_distance(a.form, b.form);
                              });
  for (const auto& g : groups) {
    std::vector<int> ids;
    for (std::size_t i : g) ids.push_back(out.samples[i].shell);
    QuadMember m;
    m.count = static_cast<int>(g.size());
    m.shells = shells_of(ids);
    m.f_gaps.assign(m.shells.size(), 0.0);
    std::vector<const GQF*> last;
    for (std::size_t i : g) {
      const auto& s = out.samples[i];
      m.max_residual = std::max(m.max_residual, s.residual);
      const auto pos = std::find(m.shells.begin(), m.shells.end(), s.shell) - m.shells.begin();
      m.f_gaps[pos] = std::max(m.f_gaps[pos], std::abs(s.pair.fx - anchor.fx));
      if (s.shell == m.shells.back()) last.push_back(&s.form);
    }
    m.form = average(last);
    (stable_in_last_two(m.shells, S) ? out.members : out.unstable).push_back(m);
  }
  return out;
}

double uniform_lower_bound(const std::vector<GQF>& forms) {
  if (forms.empty()) throw Error(ErrorCode::precondition, "uniform_lower_bound: empty bundle");
  double mu = kInf;
  for (const GQF& q : forms) mu = std::min(mu, q.min_on_sphere());
  return mu;
}

double uniform_lower_bound(const QuadraticBundle& bundle) {
  return uniform_lower_bound(bundle.forms());
}

std::vector<GQF> bundle_shift(const std::vector<GQF>& forms, const Mat& H) {
  std::vector<GQF> out;
  for (const GQF& q : forms) out.push_back(GQF(q.A() + 0.5 * symmetrize(H), q.basis()));
  return out;
}

QuadraticBundle bundle_shift(const QuadraticBundle& bundle, const Mat& H) {
  QuadraticBundle out = bundle;
  for (auto& m : out.members) m.form = GQF(m.form.A() + 0.5 * symmetrize(H), m.form.basis());
  for (auto& m : out.unstable) m.form = GQF(m.form.A() + 0.5 * symmetrize(H), m.form.basis());
  return out;
}

bool nonemptiness_check(const FunctionHandle& f, const SubgradientPair& anchor,
                        const QuadBundleConfig& cfg) {
  try {
    return !quad_bundle(f, anchor, cfg).members.empty();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::empty_bundle) return false;
    throw;
  }
}

double bundle_set_distance(const std::vector<GQF>& a, const std::vector<GQF>& b) {
  if (a.empty() || b.empty()) return a.empty() && b.empty() ? 0.0 : kInf;
  auto directed = [](const std::vector<GQF>& p, const std::vector<GQF>& q) {
    double worst = 0.0;
    for (const GQF& x : p) {
      double best = kInf;
      for (const GQF& y : q) best = std::min(best, gqf_distance(x, y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace varan
