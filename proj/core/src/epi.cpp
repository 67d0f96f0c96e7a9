#include "varan/epi.hpp"

#include "varan/grids.hpp"
#include "varan/parallel.hpp"

#include <cmath>

namespace varan {
namespace {

int lattice_count(double lo, double hi, double res) {
  return static_cast<int>(std::floor((hi - lo) / res + 1e-9)) + 1;
}

std::vector<Vec> lattice(const Box& box, double res) {
  const int d = box.dim();
  std::vector<int> counts(d);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    counts[i] = lattice_count(box.lo[i], box.hi[i], res);
    total *= counts[i];
  }
  std::vector<Vec> out;
  out.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    Vec p(d);
    std::size_t r = k;
    for (int i = d - 1; i >= 0; --i) {
      p[i] = box.lo[i] + res * static_cast<double>(r % counts[i]);
      r /= counts[i];
    }
    out.push_back(std::move(p));
  }
  return out;
}

double dist_to(const Vec& p, const std::vector<Vec>& cloud) {
  double best = kInf;
  for (const Vec& q : cloud) best = std::min(best, (p - q).squaredNorm());
  return std::sqrt(best);
}

/// Offsets of norm <= 1 used to build window sequences.
std::vector<Vec> window_offsets(int n, int count) {
  std::vector<Vec> out{Vec::Zero(n)};
  for (const Vec& d : sphere_grid(n, count)) {
    out.push_back(d);
    out.push_back(0.5 * d);
  }
  return out;
}

double tolerance(double fx, double tol) {
  return tol * std::max(1.0, std::isfinite(fx) ? std::abs(fx) : 1.0);
}

}  // namespace

EpigraphCloud epi_cloud(const FunctionHandle& f, const Box& box, double resolution) {
  const int n = f.dim();
  if (box.dim() != n + 1) throw Error(ErrorCode::config, "epi_cloud: box must have dimension n + 1");
  if (!(resolution > 0)) throw Error(ErrorCode::config, "epi_cloud: resolution must be positive");
  const Box xbox(box.lo.head(n), box.hi.head(n));
  const std::vector<Vec> xs = lattice(xbox, resolution);
  const double alo = box.lo[n];
  const double ahi = box.hi[n];
  const int acount = lattice_count(alo, ahi, resolution);
  std::vector<std::vector<Vec>> per(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    const double fx = f.eval(xs[i]);
    if (std::isinf(fx) || fx > ahi) return;
    Vec p(n + 1);
    p.head(n) = xs[i];
    if (fx >= alo) {
      p[n] = fx;
      per[i].push_back(p);
    }
    for (int k = 0; k < acount; ++k) {
      const double a = alo + resolution * k;
      if (a > fx) {
        p[n] = a;
        per[i].push_back(p);
      }
    }
  });
  EpigraphCloud c{{}, box, resolution};
  bool proper = false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!proper && std::isfinite(f.eval(xs[i]))) proper = true;
    for (Vec& p : per[i]) c.points.push_back(std::move(p));
  }
  if (!proper) throw Error(ErrorCode::improper, f.name() + ": +inf on every grid point of the box");
  return c;
}

double epi_distance(const EpigraphCloud& c1, const EpigraphCloud& c2, double rho) {
  if (!(c1.box == c2.box) || c1.resolution != c2.resolution) {
    throw Error(ErrorCode::config, "epi_distance: clouds must share box and resolution");
  }
  std::vector<Vec> probes;
  for (Vec& p : lattice(c1.box, c1.resolution)) {
    if (p.norm() <= rho) probes.push_back(std::move(p));
  }
  if (c1.points.empty() != c2.points.empty()) return kInf;
  if (c1.points.empty()) return 0.0;
  std::vector<double> gap(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    gap[i] = std::abs(dist_to(probes[i], c1.points) - dist_to(probes[i], c2.points));
  });
  double out = 0.0;
  for (double g : gap) out = std::max(out, g);
  return out;
}

EpiResult epi_converges(const IndexedFamily& seq, const FunctionHandle& f, const Box& box,
                        const EpiConfig& cfg) {
  const int n = f.dim();
  EpiResult res;
  EpiCertificate& cert = res.certificate;
  for (int j = 0; j <= cfg.max_power; ++j) cert.schedule.push_back(1L << j);
  const int tail = std::min<int>(cfg.tail, static_cast<int>(cert.schedule.size()));
  // Each tail index is paired with its successor so parity effects show up.
  std::vector<long> ks;
  for (auto it = cert.schedule.end() - tail; it != cert.schedule.end(); ++it) {
    ks.push_back(*it);
    ks.push_back(*it + 1);
  }
  std::vector<FunctionHandle> fam;
  for (long k : ks) fam.push_back(seq(k));

  const TensorGrid grid(box, cfg.per_axis);
  const auto offsets = window_offsets(n, cfg.window_samples);
  struct PointResult {
    double fx = 0.0;
    double liminf_gap = 0.0;
    double limsup_gap = 0.0;
    std::vector<Vec> inf_seq;
    std::vector<Vec> sup_seq;
    double inf_val = 0.0;
    double sup_val = 0.0;
  };
  std::vector<PointResult> pts(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const Vec x = grid.point(i);
    PointResult& pr = pts[i];
    pr.fx = f.eval(x);
    const double tol = tolerance(pr.fx, cfg.tol);
    double window_inf = kInf;
    double center_sup = -kInf;
    double window_sup = -kInf;
    std::vector<Vec> inf_seq;
    std::vector<Vec> win_seq;
    std::vector<Vec> ctr_seq;
    for (std::size_t t = 0; t < ks.size(); ++t) {
      const double r = cfg.window / std::sqrt(static_cast<double>(ks[t]));
      double wmin = kInf;
      Vec arg = x;
      for (const Vec& o : offsets) {
        const Vec y = x + r * o;
        if (!fam[t].box().contains(y, 0.0)) continue;
        const double v = fam[t].eval(y);
        if (v < wmin) {
          wmin = v;
          arg = y;
        }
      }
      inf_seq.push_back(arg);
      win_seq.push_back(arg);
      ctr_seq.push_back(x);
      window_inf = std::min(window_inf, wmin);
      window_sup = std::max(window_sup, wmin);
      center_sup = std::max(center_sup, fam[t].eval(x));
    }
    // (a) liminf condition.
    if (std::isinf(pr.fx)) {
      pr.liminf_gap = window_inf > cfg.cap ? 0.0 : kInf;
    } else {
      pr.liminf_gap = std::max(0.0, pr.fx - tol - window_inf);
    }
    pr.inf_seq = std::move(inf_seq);
    pr.inf_val = window_inf;
    // (b) limsup condition: center sequence first, then window minima.
    if (std::isinf(pr.fx)) {
      pr.limsup_gap = 0.0;
      pr.sup_val = center_sup;
      pr.sup_seq = std::move(ctr_seq);
    } else if (center_sup <= pr.fx + tol) {
      pr.limsup_gap = 0.0;
      pr.sup_val = center_sup;
      pr.sup_seq = std::move(ctr_seq);
    } else {
      pr.limsup_gap = std::max(0.0, window_sup - pr.fx - tol);
      pr.sup_val = window_sup;
      pr.sup_seq = std::move(win_seq);
    }
  });
  cert.points = static_cast<int>(grid.size());
  std::size_t worst_inf = 0;
  std::size_t worst_sup = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].liminf_gap > pts[worst_inf].liminf_gap) worst_inf = i;
    if (pts[i].limsup_gap > pts[worst_sup].limsup_gap) worst_sup = i;
  }
  cert.worst_liminf_gap = pts[worst_inf].liminf_gap;
  cert.worst_limsup_gap = pts[worst_sup].limsup_gap;
  cert.liminf_ok = cert.worst_liminf_gap == 0.0;
  cert.limsup_ok = cert.worst_limsup_gap == 0.0;
  cert.liminf_witness = {grid.point(worst_inf), pts[worst_inf].fx, pts[worst_inf].inf_val,
                         pts[worst_inf].inf_seq};
  cert.limsup_witness = {grid.point(worst_sup), pts[worst_sup].fx, pts[worst_sup].sup_val,
                         pts[worst_sup].sup_seq};
  res.converges = cert.liminf_ok && cert.limsup_ok;
  return res;
}

LowerBoundStability quadratic_lowerbound_stability(
    const std::function<double(int, const Vec&)>& seq, int count,
    const std::function<double(const Vec&)>& f_limit, double mu, double delta,
    const std::vector<Vec>& sphere) {
  for (const Vec& w : sphere) {
    if (f_limit(w) < mu * w.squaredNorm() - 1e-12) {
      throw Error(ErrorCode::precondition, "limit function violates the lower bound mu");
    }
  }
  LowerBoundStability out;
  out.index = 1;
  for (int k = 1; k <= count; ++k) {
    for (const Vec& w : sphere) {
      if (seq(k, w) < (mu - delta) * w.squaredNorm()) {
        out.index = k + 1;
        out.witness_k = k;
        out.witness_w = w;
        break;
      }
    }
  }
  out.ok = out.index <= count;
  return out;
}

}  // namespace varan
