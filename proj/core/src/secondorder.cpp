#include "varan/secondorder.hpp"

#include "varan/grids.hpp"
#include "varan/parallel.hpp"

#include <cmath>
#include <sstream>

namespace varan {
namespace {

/// Orthonormal basis of the column span.
Mat orthonormalize(const Mat& basis, double rank_tol) {
  if (basis.cols() == 0) return Mat(basis.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(basis, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double floor = rank_tol * std::max(1.0, s.size() ? s[0] : 0.0);
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > floor) ++r;
  return svd.matrixU().leftCols(r);
}

Mat symmetrize(const Mat& A) { return 0.5 * (A + A.transpose()); }

double spectral_norm_sym(const Mat& M) {
  if (M.size() == 0) return 0.0;
  const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(symmetrize(M)).eigenvalues();
  return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
}

std::string vec_str(const Vec& v) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace

ExtendedReal delta2(const FunctionHandle& f, const Vec& x, const Vec& v, double t,
                    const Vec& w) {
  const double fx = f.eval(x);
  if (std::isinf(fx)) throw Error(ErrorCode::anchor_infeasible, f.name() + ": f(x) = +inf");
  if (!(t > 0)) throw Error(ErrorCode::contract, "delta2 needs t > 0");
  const double fy = f.eval(x + t * w);
  if (std::isinf(fy)) return ExtendedReal::infinity();
  return ExtendedReal((fy - fx - t * v.dot(w)) / (0.5 * t * t));
}

D2Estimate d2(const ScalarFn& f, const Vec& x, double fx, const Vec& v, const Vec& w,
              const D2Config& cfg) {
  if (!std::isfinite(fx)) throw Error(ErrorCode::anchor_infeasible, "d2: f(x) = +inf");
  const auto dirs = probe_directions(static_cast<int>(x.size()));
  D2Estimate out;
  for (int k = cfg.k_first; k <= cfg.k_last; ++k) {
    const double t = std::ldexp(1.0, -k);
    const double rho = cfg.window_coef * std::pow(t, cfg.window_power);
    auto quotient = [&](const Vec& wp) {
      const double fy = f(x + t * wp);
      if (std::isinf(fy)) return kInf;
      return (fy - fx - t * v.dot(wp)) / (0.5 * t * t);
    };
    double E = quotient(w);
    for (const Vec& d : dirs) {
      E = std::min(E, quotient(w + 0.5 * rho * d));
      E = std::min(E, quotient(w + rho * d));
    }
    out.levels.push_back(E);
    out.t.push_back(t);
  }
  const std::size_t K = out.levels.size();
  const double last = out.levels.back();
  if (last > cfg.cap) {
    out.value = ExtendedReal::infinity();
    return out;
  }
  if (last < -cfg.cap) throw Error(ErrorCode::numerical, "d2: quotients unbounded below");

  const std::size_t tail = std::min<std::size_t>(cfg.tail, K);
  if (last > cfg.divergence_floor && tail >= 2) {
    bool growing = true;
    for (std::size_t i = K - tail + 1; i < K; ++i) {
      const double prev = out.t[i - 1] * out.levels[i - 1];
      const double cur = out.t[i] * out.levels[i];
      if (!(prev > 0) || cur / prev < cfg.divergence_ratio) growing = false;
    }
    if (growing) {
      out.value = ExtendedReal::infinity();
      return out;
    }
  }
  const double prev = K >= 2 ? out.levels[K - 2] : last;
  if (std::isfinite(prev) && std::abs(last - prev) <= cfg.agree_tol * std::max(1.0, std::abs(last))) {
    const double r = std::pow(2.0, -cfg.window_power);
    out.value = ExtendedReal(last + (last - prev) * r / (1 - r));
    return out;
  }
  double m = kInf;
  for (std::size_t i = K - tail; i < K; ++i) m = std::min(m, out.levels[i]);
  out.value = ExtendedReal(m);
  out.low_confidence = true;
  return out;
}

D2Estimate d2(const FunctionHandle& f, const Vec& x, const Vec& v, const Vec& w,
              const D2Config& cfg) {
  const double fx = f.eval(x);
  if (std::isinf(fx)) throw Error(ErrorCode::anchor_infeasible, f.name() + ": f(x) = +inf");
  return d2([&f](const Vec& y) { return f.eval(y); }, x, fx, v, w, cfg);
}

std::vector<GqfSample> d2_samples(const FunctionHandle& f, const Vec& x, const Vec& v,
                                  const std::vector<Vec>& dirs, const D2Config& cfg) {
  std::vector<GqfSample> out(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t i) { out[i] = {dirs[i], d2(f, x, v, dirs[i], cfg).value}; });
  return out;
}

// GQF -----------------------------------------------------------------------

GQF::GQF(const Mat& A, const Mat& basis, double rank_tol) {
  if (A.rows() != A.cols() || basis.rows() != A.rows()) {
    throw Error(ErrorCode::contract, "GQF: dimension mismatch");
  }
  basis_ = orthonormalize(basis, rank_tol);
  const Mat Q = basis_ * basis_.transpose();
  A_ = symmetrize(Q * symmetrize(A) * Q);
}

GQF GQF::full(const Mat& A) { return GQF(A, Mat::Identity(A.rows(), A.rows())); }

GQF GQF::zero_subspace(int n) { return GQF(Mat::Zero(n, n), Mat(n, 0)); }

GQF GQF::from_canonical(Mat A, Mat basis) {
  if (A.rows() != A.cols() || basis.rows() != A.rows()) {
    throw Error(ErrorCode::contract, "GQF: dimension mismatch");
  }
  GQF q;
  q.A_ = std::move(A);
  q.basis_ = std::move(basis);
  return q;
}

ExtendedReal GQF::operator()(const Vec& w, double tol) const {
  const Vec p = basis_ * (basis_.transpose() * w);
  if ((w - p).norm() > tol * std::max(1.0, w.norm())) return ExtendedReal::infinity();
  return ExtendedReal(p.dot(A_ * p));
}

GQF GQF::scaled(double c) const {
  GQF out = *this;
  out.A_ *= c;
  return out;
}

double GQF::min_on_sphere() const {
  if (rank() == 0) return kInf;
  const Mat C = symmetrize(basis_.transpose() * A_ * basis_);
  return Eigen::SelfAdjointEigenSolver<Mat>(C).eigenvalues().minCoeff();
}

double gqf_distance(const GQF& a, const GQF& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::contract, "gqf_distance: dimension mismatch");
  return spectral_norm_sym(a.projector() - b.projector()) + spectral_norm_sym(a.A() - b.A());
}

GqfFit gqf_fit(const std::vector<GqfSample>& samples, const GqfFitConfig& cfg) {
  GqfFit out;
  if (samples.empty()) {
    out.reason = "no samples";
    return out;
  }
  const int n = static_cast<int>(samples.front().w.size());
  auto finite = [&](const GqfSample& s) { return s.value.is_finite() && s.value.value() <= cfg.cap; };

  std::vector<std::size_t> nz;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].w.norm() > 1e-12) nz.push_back(i);
  }
  for (std::size_t i : nz) {
    const Vec& w = samples[i].w;
    std::size_t best = nz.front();
    double bd = kInf;
    for (std::size_t j : nz) {
      const double d = (samples[j].w + w).norm();
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    if (bd > 1e-9 * w.norm()) {
      out.reason = "samples are not antipodally symmetric";
      return out;
    }
    if (finite(samples[i]) != finite(samples[best])) {
      out.reason = "not a subspace: finite at " + vec_str(w) + " but not at its antipode";
      return out;
    }
  }

  std::vector<std::size_t> fin;
  for (std::size_t i : nz) {
    if (finite(samples[i])) fin.push_back(i);
  }
  out.finite = static_cast<int>(fin.size());
  Mat F(n, fin.size());
  for (std::size_t k = 0; k < fin.size(); ++k) F.col(k) = samples[fin[k]].w.normalized();
  const Mat B = orthonormalize(F, cfg.subspace_tol);
  const Mat Q = B * B.transpose();

  for (std::size_t i : nz) {
    const Vec u = samples[i].w.normalized();
    if ((u - Q * u).norm() <= cfg.subspace_tol && !finite(samples[i])) {
      out.reason = "not a subspace: +inf at " + vec_str(samples[i].w) + " inside the span";
      return out;
    }
  }
  for (std::size_t a = 0; a < fin.size(); ++a) {
    for (std::size_t b = a + 1; b < fin.size(); ++b) {
      const Vec m = samples[fin[a]].w.normalized() + samples[fin[b]].w.normalized();
      if (m.norm() < 1e-9) continue;
      const Vec u = m.normalized();
      std::size_t best = nz.front();
      double bc = -kInf;
      for (std::size_t j : nz) {
        const double c = samples[j].w.normalized().dot(u);
        if (c > bc) {
          bc = c;
          best = j;
        }
      }
      if (!finite(samples[best])) {
        out.reason = "not closed under addition near " + vec_str(u);
        return out;
      }
    }
  }

  const Eigen::Index r = B.cols();
  if (r == 0) {
    out.ok = true;
    out.form = GQF::zero_subspace(n);
    return out;
  }
  const Eigen::Index unknowns = r * (r + 1) / 2;
  if (static_cast<Eigen::Index>(fin.size()) < unknowns) {
    out.reason = "too few finite directions to fit";
    return out;
  }
  Mat M(fin.size(), unknowns);
  Vec y(fin.size());
  for (std::size_t k = 0; k < fin.size(); ++k) {
    const Vec c = B.transpose() * samples[fin[k]].w;
    Eigen::Index col = 0;
    for (Eigen::Index a = 0; a < r; ++a) {
      for (Eigen::Index b = a; b < r; ++b) M(k, col++) = (a == b ? 1.0 : 2.0) * c[a] * c[b];
    }
    y[k] = samples[fin[k]].value.value();
  }
  const Vec theta = M.colPivHouseholderQr().solve(y);
  Mat S(r, r);
  Eigen::Index col = 0;
  for (Eigen::Index a = 0; a < r; ++a) {
    for (Eigen::Index b = a; b < r; ++b) S(a, b) = S(b, a) = theta[col++];
  }
  out.residual = (M * theta - y).norm() / std::max(y.norm(), std::sqrt(static_cast<double>(y.size())));
  if (out.residual > cfg.residual_tol) {
    out.reason = "least-squares residual too large";
    return out;
  }
  out.ok = true;
  out.form = GQF(B * S * B.transpose(), B);
  return out;
}

double gqf_half_envelope(const GQF& q, double lambda, const Vec& w) {
  if (!(lambda > 0)) throw Error(ErrorCode::contract, "lambda must be positive");
  if (q.rank() == 0) return w.squaredNorm() / (2 * lambda);
  const Mat& B = q.basis();
  const Mat C = symmetrize(B.transpose() * q.A() * B);
  const Mat M = C + Mat::Identity(C.rows(), C.cols()) / lambda;
  Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success ||
      Eigen::SelfAdjointEigenSolver<Mat>(M).eigenvalues().minCoeff() <= 0) {
    throw Error(ErrorCode::envelope_unbounded, "half envelope of the form is unbounded below");
  }
  const Vec c = llt.solve(B.transpose() * w / lambda);
  return 0.5 * c.dot(C * c) + (B * c - w).squaredNorm() / (2 * lambda);
}

std::pair<double, double> gen_cs(const Mat& A, const Vec& x, const Vec& y) {
  if (A.rows() != A.cols() || A.rows() != x.size() || x.size() != y.size()) {
    throw Error(ErrorCode::contract, "gen_cs: dimension mismatch");
  }
  if ((A - A.transpose()).norm() > 1e-12 * std::max(1.0, A.norm())) {
    throw Error(ErrorCode::precondition, "gen_cs: matrix is not symmetric");
  }
  if (Eigen::SelfAdjointEigenSolver<Mat>(A).eigenvalues().minCoeff() <= 0) {
    throw Error(ErrorCode::precondition, "gen_cs: matrix is not positive definite");
  }
  const Eigen::LLT<Mat> llt(A);
  return {x.dot(A * x) + y.dot(llt.solve(y)), 2 * x.dot(y)};
}

Mat extend_posdef(const Mat& A, const Mat& basis, double sigma) {
  const Eigen::Index n = A.rows();
  const Mat B = orthonormalize(basis, 1e-9);
  const int k = static_cast<int>(B.cols());
  if (k > 0) {
    for (const Vec& u : sphere_grid(k, 64)) {
      const Vec w = B * u;
      const double q = w.dot(A * w);
      if (q < sigma * w.squaredNorm() - 1e-12 * std::max(1.0, std::abs(sigma))) {
        throw Error(ErrorCode::precondition,
                    "extend_posdef: <w, A w> < sigma |w|^2 at w = " + vec_str(w));
      }
    }
  }
  const Mat Q = B * B.transpose();
  return symmetrize(Q * A * Q + sigma * (Mat::Identity(n, n) - Q));
}

SumRuleCheck d2_sum_rule_check(const FunctionHandle& f_smooth, const FunctionHandle& g,
                               const Vec& x, const Vec& v_g, const std::vector<Vec>& w_grid,
                               double tol, const D2Config& cfg) {
  if (!f_smooth.has_gradient() || !f_smooth.has_hessian()) {
    throw Error(ErrorCode::precondition, "d2_sum_rule_check: smooth part needs gradient and Hessian");
  }
  const FunctionHandle h = sum(f_smooth, g);
  const Vec v = f_smooth.gradient(x) + v_g;
  const Mat H = f_smooth.hessian(x);
  SumRuleCheck out;
  out.values.resize(w_grid.size());
  std::vector<int> pass(w_grid.size(), 1);
  parallel_for(w_grid.size(), [&](std::size_t i) {
    const Vec& w = w_grid[i];
    const double lhs = d2(h, x, v, w, cfg).value.as_double();
    const double dg = d2(g, x, v_g, w, cfg).value.as_double();
    const double rhs = std::isinf(dg) ? kInf : w.dot(H * w) + dg;
    out.values[i] = {lhs, rhs};
    if (std::isinf(lhs) || std::isinf(rhs)) {
      pass[i] = std::isinf(lhs) && std::isinf(rhs);
    } else {
      pass[i] = std::abs(lhs - rhs) <= tol * std::max(1.0, std::abs(rhs));
    }
  });
  for (std::size_t i = 0; i < w_grid.size(); ++i) {
    if (!pass[i]) {
      out.ok = false;
      out.witnesses.push_back(w_grid[i]);
    }
  }
  return out;
}

TwiceEpiProbe twice_epi_diff_probe(const FunctionHandle& f, const Vec& x, const Vec& v,
                                   const std::vector<Vec>& sphere, const EpiConfig& ecfg,
                                   const D2Config& dcfg) {
  const int n = f.dim();
  const double fx = f.eval(x);
  if (std::isinf(fx)) throw Error(ErrorCode::anchor_infeasible, f.name() + ": f(x) = +inf");
  FunctionMeta lm;
  lm.name = "d2 limit";
  const FunctionHandle limit(
      n, [f, x, v, dcfg](const Vec& w) { return d2(f, x, v, w, dcfg).value.as_double(); },
      Box::cube(n, -1.0, 1.0), lm);
  const double reach = 1.0 + 2 * ecfg.window;
  IndexedFamily fam = [f, x, v, fx, n, reach](long k) {
    const double t = 1.0 / static_cast<double>(k);
    FunctionMeta m;
    m.name = "quotient";
    return FunctionHandle(
        n,
        [f, x, v, fx, t](const Vec& w) {
          const double fy = f.eval(x + t * w);
          if (std::isinf(fy)) return kInf;
          return (fy - fx - t * v.dot(w)) / (0.5 * t * t);
        },
        Box::cube(n, -reach, reach), m);
  };
  TwiceEpiProbe out;
  const EpiResult er = epi_converges(fam, limit, Box::cube(n, -1.0, 1.0), ecfg);
  out.certificate = er.certificate;
  out.epi_differentiable = er.converges;
  out.inconclusive = !er.converges && er.certificate.liminf_ok;
  out.fit = gqf_fit(d2_samples(f, x, v, sphere, dcfg));
  return out;
}

}  // namespace varan
