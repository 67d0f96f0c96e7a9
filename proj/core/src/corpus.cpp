#include "varan/funcspace.hpp"

#include <cmath>
#include <sstream>

namespace varan {
namespace {

/// Scalar piece lifted to R^n as a separable sum.
struct Scalar {
  std::function<double(double)> f;
  std::function<double(double)> df;   // a subgradient selection
  std::function<double(double)> d2f;  // second derivative where it exists
  std::function<double(double, double)> prox;  // (lambda, z) -> u, may be empty
};

double sgn(double x) { return (x > 0) - (x < 0); }

double soft(double z, double t) { return sgn(z) * std::max(std::abs(z) - t, 0.0); }

FunctionHandle separable(const Scalar& s, int n, FunctionMeta meta,
                         double box_half = 10.0) {
  auto f = s.f;
  FunctionHandle h(
      n,
      [f](const Vec& x) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          const double v = f(x[i]);
          if (std::isinf(v)) return v;
          acc += v;
        }
        return acc;
      },
      Box::cube(n, -box_half, box_half), std::move(meta));
  auto df = s.df;
  h.set_gradient([df](const Vec& x) -> Vec {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = df(x[i]);
    return g;
  });
  auto d2f = s.d2f;
  h.set_hessian([d2f](const Vec& x) -> Mat {
    Mat H = Mat::Zero(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) H(i, i) = d2f(x[i]);
    return H;
  });
  if (s.prox) {
    auto p = s.prox;
    h.set_prox([p](double lambda, const Vec& z) -> Vec {
      Vec u(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) u[i] = p(lambda, z[i]);
      return u;
    });
  }
  return h;
}

double get(const ParamMap& p, const std::string& key) { return p.at(key); }

int dim_of(const ParamMap& p) {
  const double n = p.at("n");
  if (n < 1 || n > 6 || n != std::floor(n)) {
    throw Error(ErrorCode::config, "parameter n must be an integer in [1, 6]");
  }
  return static_cast<int>(n);
}

SubgradientPair anchor(int n, double x, double v, double fx) {
  return {Vec::Constant(n, x), Vec::Constant(n, v), fx * n};
}

FunctionHandle make_jump_square(const ParamMap& p) {
  const int n = dim_of(p);
  Scalar s;
  s.f = [](double x) { return x >= 0 ? x * x : 1.0; };
  s.df = [](double x) { return x > 0 ? 2 * x : 0.0; };
  s.d2f = [](double x) { return x >= 0 ? 2.0 : 0.0; };
  s.prox = [](double lambda, double z) {
    const double ur = std::max(z / (1 + 2 * lambda), 0.0);
    const double vr = ur * ur + (ur - z) * (ur - z) / (2 * lambda);
    if (z < 0 && 1.0 < vr) return z;
    return ur;
  };
  FunctionMeta m;
  m.name = "jump_square";
  m.description = "x^2 for x >= 0, 1 for x < 0 (per coordinate)";
  m.s = 2.0;
  m.kappa = 0.5;
  m.anchors = {anchor(n, 0, 0, 0), anchor(n, 0.3, 0.6, 0.09)};
  return separable(s, n, m);
}

FunctionHandle make_abs(const ParamMap& p) {
  const int n = dim_of(p);
  Scalar s;
  s.f = [](double x) { return std::abs(x); };
  s.df = [](double x) { return sgn(x); };
  s.d2f = [](double) { return 0.0; };
  s.prox = [](double lambda, double z) { return soft(z, lambda); };
  FunctionMeta m;
  m.name = "abs";
  m.description = "l1 norm";
  m.kappa = 0.0;
  m.anchors = {anchor(n, 0, 0, 0), anchor(n, 0, 1, 0)};
  return separable(s, n, m);
}

FunctionHandle make_quad_s(const ParamMap& p) {
  const int n = dim_of(p);
  const double sv = get(p, "s");
  Scalar s;
  s.f = [sv](double x) { return 0.5 * sv * x * x; };
  s.df = [sv](double x) { return sv * x; };
  s.d2f = [sv](double) { return sv; };
  s.prox = [sv](double lambda, double z) {
    const double denom = 1 + lambda * sv;
    if (!(denom > 0)) throw Error(ErrorCode::prox_unbounded, "quad_s: lambda*s <= -1");
    return z / denom;
  };
  FunctionMeta m;
  m.name = "quad_s";
  m.description = "(s/2)|x|^2";
  m.prox_level = std::max(0.0, -sv);
  m.s = sv;
  if (sv > 0) m.kappa = 1.0 / sv;
  m.c11 = true;
  m.anchors = {anchor(n, 0, 0, 0)};
  return separable(s, n, m);
}

Scalar huber_scalar(double delta) {
  Scalar s;
  s.f = [delta](double x) {
    return std::abs(x) <= delta ? 0.5 * x * x : delta * (std::abs(x) - 0.5 * delta);
  };
  s.df = [delta](double x) { return std::clamp(x, -delta, delta); };
  s.d2f = [delta](double x) { return std::abs(x) < delta ? 1.0 : 0.0; };
  return s;
}

FunctionHandle make_huber(const ParamMap& p) {
  const int n = dim_of(p);
  const double delta = get(p, "delta");
  Scalar s = huber_scalar(delta);
  s.prox = [delta](double lambda, double z) {
    if (std::abs(z) <= delta * (1 + lambda)) return z / (1 + lambda);
    return z - lambda * delta * sgn(z);
  };
  FunctionMeta m;
  m.name = "huber";
  m.description = "Huber loss with threshold delta";
  m.s = 1.0;
  m.kappa = 1.0;
  m.c11 = true;
  m.anchors = {anchor(n, 0, 0, 0)};
  return separable(s, n, m);
}

FunctionHandle make_huber_quad(const ParamMap& p) {
  const int n = dim_of(p);
  const double delta = get(p, "delta");
  const double sv = get(p, "s");
  const Scalar h = huber_scalar(delta);
  Scalar s;
  s.f = [h, sv](double x) { return h.f(x) + 0.5 * sv * x * x; };
  s.df = [h, sv](double x) { return h.df(x) + sv * x; };
  s.d2f = [h, sv](double x) { return h.d2f(x) + sv; };
  s.prox = [delta, sv](double lambda, double z) {
    const double u = z / (1 + lambda * (1 + sv));
    if (std::abs(u) <= delta) return u;
    return (z - lambda * delta * sgn(z)) / (1 + lambda * sv);
  };
  FunctionMeta m;
  m.name = "huber_quad";
  m.description = "Huber loss plus (s/2)|x|^2";
  m.s = 1.0 + sv;
  m.kappa = 1.0 / (1.0 + sv);
  m.c11 = true;
  m.anchors = {anchor(n, 0, 0, 0)};
  return separable(s, n, m);
}

FunctionHandle make_halfsquare(const ParamMap& p) {
  const int n = dim_of(p);
  Scalar s;
  s.f = [](double x) { return x > 0 ? 0.5 * x * x : 0.0; };
  s.df = [](double x) { return std::max(x, 0.0); };
  s.d2f = [](double x) { return x > 0 ? 1.0 : 0.0; };
  s.prox = [](double lambda, double z) { return z > 0 ? z / (1 + lambda) : z; };
  FunctionMeta m;
  m.name = "halfsquare";
  m.description = "½ max(x, 0)^2";
  m.s = 0.0;
  m.c11 = true;
  m.anchors = {anchor(n, 0, 0, 0)};
  return separable(s, n, m);
}

FunctionHandle make_indicator_box(const ParamMap& p) {
  const int n = dim_of(p);
  const double lo = get(p, "lo");
  const double hi = get(p, "hi");
  if (!(lo < hi)) throw Error(ErrorCode::config, "indicator_box needs lo < hi");
  Scalar s;
  s.f = [lo, hi](double x) { return (x >= lo && x <= hi) ? 0.0 : kInf; };
  s.df = [](double) { return 0.0; };
  s.d2f = [](double) { return 0.0; };
  s.prox = [lo, hi](double, double z) { return std::clamp(z, lo, hi); };
  FunctionMeta m;
  m.name = "indicator_box";
  m.description = "indicator of [lo, hi]^n";
  m.anchors = {anchor(n, 0.5 * (lo + hi), 0, 0), anchor(n, hi, 1, 0)};
  return separable(s, n, m, std::max(10.0, 2.0 * std::max(std::abs(lo), std::abs(hi))));
}

FunctionHandle make_weakly_convex(const ParamMap& p) {
  const int n = dim_of(p);
  const double c = get(p, "c");
  const double r = get(p, "r");
  Scalar s;
  s.f = [c, r](double x) { return c * std::abs(x) - 0.5 * r * x * x; };
  s.df = [c, r](double x) { return c * sgn(x) - r * x; };
  s.d2f = [r](double) { return -r; };
  s.prox = [c, r](double lambda, double z) {
    const double denom = 1 - lambda * r;
    if (!(denom > 0)) throw Error(ErrorCode::prox_unbounded, "weakly_convex: lambda*r >= 1");
    return soft(z, c * lambda) / denom;
  };
  FunctionMeta m;
  m.name = "weakly_convex";
  m.description = "c|x|_1 - (r/2)|x|^2";
  m.prox_level = r;
  m.anchors = {anchor(n, 0, 0, 0),
               anchor(n, 0.5, c - 0.5 * r, 0.5 * c - 0.125 * r)};
  return separable(s, n, m);
}

FunctionHandle make_env_abs(const ParamMap& p) {
  const int n = dim_of(p);
  const double lam = get(p, "lambda");
  Scalar s;
  s.f = [lam](double z) {
    return std::abs(z) <= lam ? z * z / (2 * lam) : std::abs(z) - 0.5 * lam;
  };
  s.df = [lam](double z) { return std::clamp(z / lam, -1.0, 1.0); };
  s.d2f = [lam](double z) { return std::abs(z) < lam ? 1.0 / lam : 0.0; };
  FunctionMeta m;
  m.name = "env_abs";
  m.description = "Moreau envelope of |x| with parameter lambda";
  // Quadratic z^2/(2 lambda) on |z| < lambda around the anchor.
  m.s = 1.0 / lam;
  m.kappa = lam;
  m.c11 = true;
  m.anchors = {anchor(n, 0, 0, 0)};
  return separable(s, n, m);
}

FunctionHandle make_env_quad(const ParamMap& p) {
  const int n = dim_of(p);
  const double sv = get(p, "s");
  const double lam = get(p, "lambda");
  if (!(1 + lam * sv > 0)) throw Error(ErrorCode::config, "env_quad needs 1 + lambda*s > 0");
  const double se = sv / (1 + lam * sv);
  Scalar s;
  s.f = [se](double z) { return 0.5 * se * z * z; };
  s.df = [se](double z) { return se * z; };
  s.d2f = [se](double) { return se; };
  s.prox = [se](double mu, double z) { return z / (1 + mu * se); };
  FunctionMeta m;
  m.name = "env_quad";
  m.description = "Moreau envelope of (s/2)|x|^2 with parameter lambda";
  m.s = se;
  if (se > 0) m.kappa = 1.0 / se;
  m.prox_level = std::max(0.0, -se);
  m.c11 = true;
  m.anchors = {anchor(n, 0, 0, 0)};
  return separable(s, n, m);
}

FunctionHandle make_pmax2(const ParamMap&) {
  FunctionMeta m;
  m.name = "pmax2";
  m.description = "½|x|^2 + max(x1, x2) on R^2";
  m.s = 1.0;
  m.kappa = 1.0;
  Vec v(2);
  v << 0.5, 0.5;
  Vec xs(2);
  xs << 0.3, 0.1;
  Vec vs(2);
  vs << 1.3, 0.1;
  m.anchors = {{Vec::Zero(2), v, 0.0}, {xs, vs, 0.5 * xs.squaredNorm() + 0.3}};
  FunctionHandle h(
      2, [](const Vec& x) { return 0.5 * x.squaredNorm() + std::max(x[0], x[1]); },
      Box::cube(2, -10, 10), m);
  h.set_gradient([](const Vec& x) -> Vec {
    Vec g = x;
    g[x[0] >= x[1] ? 0 : 1] += 1.0;
    return g;
  });
  h.set_hessian([](const Vec&) -> Mat { return Mat::Identity(2, 2); });
  h.set_prox([](double lambda, const Vec& z) -> Vec {
    const Vec y = z / (1 + lambda);
    const double mu = lambda / (1 + lambda);
    Vec u = y;
    if (y[0] - mu >= y[1]) {
      u[0] -= mu;
    } else if (y[1] - mu >= y[0]) {
      u[1] -= mu;
    } else {
      u[0] = u[1] = 0.5 * (y[0] + y[1] - mu);
    }
    return u;
  });
  return h;
}

FunctionHandle negative_control(const std::string& name, const std::string& desc,
                                int n, std::function<double(double)> f,
                                std::function<double(double)> df,
                                std::function<double(double)> d2f) {
  Scalar s{std::move(f), std::move(df), std::move(d2f), {}};
  FunctionMeta m;
  m.name = name;
  m.description = desc;
  m.negative_control = true;
  return separable(s, n, m);
}

struct Entry {
  ParamMap defaults;
  std::function<FunctionHandle(const ParamMap&)> build;
};

const std::map<std::string, Entry>& registry() {
  static const std::map<std::string, Entry> r = {
      {"jump_square", {{{"n", 1}}, make_jump_square}},
      {"abs", {{{"n", 1}}, make_abs}},
      {"quad_s", {{{"n", 1}, {"s", 2}}, make_quad_s}},
      {"huber", {{{"n", 1}, {"delta", 1}}, make_huber}},
      {"huber_quad", {{{"n", 1}, {"delta", 1}, {"s", 1}}, make_huber_quad}},
      {"halfsquare", {{{"n", 1}}, make_halfsquare}},
      {"indicator_box", {{{"n", 1}, {"lo", -1}, {"hi", 1}}, make_indicator_box}},
      {"weakly_convex", {{{"n", 1}, {"c", 1}, {"r", 1}}, make_weakly_convex}},
      {"env_abs", {{{"n", 1}, {"lambda", 1}}, make_env_abs}},
      {"env_quad", {{{"n", 1}, {"s", 2}, {"lambda", 0.5}}, make_env_quad}},
      {"pmax2", {{}, make_pmax2}},
      {"neg_quartic",
       {{{"n", 1}},
        [](const ParamMap& p) {
          return negative_control(
              "neg_quartic", "-x^4", dim_of(p), [](double x) { return -x * x * x * x; },
              [](double x) { return -4 * x * x * x; }, [](double x) { return -12 * x * x; });
        }}},
      {"neg_quad",
       {{{"n", 1}},
        [](const ParamMap& p) {
          return negative_control(
              "neg_quad", "-x^2", dim_of(p), [](double x) { return -x * x; },
              [](double x) { return -2 * x; }, [](double) { return -2.0; });
        }}},
      {"usc_jump",
       {{{"n", 1}},
        [](const ParamMap& p) {
          return negative_control(
              "usc_jump", "0 for x != 0, 1 at 0", dim_of(p),
              [](double x) { return x == 0.0 ? 1.0 : 0.0; }, [](double) { return 0.0; },
              [](double) { return 0.0; });
        }}},
  };
  return r;
}

std::string join_names() {
  std::string out;
  for (const auto& [name, entry] : registry()) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

}  // namespace

std::vector<std::string> corpus_names() {
  std::vector<std::string> out;
  for (const auto& [name, entry] : registry()) out.push_back(name);
  return out;
}

FunctionHandle corpus_get(const std::string& name, const ParamMap& params) {
  const auto it = registry().find(name);
  if (it == registry().end()) {
    throw Error(ErrorCode::registry,
                "unknown corpus entry '" + name + "'; available: " + join_names());
  }
  ParamMap p = it->second.defaults;
  for (const auto& [key, value] : params) {
    if (!p.count(key)) {
      std::string known;
      for (const auto& [k, v] : it->second.defaults) known += (known.empty() ? "" : ", ") + k;
      throw Error(ErrorCode::registry, "entry '" + name + "' has no parameter '" + key +
                                           "'; parameters: " + (known.empty() ? "none" : known));
    }
    p[key] = value;
  }
  FunctionHandle h = it->second.build(p);
  h.mutable_meta().params = p;
  return h;
}

std::string corpus_catalog() {
  std::ostringstream os;
  os.precision(17);
  os << "# name\tdim\tparams\tprox_level\ts\tkappa\tdescription\n";
  for (const auto& name : corpus_names()) {
    const FunctionHandle h = corpus_get(name);
    os << name << '\t' << h.dim() << '\t';
    bool first = true;
    for (const auto& [k, v] : h.meta().params) {
      os << (first ? "" : ",") << k << '=' << v;
      first = false;
    }
    if (first) os << '-';
    os << '\t' << h.meta().prox_level << '\t';
    if (h.meta().s) os << *h.meta().s; else os << '-';
    os << '\t';
    if (h.meta().kappa) os << *h.meta().kappa; else os << '-';
    os << '\t' << h.meta().description << '\n';
  }
  return os.str();
}

}  // namespace varan
