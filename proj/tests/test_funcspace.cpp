#include "varan/funcspace.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace varan {
namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

TEST(ExtendedReal, OrderAndAddition) {
  const ExtendedReal a(1.0), b(2.0), inf = ExtendedReal::infinity();
  EXPECT_TRUE(a < b);
  EXPECT_TRUE(b < inf);
  EXPECT_FALSE(inf < inf);
  EXPECT_TRUE(inf <= inf);
  EXPECT_EQ((a + b).value(), 3.0);
  EXPECT_FALSE((a + inf).is_finite());
  EXPECT_THROW(inf.value(), Error);
  EXPECT_THROW(ExtendedReal(-kInf), Error);
  EXPECT_THROW(ExtendedReal(std::nan("")), Error);
}

TEST(Corpus, RegistryAndValues) {
  const FunctionHandle js = corpus_get("jump_square");
  EXPECT_EQ(js.eval(v1(0.5)), 0.25);
  EXPECT_EQ(js.eval(v1(-0.5)), 1.0);
  EXPECT_EQ(js.eval(v1(0.0)), 0.0);
  EXPECT_EQ(corpus_get("quad_s", {{"s", 2}}).eval(v1(1.0)), 1.0);
  EXPECT_NEAR(corpus_get("abs").prox_oracle(1.0, v1(2.0))[0], 1.0, 1e-12);
  try {
    corpus_get("no_such_function");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::registry);
    EXPECT_NE(std::string(e.what()).find("quad_s"), std::string::npos);
  }
  EXPECT_THROW(corpus_get("quad_s", {{"bogus", 1}}), Error);
}

TEST(Corpus, GradientOraclesMatchCentralDifferences) {
  for (const auto& name : corpus_names()) {
    const FunctionHandle f = corpus_get(name);
    if (!f.has_gradient()) continue;
    const int n = f.dim();
    for (double a : {-0.37, 0.21, 0.64}) {
      const Vec x = Vec::Constant(n, a) + Vec::LinSpaced(n, 0.0, 0.05);
      if (!std::isfinite(f.eval(x))) continue;
      const double h = 1e-6;
      const Vec g = f.gradient(x);
      for (int i = 0; i < n; ++i) {
        Vec e = Vec::Zero(n);
        e[i] = h;
        const double fd = (f.eval(x + e) - f.eval(x - e)) / (2 * h);
        EXPECT_NEAR(g[i], fd, 1e-4 * std::max(1.0, std::abs(fd))) << name << " at " << a;
      }
    }
  }
}

TEST(Corpus, ProxOraclesBeatBruteForceGrid) {
  for (const auto& name : corpus_names()) {
    const FunctionHandle f = corpus_get(name);
    if (!f.has_prox() || f.dim() != 1) continue;
    const double lam = 0.3;
    for (double z : {-1.3, -0.2, 0.0, 0.45, 1.7}) {
      const double p = f.prox_oracle(lam, v1(z))[0];
      auto obj = [&](double u) { return f.eval(v1(u)) + (u - z) * (u - z) / (2 * lam); };
      double best = kInf;
      for (int i = 0; i <= 20000; ++i) best = std::min(best, obj(-4.0 + 8.0 * i / 20000));
      EXPECT_LE(obj(p), best + 1e-9) << name << " z=" << z;
    }
  }
}

TEST(Attentive, Membership) {
  const FunctionHandle f = corpus_get("jump_square");
  const SubgradientPair anchor{v1(0), v1(0), 0.0};
  const Localization loc{anchor, 0.5};
  EXPECT_TRUE(attentive_member(anchor, loc));
  EXPECT_FALSE(attentive_member({v1(-0.1), v1(0), 1.0}, loc));
  EXPECT_TRUE(attentive_member({v1(0.1), v1(0.2), 0.01}, loc));
  EXPECT_THROW(make_pair(corpus_get("indicator_box"), v1(3.0), v1(0)), Error);
}

TEST(Lsc, ContinuousJumpAndUpperJump) {
  EXPECT_TRUE(lsc_probe(corpus_get("quad_s"), v1(0.3)));
  EXPECT_TRUE(lsc_probe(corpus_get("jump_square"), v1(0.0)));
  EXPECT_FALSE(lsc_probe(corpus_get("usc_jump"), v1(0.0)));
}

TEST(Subgradient, SampledInequality) {
  const FunctionHandle f = corpus_get("abs");
  EXPECT_TRUE(subgradient_check(f, make_pair(f, v1(0), v1(0.5))).ok);
  EXPECT_FALSE(subgradient_check(f, make_pair(f, v1(0), v1(1.5))).ok);
}

TEST(Combinators, AddQuadraticShiftsValuesAndModulus) {
  const FunctionHandle f = corpus_get("quad_s", {{"s", 2}});
  const FunctionHandle g = add_quadratic(f, Mat::Constant(1, 1, 4.0), v1(0));
  EXPECT_NEAR(g.eval(v1(0.5)), 0.25 + 0.5, 1e-15);
  ASSERT_TRUE(g.meta().s.has_value());
  EXPECT_NEAR(*g.meta().s, 6.0, 1e-15);
  const FunctionHandle h = sum(f, corpus_get("abs"));
  EXPECT_NEAR(h.eval(v1(-0.5)), 0.75, 1e-15);
}

}  // namespace
}  // namespace varan
