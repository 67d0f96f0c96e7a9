#include "varan/stability.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace varan {
namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

SubgradientPair origin(const FunctionHandle& f) { return make_pair(f, v1(0), v1(0)); }

FunctionHandle quad(double s) { return corpus_get("quad_s", {{"s", s}}); }

TEST(Svar, QuadraticAndJump) {
  EXPECT_TRUE(svar_check(quad(2), origin(quad(2)), 2.0).ok);
  const SvarResult r = svar_check(quad(2), origin(quad(2)), 3.0);
  EXPECT_FALSE(r.ok);
  EXPECT_LT(r.worst_margin, 0.0);
  // Margin of the quadratic at s = 3 is -|x' - x|^2 / 2; the ball has radius 0.5
  // and pairs stay inside it, so the worst value is at most -(0.5)^2 / 2.
  EXPECT_LE(r.worst_margin, -0.125 + 1e-9);
  const FunctionHandle js = corpus_get("jump_square");
  EXPECT_TRUE(svar_check(js, origin(js), 2.0).ok);
  EXPECT_FALSE(svar_check(js, origin(js), 2.5).ok);
}

TEST(SDirect, QuadraticModuli) {
  for (double s : {-1.0, 0.0, 3.0}) {
    const SDirect d = s_direct(quad(s), origin(quad(s)));
    ASSERT_TRUE(d.s.has_value());
    EXPECT_NEAR(*d.s, s, 1e-6) << s;
  }
}

TEST(Cnv, QuadraticIdentityAndJump) {
  EXPECT_NEAR(cnv_estimate(quad(3), origin(quad(3))).value, 3.0, 1e-6);
  EXPECT_NEAR(cnv_estimate(quad(-1), origin(quad(-1))).value, -1.0, 1e-6);
  const FunctionHandle js = corpus_get("jump_square");
  EXPECT_NEAR(cnv_estimate(js, origin(js)).value, 2.0, 1e-3);
}

TEST(Growth, ForwardAndBackward) {
  EXPECT_TRUE(growth_vs_d2(quad(2), origin(quad(2)), 2.0, GrowthMode::forward).ok);
  const GrowthCheck abs = growth_vs_d2(corpus_get("abs"), origin(corpus_get("abs")), 10.0,
                                       GrowthMode::forward);
  EXPECT_TRUE(abs.ok);
  EXPECT_FALSE(std::isfinite(abs.d2_min));
  const GrowthCheck back = growth_vs_d2(quad(3), origin(quad(3)), 2.0, GrowthMode::backward);
  EXPECT_TRUE(back.ok);
  EXPECT_GT(back.radius, 0.0);
  // d^2 = kappa is not strictly above kappa.
  EXPECT_FALSE(growth_vs_d2(quad(2), origin(quad(2)), 2.0, GrowthMode::backward).premise);
}

TEST(HessianConvexity, Modes) {
  for (auto mode : {ConvexityMode::i_to_ii, ConvexityMode::ii_to_iii, ConvexityMode::iii_to_i}) {
    EXPECT_TRUE(hessian_convexity_check(quad(2), v1(0), 2.0, mode).ok);
  }
  EXPECT_TRUE(
      hessian_convexity_check(corpus_get("env_quad"), v1(0), 1.0, ConvexityMode::i_to_ii).ok);
  EXPECT_FALSE(
      hessian_convexity_check(corpus_get("halfsquare"), v1(0), 0.5, ConvexityMode::ii_to_iii)
          .premise);
}

TEST(Tilt, MapClosedForms) {
  const TiltMap q = tilt_map(quad(2), v1(0), 1.0, v1(0.5));
  ASSERT_EQ(q.minimizers.size(), 1u);
  EXPECT_NEAR(q.minimizers[0][0], 0.25, 1e-7);
  const TiltMap a = tilt_map(corpus_get("abs"), v1(0), 1.0, v1(0.3));
  ASSERT_EQ(a.minimizers.size(), 1u);
  EXPECT_NEAR(a.minimizers[0][0], 0.0, 1e-7);
  EXPECT_NEAR(tilt_map(quad(2), v1(0), 1.0, v1(0)).minimizers[0][0], 0.0, 1e-9);
}

TEST(Tilt, StabilityAndModulus) {
  for (double a : {0.5, 1.0, 4.0}) {
    const TiltResult r = tilt_check(quad(a), v1(0));
    EXPECT_TRUE(r.stable);
    EXPECT_NEAR(r.kappa_hat, 1.0 / a, 1e-4) << a;
  }
  const TiltResult abs = tilt_check(corpus_get("abs"), v1(0));
  EXPECT_TRUE(abs.stable);
  EXPECT_NEAR(abs.kappa_hat, 0.0, 1e-7);
  EXPECT_FALSE(tilt_check(corpus_get("neg_quad"), v1(0)).stable);
}

TEST(Relationship, Kinds) {
  EXPECT_TRUE(make_equal("e", 1.0, 1.05, 0.1).pass);
  EXPECT_FALSE(make_equal("e", 1.0, 1.2, 0.1).pass);
  EXPECT_TRUE(make_at_least("a", 0.95, 1.0, 0.1).pass);
  EXPECT_FALSE(make_at_least("a", 0.8, 1.0, 0.1).pass);
}

TEST(ModulusCrosscheck, QuadraticConstants) {
  const ModulusReport r = modulus_crosscheck(quad(3), origin(quad(3)));
  ASSERT_TRUE(r.s_direct && r.mu && r.cnv);
  EXPECT_NEAR(*r.s_direct, 3.0, 1e-6);
  EXPECT_NEAR(*r.mu, 1.5, 1e-4);
  EXPECT_NEAR(*r.cnv, 3.0, 1e-6);
  EXPECT_TRUE(r.all_pass());
  const ModulusReport w = modulus_crosscheck(quad(-1), origin(quad(-1)));
  EXPECT_TRUE(w.all_pass());
}

TEST(ModulusCrosscheck, JumpSquare) {
  const FunctionHandle f = corpus_get("jump_square");
  const ModulusReport r = modulus_crosscheck(f, origin(f));
  ASSERT_TRUE(r.s_direct && r.mu);
  EXPECT_NEAR(*r.s_direct, 2.0, 1e-6);
  EXPECT_NEAR(*r.mu, 1.0, 1e-4);
  EXPECT_TRUE(r.all_pass());
}

TEST(TiltCrosscheck, QuadraticAndAbs) {
  const ModulusReport q = tilt_crosscheck(quad(4), v1(0));
  ASSERT_TRUE(q.kappa && q.mu);
  EXPECT_NEAR(*q.kappa, 0.25, 1e-4);
  EXPECT_NEAR(*q.mu, 2.0, 1e-4);
  EXPECT_TRUE(q.all_pass());
  const ModulusReport a = tilt_crosscheck(corpus_get("abs"), v1(0));
  EXPECT_TRUE(a.all_pass());
  bool vacuous = false;
  for (const auto& rel : a.relationships) vacuous |= !rel.note.empty();
  EXPECT_TRUE(vacuous);
}

TEST(Semidefinite, Necessity) {
  const FunctionHandle abs = corpus_get("abs");
  const SemidefiniteCheck a = semidefinite_necessity_check(abs, origin(abs));
  EXPECT_TRUE(a.precondition);
  EXPECT_TRUE(a.ok);
  EXPECT_TRUE(semidefinite_necessity_check(quad(2), origin(quad(2))).ok);
  EXPECT_FALSE(semidefinite_necessity_check(quad(-1), origin(quad(-1))).precondition);
}

}  // namespace
}  // namespace varan
