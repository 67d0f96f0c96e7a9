#include "varan/grids.hpp"
#include "varan/secondorder.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace varan {
namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
Mat diag(std::initializer_list<double> d) {
  return Eigen::Map<const Vec>(d.begin(), static_cast<Eigen::Index>(d.size())).asDiagonal();
}

TEST(Delta2, DirectEvaluation) {
  EXPECT_NEAR(delta2(corpus_get("quad_s", {{"s", 2}}), v1(0), v1(0), 0.3, v1(1)).value(), 2.0,
              1e-12);
  EXPECT_NEAR(delta2(corpus_get("jump_square"), v1(0), v1(0), 0.1, v1(-1)).value(), 200.0, 1e-9);
  EXPECT_NEAR(delta2(corpus_get("abs"), v1(0), v1(0), 0.2, v1(1)).value(), 10.0, 1e-12);
  EXPECT_THROW(delta2(corpus_get("indicator_box"), v1(2), v1(0), 0.1, v1(1)), Error);
}

TEST(D2, SmoothMatchesHessian) {
  const FunctionHandle f = corpus_get("quad_s", {{"s", 2}});
  for (double w : {-1.5, 0.5, 1.0}) {
    EXPECT_NEAR(d2(f, v1(1), v1(2), v1(w)).value.value(), 2 * w * w, 1e-5 * std::max(1.0, w * w));
  }
  // Non-diagonal quadratic in 2D against <w, A w>.
  Mat A(2, 2);
  A << 3, 1, 1, 2;
  FunctionMeta m;
  m.name = "q";
  const FunctionHandle q(2, [A](const Vec& x) { return 0.5 * x.dot(A * x); },
                         Box::cube(2, -5, 5), m);
  const Vec x = v2(0.3, -0.2);
  for (const Vec& w : sphere_grid(2, 8)) {
    EXPECT_NEAR(d2(q, x, A * x, w).value.value(), w.dot(A * w), 1e-4);
  }
}

TEST(D2, JumpSquareKink) {
  const FunctionHandle f = corpus_get("jump_square");
  EXPECT_FALSE(d2(f, v1(0), v1(0), v1(-1)).value.is_finite());
  EXPECT_NEAR(d2(f, v1(0), v1(0), v1(1)).value.value(), 2.0, 1e-5);
  EXPECT_FALSE(d2(f, v1(0), v1(-0.5), v1(1)).value.is_finite());
  EXPECT_EQ(d2(f, v1(0), v1(-0.5), v1(0)).value.value(), 0.0);
  EXPECT_FALSE(d2(corpus_get("abs"), v1(0), v1(0), v1(1)).value.is_finite());
  EXPECT_NEAR(d2(corpus_get("abs"), v1(0), v1(1), v1(1)).value.value(), 0.0, 1e-6);
}

TEST(GQF, CanonicalFormAndEvaluation) {
  Mat basis(2, 1);
  basis << 2, 0;
  const GQF q(diag({2, 4}), basis);
  EXPECT_EQ(q.rank(), 1);
  EXPECT_NEAR((q.basis().transpose() * q.basis() - Mat::Identity(1, 1)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((q.A() - q.A().transpose()).norm(), 0.0, 1e-12);
  EXPECT_NEAR(q(v2(3, 0)).value(), 18.0, 1e-12);
  EXPECT_FALSE(q(v2(0, 1)).is_finite());
  EXPECT_NEAR(q.min_on_sphere(), 2.0, 1e-12);
  EXPECT_FALSE(std::isfinite(GQF::zero_subspace(2).min_on_sphere()));
  // Compression: A off L does not matter.
  const GQF q2(diag({2, -100}), basis);
  EXPECT_NEAR(gqf_distance(q, q2), 0.0, 1e-12);
  EXPECT_GT(gqf_distance(q, GQF::full(diag({2, 4}))), 0.5);
}

std::vector<GqfSample> sample(const std::function<double(const Vec&)>& fn, int n) {
  std::vector<GqfSample> s;
  for (const Vec& w : sphere_grid(n, 16)) s.push_back({w, ExtendedReal(fn(w))});
  return s;
}

TEST(GqfFit, FullZeroAndHalfLine) {
  const GqfFit full = gqf_fit(sample([](const Vec& w) { return 2 * w.squaredNorm(); }, 1));
  ASSERT_TRUE(full.ok);
  EXPECT_NEAR(gqf_distance(full.form, GQF::full(diag({2}))), 0.0, 1e-9);
  const GqfFit zero =
      gqf_fit(sample([](const Vec& w) { return w.norm() == 0 ? 0.0 : kInf; }, 1));
  ASSERT_TRUE(zero.ok);
  EXPECT_EQ(zero.form.rank(), 0);
  const GqfFit half = gqf_fit(sample([](const Vec& w) { return w[0] >= 0 ? 2 * w[0] * w[0] : kInf; }, 1));
  EXPECT_FALSE(half.ok);
}

TEST(GqfFit, RecoversRandomForms) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Mat B(3, 3);
    for (int i = 0; i < 9; ++i) B(i / 3, i % 3) = g(rng);
    const Mat A = 0.5 * (B + B.transpose());
    const GqfFit fit = gqf_fit(sample([&](const Vec& w) { return w.dot(A * w); }, 3));
    ASSERT_TRUE(fit.ok);
    EXPECT_NEAR(gqf_distance(fit.form, GQF::full(A)), 0.0, 1e-8);
  }
}

TEST(GqfHalfEnvelope, AgainstGridMinimization) {
  const double lam = 1.0;
  // Independent oracle: grid over u in L.
  auto grid_1d = [&](const std::function<double(double)>& obj) {
    double best = kInf;
    for (int i = 0; i <= 200000; ++i) best = std::min(best, obj(-10.0 + 20.0 * i / 200000));
    return best;
  };
  const GQF q2 = GQF::full(diag({2}));
  const double e = gqf_half_envelope(q2, lam, v1(3));
  EXPECT_NEAR(e, grid_1d([](double u) { return u * u + (u - 3) * (u - 3) / 2; }), 1e-7);
  EXPECT_NEAR(e, 3.0, 1e-12);
  EXPECT_NEAR(gqf_half_envelope(GQF::zero_subspace(2), 0.5, v2(1, 2)), 5.0, 1e-12);
  Mat basis(2, 1);
  basis << 1, 0;
  EXPECT_NEAR(gqf_half_envelope(GQF(diag({2, 4}), basis), lam, v2(0, 5)), 12.5, 1e-12);
  EXPECT_THROW(gqf_half_envelope(GQF::full(diag({-3})), lam, v1(1)), Error);
}

TEST(GenCs, ArithmeticAndEquality) {
  const Vec x = v2(0.7, -1.1);
  auto [l1, r1] = gen_cs(Mat::Identity(2, 2), x, x);
  EXPECT_NEAR(l1, r1, 1e-14);
  auto [l2, r2] = gen_cs(diag({2, 0.5}), v2(1, 0), v2(0, 1));
  EXPECT_NEAR(l2, 4.0, 1e-14);
  EXPECT_NEAR(r2, 0.0, 1e-14);
  auto [l3, r3] = gen_cs(diag({4}), v1(1), v1(4));
  EXPECT_NEAR(l3, 8.0, 1e-14);
  EXPECT_NEAR(r3, 8.0, 1e-14);
  EXPECT_THROW(gen_cs(diag({1, -1}), x, x), Error);
}

TEST(ExtendPosdef, ProjectorArithmetic) {
  EXPECT_NEAR((extend_posdef(diag({2, 5}), Mat::Identity(2, 2), 1.0) - diag({2, 5})).norm(), 0,
              1e-14);
  Mat e1(2, 1);
  e1 << 1, 0;
  EXPECT_NEAR((extend_posdef(diag({3, -7}), e1, 3.0) - diag({3, 3})).norm(), 0, 1e-14);
  Mat d(2, 1);
  d << 1, 1;
  d /= std::sqrt(2.0);
  const Mat B = extend_posdef(Mat::Ones(2, 2), d, 2.0);
  for (const Vec& w : sphere_grid(2, 64)) EXPECT_GE(w.dot(B * w), 2.0 - 1e-12);
  EXPECT_THROW(extend_posdef(diag({1, 1}), e1, 3.0), Error);
}

TEST(SumRule, SmoothPlusNonsmooth) {
  const FunctionHandle q = corpus_get("quad_s", {{"s", 2}});
  const auto w = sphere_grid(1, 2);
  EXPECT_TRUE(d2_sum_rule_check(q, corpus_get("abs"), v1(0), v1(0), w).ok);
  EXPECT_TRUE(d2_sum_rule_check(q, corpus_get("jump_square"), v1(0.5), v1(1), w).ok);
}

TEST(TwiceEpi, SmoothAndKink) {
  const auto sphere = sphere_grid(1, 2);
  const TwiceEpiProbe smooth =
      twice_epi_diff_probe(corpus_get("jump_square"), v1(0.3), v1(0.6), sphere);
  EXPECT_TRUE(smooth.epi_differentiable);
  ASSERT_TRUE(smooth.fit.ok);
  EXPECT_NEAR(smooth.fit.form.A()(0, 0), 2.0, 1e-3);
  const TwiceEpiProbe kink = twice_epi_diff_probe(corpus_get("jump_square"), v1(0), v1(0), sphere);
  EXPECT_TRUE(kink.epi_differentiable);
  EXPECT_FALSE(kink.fit.ok);
}

}  // namespace
}  // namespace varan
