#include "varan/bundles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace varan {
namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Mat m1(double a) { return Mat::Constant(1, 1, a); }

std::vector<double> sorted_scalars(const std::vector<Mat>& ms) {
  std::vector<double> out;
  for (const Mat& m : ms) out.push_back(m(0, 0));
  std::sort(out.begin(), out.end());
  return out;
}

TEST(HessianBundle, ConstantAndBranches) {
  const auto q = sorted_scalars(hessian_bundle(corpus_get("quad_s", {{"s", 2}}), v1(0)).matrices());
  ASSERT_EQ(q.size(), 1u);
  EXPECT_NEAR(q[0], 2.0, 1e-4);
  const auto h = sorted_scalars(hessian_bundle(corpus_get("halfsquare"), v1(0)).matrices());
  ASSERT_EQ(h.size(), 2u);
  EXPECT_NEAR(h[0], 0.0, 1e-4);
  EXPECT_NEAR(h[1], 1.0, 1e-4);
  const auto e = sorted_scalars(hessian_bundle(corpus_get("env_abs"), v1(1)).matrices());
  ASSERT_EQ(e.size(), 2u);
  EXPECT_NEAR(e[0], 0.0, 1e-3);
  EXPECT_NEAR(e[1], 1.0, 1e-3);
}

TEST(QuadBundle, QuadraticSingleton) {
  const FunctionHandle f = corpus_get("quad_s", {{"s", 2}});
  const QuadraticBundle b = quad_bundle(f, make_pair(f, v1(0), v1(0)));
  ASSERT_EQ(b.members.size(), 1u);
  EXPECT_NEAR(gqf_distance(b.members[0].form, GQF::full(m1(1))), 0.0, 1e-4);
  EXPECT_TRUE(nonemptiness_check(f, make_pair(f, v1(0), v1(0))));
}

TEST(QuadBundle, JumpSquareVariants) {
  const FunctionHandle f = corpus_get("jump_square");
  const SubgradientPair a = make_pair(f, v1(0), v1(0));
  const std::vector<GQF> expected = {GQF::full(m1(1)), GQF::zero_subspace(1)};
  QuadBundleConfig cfg;
  cfg.lambda = 0.1;
  const QuadraticBundle rev = quad_bundle(f, a, cfg);
  EXPECT_LE(bundle_set_distance(rev.forms(), expected), 5e-2);
  EXPECT_EQ(rev.members.size(), 2u);
  cfg.variant = BundleVariant::original;
  const QuadraticBundle orig = quad_bundle(f, a, cfg);
  EXPECT_EQ(orig.members.size(), 3u);
  EXPECT_LE(bundle_set_distance(orig.forms(),
                                {GQF::full(m1(0)), GQF::full(m1(1)), GQF::zero_subspace(1)}),
            5e-2);
}

TEST(UniformLowerBound, Values) {
  EXPECT_NEAR(uniform_lower_bound({GQF::full(m1(1)), GQF::zero_subspace(1)}), 1.0, 1e-14);
  EXPECT_NEAR(uniform_lower_bound({GQF::full(Eigen::Vector2d(1, 3).asDiagonal().toDenseMatrix())}),
              1.0, 1e-12);
  EXPECT_NEAR(uniform_lower_bound({GQF::full(m1(0)), GQF::full(m1(1))}), 0.0, 1e-14);
  EXPECT_FALSE(std::isfinite(uniform_lower_bound({GQF::zero_subspace(2)})));
  EXPECT_THROW(uniform_lower_bound(std::vector<GQF>{}), Error);
}

TEST(BundleShift, Arithmetic) {
  const std::vector<GQF> b = {GQF::full(m1(1)), GQF::zero_subspace(1)};
  EXPECT_EQ(bundle_set_distance(bundle_shift(b, m1(0)), b), 0.0);
  EXPECT_NEAR(bundle_set_distance(bundle_shift(b, m1(2)), {GQF::full(m1(2)), GQF::zero_subspace(1)}),
              0.0, 1e-14);
  EXPECT_NEAR(bundle_set_distance(bundle_shift({GQF::full(m1(1))}, m1(4)), {GQF::full(m1(3))}), 0.0,
              1e-14);
}

TEST(BundleSetDistance, HausdorffOnScalars) {
  const std::vector<GQF> a = {GQF::full(m1(0)), GQF::full(m1(1))};
  const std::vector<GQF> b = {GQF::full(m1(0.1))};
  // Brute force: max(max_a min_b, max_b min_a) with |a - b| on 1x1 forms.
  EXPECT_NEAR(bundle_set_distance(a, b), 0.9, 1e-14);
}

TEST(QuadBundle, AbsHasZeroFormAwayFromKink) {
  const FunctionHandle f = corpus_get("abs");
  const QuadraticBundle b = quad_bundle(f, make_pair(f, v1(0), v1(1)));
  double best = kInf;
  for (const GQF& q : b.forms()) best = std::min(best, gqf_distance(q, GQF::full(m1(0))));
  EXPECT_LE(best, 5e-2);
}

}  // namespace
}  // namespace varan
