#include "varan/epi.hpp"
#include "varan/grids.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace varan {
namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

FunctionHandle scalar(std::function<double(double)> fn, double lo = -2, double hi = 2) {
  FunctionMeta m;
  m.name = "test";
  return FunctionHandle(1, [fn](const Vec& x) { return fn(x[0]); }, Box::cube(1, lo, hi), m);
}

FunctionHandle point_indicator(double c) {
  return scalar([c](double x) { return std::abs(x - c) < 1e-9 ? 0.0 : kInf; });
}

Box xa_box(double xlo, double xhi, double alo, double ahi) {
  Vec lo(2), hi(2);
  lo << xlo, alo;
  hi << xhi, ahi;
  return Box(lo, hi);
}

bool contains_point(const EpigraphCloud& c, double x, double a) {
  for (const Vec& p : c.points) {
    if (std::abs(p[0] - x) < 1e-9 && std::abs(p[1] - a) < 1e-9) return true;
  }
  return false;
}

TEST(EpiCloud, QuadraticContainsGraphPoints) {
  const EpigraphCloud c = epi_cloud(corpus_get("quad_s", {{"s", 2}}), xa_box(-1, 1, 0, 2), 0.5);
  EXPECT_TRUE(contains_point(c, 0, 0));
  EXPECT_TRUE(contains_point(c, 1, 1));
  EXPECT_TRUE(contains_point(c, 0.5, 0.25));
  for (const Vec& p : c.points) EXPECT_GE(p[1], p[0] * p[0] - 1e-12);
}

TEST(EpiCloud, IndicatorAndJump) {
  const EpigraphCloud box = epi_cloud(corpus_get("indicator_box"), xa_box(-2, 2, 0, 2), 0.25);
  for (const Vec& p : box.points) EXPECT_LE(std::abs(p[0]), 1.0 + 1e-12);
  const EpigraphCloud js = epi_cloud(corpus_get("jump_square"), xa_box(-1, 1, 0, 2), 0.1);
  ASSERT_FALSE(js.points.empty());
  for (const Vec& p : js.points) EXPECT_FALSE(p[0] < 0 && p[1] < 1);
  EXPECT_THROW(epi_cloud(scalar([](double) { return kInf; }), xa_box(-1, 1, 0, 1), 0.5), Error);
}

TEST(EpiDistance, IdenticalShiftedAndMoved) {
  const double res = 0.05;
  const Box b = xa_box(-1, 1, 0, 2);
  const EpigraphCloud q = epi_cloud(scalar([](double x) { return x * x; }), b, res);
  const EpigraphCloud q2 = epi_cloud(scalar([](double x) { return x * x; }), b, res);
  const EpigraphCloud qs = epi_cloud(scalar([](double x) { return x * x + 0.1; }), b, res);
  EXPECT_EQ(epi_distance(q, q2, 1.0), 0.0);
  EXPECT_NEAR(epi_distance(q, qs, 1.0), 0.1, res);
  const EpigraphCloud d0 = epi_cloud(point_indicator(0.0), b, res);
  const EpigraphCloud d2 = epi_cloud(point_indicator(0.2), b, res);
  EXPECT_NEAR(epi_distance(d0, d2, 1.0), 0.2, res);
  EXPECT_THROW(epi_distance(q, epi_cloud(scalar([](double x) { return x * x; }), b, 0.1), 1.0),
               Error);
}

TEST(EpiDistance, TriangleInequalityOnSamples) {
  const Box b = xa_box(-1, 1, 0, 2);
  std::vector<EpigraphCloud> cs;
  for (double a : {0.0, 0.3, 0.7}) {
    cs.push_back(epi_cloud(scalar([a](double x) { return (x - a) * (x - a) + a; }), b, 0.1));
  }
  EXPECT_LE(epi_distance(cs[0], cs[2], 1.5),
            epi_distance(cs[0], cs[1], 1.5) + epi_distance(cs[1], cs[2], 1.5) + 1e-12);
}

TEST(EpiConverges, UniformShiftConverges) {
  const FunctionHandle f = scalar([](double x) { return x * x; });
  const IndexedFamily fam = [](long k) {
    return scalar([k](double x) { return x * x + 1.0 / static_cast<double>(k); });
  };
  EXPECT_TRUE(epi_converges(fam, f, Box::cube(1, -1, 1)).converges);
}

TEST(EpiConverges, AlternatingSignFails) {
  const FunctionHandle f = scalar([](double) { return 0.0; });
  const IndexedFamily fam = [](long k) {
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    return scalar([sign](double x) { return sign * x; });
  };
  const EpiResult r = epi_converges(fam, f, Box::cube(1, -1, 1));
  EXPECT_FALSE(r.converges);
  EXPECT_FALSE(r.certificate.liminf_ok);
}

TEST(LowerBoundStability, Arithmetic) {
  const std::vector<Vec> sphere = sphere_grid(1, 2);
  auto limit = [](const Vec& w) { return w.squaredNorm(); };
  const auto up = [](int k, const Vec& w) { return (1.0 + 1.0 / k) * w.squaredNorm(); };
  const LowerBoundStability a = quadratic_lowerbound_stability(up, 40, limit, 1.0, 0.1, sphere);
  EXPECT_TRUE(a.ok);
  EXPECT_EQ(a.index, 1);
  const auto down = [](int k, const Vec& w) { return (1.0 - 2.0 / k) * w.squaredNorm(); };
  const LowerBoundStability b =
      quadratic_lowerbound_stability(down, 40, limit, 1.0, 0.1, sphere);
  EXPECT_TRUE(b.ok);
  EXPECT_EQ(b.index, 20);
  EXPECT_EQ(b.witness_k, 19);
  EXPECT_THROW(quadratic_lowerbound_stability(up, 40, limit, 2.0, 0.1, sphere), Error);
}

}  // namespace
}  // namespace varan
