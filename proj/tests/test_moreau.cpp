#include "varan/moreau.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace varan {
namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

// Brute-force 1D envelope on a fine grid.
double grid_envelope(const FunctionHandle& f, double lam, double z) {
  double best = kInf;
  for (int i = 0; i <= 40000; ++i) {
    const double u = z - 4.0 + 8.0 * i / 40000;
    best = std::min(best, f.eval(v1(u)) + (u - z) * (u - z) / (2 * lam));
  }
  return best;
}

TEST(Prox, AbsMatchesSoftThreshold) {
  const ProxResult r = prox(corpus_get("abs"), 1.0, v1(2.0));
  ASSERT_TRUE(r.single_valued());
  EXPECT_NEAR(r.minimizers[0][0], 1.0, 1e-8);
  EXPECT_NEAR(r.value.value(), 1.5, 1e-8);
}

TEST(Prox, IndicatorIsProjection) {
  const ProxResult r = prox(corpus_get("indicator_box"), 0.5, v1(3.0));
  ASSERT_TRUE(r.single_valued());
  EXPECT_NEAR(r.minimizers[0][0], 1.0, 1e-8);
  EXPECT_NEAR(r.value.value(), 4.0, 1e-8);
}

TEST(Prox, JumpSquareAtZero) {
  const ProxResult r = prox(corpus_get("jump_square"), 0.1, v1(0.0));
  ASSERT_TRUE(r.single_valued());
  EXPECT_NEAR(r.minimizers[0][0], 0.0, 1e-8);
  EXPECT_NEAR(r.value.value(), 0.0, 1e-10);
}

TEST(Prox, MultivaluedAtTie) {
  // Left branch value 1 at u = z ties with z^2 / (2 lambda) at u = 0.
  const FunctionHandle f = corpus_get("jump_square");
  const ProxResult r = prox(f, 0.5, v1(-1.0));
  ASSERT_EQ(r.minimizers.size(), 2u);
  EXPECT_NEAR(r.minimizers[0][0], -1.0, 1e-6);
  EXPECT_NEAR(r.minimizers[1][0], 0.0, 1e-6);
  EXPECT_THROW(envelope_gradient(f, 0.5, v1(-1.0)), Error);
}

TEST(Envelope, ClosedFormsAndGrid) {
  EXPECT_NEAR(envelope(corpus_get("abs"), 1.0, v1(0.5)).value(), 0.125, 1e-8);
  EXPECT_NEAR(envelope(corpus_get("quad_s", {{"s", 2}}), 1.0, v1(3.0)).value(), 3.0, 1e-8);
  for (const char* name : {"jump_square", "huber", "halfsquare", "weakly_convex"}) {
    const FunctionHandle f = corpus_get(name);
    for (double z : {-0.8, -0.05, 0.3, 1.1}) {
      const double e = envelope(f, 0.2, v1(z)).value();
      EXPECT_NEAR(e, grid_envelope(f, 0.2, z), 1e-6) << name << " z=" << z;
      EXPECT_LE(e, f.eval(v1(z)) + 1e-12);
    }
  }
}

TEST(Envelope, Gradient) {
  const FunctionHandle f = corpus_get("abs");
  EXPECT_NEAR(envelope_gradient(f, 1.0, v1(2.0))[0], 1.0, 1e-7);
  EXPECT_NEAR(envelope_gradient(f, 1.0, v1(0.0))[0], 0.0, 1e-7);
  EXPECT_NEAR(envelope_gradient(corpus_get("indicator_box"), 0.5, v1(3.0))[0], 4.0, 1e-7);
  // Against central differences of the grid envelope.
  const FunctionHandle h = corpus_get("huber");
  for (double z : {-1.7, 0.4, 2.2}) {
    const double fd = (grid_envelope(h, 0.3, z + 1e-3) - grid_envelope(h, 0.3, z - 1e-3)) / 2e-3;
    EXPECT_NEAR(envelope_gradient(h, 0.3, v1(z))[0], fd, 1e-3);
  }
}

TEST(Envelope, LocalEnvelopeAgreesWithGlobal) {
  const FunctionHandle f = corpus_get("jump_square");
  const LocalEnvelope le(f, 0.1, v1(0.2));
  for (double dz : {-0.01, 0.0, 0.015}) {
    EXPECT_NEAR(le.value(v1(0.2 + dz)), envelope(f, 0.1, v1(0.2 + dz)).value(), 1e-9);
  }
}

TEST(AttentivePath, QuadraticClosedForm) {
  const FunctionHandle f = corpus_get("quad_s", {{"s", 2}});
  const SubgradientPair anchor{v1(0), v1(0), 0.0};
  std::vector<Vec> zs;
  for (int k = 1; k <= 8; ++k) zs.push_back(v1(1.0 / k));
  const AttentivePath p = attentive_path(f, anchor, 0.1, zs);
  ASSERT_EQ(p.pairs.size(), zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double x = zs[i][0] / 1.2;
    EXPECT_NEAR(p.pairs[i].x[0], x, 1e-7);
    EXPECT_NEAR(p.pairs[i].v[0], 2 * x, 1e-6);
    EXPECT_NEAR(p.pairs[i].fx, x * x, 1e-7);
  }
}

TEST(AttentivePath, JumpSquareStaysOnRightBranch) {
  const FunctionHandle f = corpus_get("jump_square");
  std::vector<Vec> zs;
  for (int k = 1; k <= 16; ++k) zs.push_back(v1(1.0 / k));
  const AttentivePath p = attentive_path(f, {v1(0), v1(0), 0.0}, 0.1, zs);
  ASSERT_FALSE(p.pairs.empty());
  for (std::size_t i = 0; i < p.pairs.size(); ++i) {
    // Right branch prox of z > 0 is z / (1 + 2 lambda).
    const double x = zs[p.source[i]][0] / 1.2;
    EXPECT_NEAR(p.pairs[i].x[0], x, 1e-7);
    EXPECT_NEAR(p.pairs[i].fx, x * x, 1e-7);
  }
  EXPECT_EQ(p.source.back(), zs.size() - 1);
}

TEST(AttentivePath, FixedPoint) {
  const FunctionHandle f = corpus_get("huber");
  const SubgradientPair a = make_pair(f, v1(0.5), v1(0.5));
  const std::vector<Vec> zs(4, a.x + 0.1 * a.v);
  const AttentivePath p = attentive_path(f, a, 0.1, zs);
  ASSERT_EQ(p.pairs.size(), 4u);
  for (const auto& q : p.pairs) {
    EXPECT_NEAR(q.x[0], 0.5, 1e-8);
    EXPECT_NEAR(q.v[0], 0.5, 1e-6);
  }
}

TEST(ProxBounded, Controls) {
  EXPECT_TRUE(prox_bounded_probe(corpus_get("abs")));
  const FunctionHandle nq = corpus_get("quad_s", {{"s", -1}});
  EXPECT_TRUE(prox_bounded_at(nq, 0.5));
  EXPECT_FALSE(prox_bounded_at(nq, 2.0));
  EXPECT_FALSE(prox_bounded_probe(corpus_get("neg_quartic")));
}

TEST(C11, EnvelopeLipschitzConstants) {
  EXPECT_NEAR(c11_probe(corpus_get("quad_s", {{"s", 2}}), 1.0, v1(0), 0.5).lipschitz, 2.0 / 3.0,
              1e-4);
  EXPECT_NEAR(c11_probe(corpus_get("indicator_box"), 1.0, v1(0), 0.5).lipschitz, 0.0, 1e-6);
  EXPECT_NEAR(c11_probe(corpus_get("abs"), 1.0, v1(0), 0.5).lipschitz, 1.0, 1e-4);
}

}  // namespace
}  // namespace varan
