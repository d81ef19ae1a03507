#include <cmath>

#include <gtest/gtest.h>

#include "strathom/constructions.hpp"
#include "strathom/gallery.hpp"

using namespace strathom;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

VectorXd unit(Index n, Index i) { return VectorXd::Unit(n, i); }

Subspace span(std::initializer_list<VectorXd> vs, Index n) { return span_of(std::vector<VectorXd>(vs), n); }

VectorXd singular_values(const MatrixXd& m) { return Eigen::JacobiSVD<MatrixXd>(m).singularValues(); }

}  // namespace

TEST(BumpGamma, Values) {
  EXPECT_EQ(bump_gamma(-1), 0.0);
  EXPECT_EQ(bump_gamma(2), 1.0);
  EXPECT_DOUBLE_EQ(bump_gamma(0.5), 0.5);
  EXPECT_GT(bump_gamma_derivative(0.5), 0.0);
  const double h = 1e-6;
  EXPECT_NEAR(bump_gamma_derivative(0.3), (bump_gamma(0.3 + h) - bump_gamma(0.3 - h)) / (2 * h), 1e-7);
}

TEST(BumpGamma, MatchesDslPrimitive) {
  auto g = dsl::parse_map("bump(x1)", 1);
  for (double a = -0.5; a <= 1.5; a += 0.01) EXPECT_NEAR(g.eval(vec({a}))(0), bump_gamma(a), 1e-15);
}

TEST(RankDrop, PlaneExample) {
  auto m = rank_drop_map(2, 1);
  const MatrixXd j = m.jacobian(vec({0, 0}));
  EXPECT_DOUBLE_EQ(j(0, 0), 1);
  EXPECT_DOUBLE_EQ(j(1, 1), 0);
  EXPECT_DOUBLE_EQ(j(0, 1), 0);
  EXPECT_DOUBLE_EQ(j(1, 0), 0);
  const VectorXd far = m.eval(vec({0.8, 0.8}));
  EXPECT_NEAR(far(0), 0.8, 1e-12);
  EXPECT_NEAR(far(1), 0.8, 1e-12);
  // Near the center the second singular value is exp(-1/|a|^2)-small but
  // positive; compare with the closed form gamma + 2 a2^2 gamma'.
  const VectorXd sv = singular_values(m.jacobian(vec({0.1, 0.1})));
  const double q = 0.02;
  const double expected = bump_gamma(q) + 2 * 0.01 * bump_gamma_derivative(q);
  EXPECT_GT(sv(1), 0.0);
  EXPECT_NEAR(sv(1) / expected, 1.0, 1e-6);
  const VectorXd sv_far = singular_values(m.jacobian(vec({0.3, 0.3})));
  EXPECT_GT(sv_far(1), 1e-8 * sv_far(0));
}

TEST(RankDrop, Preconditions) {
  EXPECT_THROW(rank_drop_map(1, 0), PreconditionError);
  EXPECT_THROW(rank_drop_map(3, 3), PreconditionError);
  EXPECT_THROW(rank_drop_map(3, 0), PreconditionError);
}

TEST(RankDrop, IdentityOutsideBallAndDslMatchesOracle) {
  Rng rng(11);
  for (auto [n, r] : {std::pair<Index, Index>{3, 1}, {3, 2}, {5, 3}}) {
    auto m = rank_drop_map(n, r, VectorXd::Constant(n, 0.25), 0.7);
    for (int k = 0; k < 200; ++k) {
      const VectorXd z = m.center + 2.0 * m.radius * ball_vector(rng, n);
      const VectorXd dsl_value = m.eval(z);
      const VectorXd oracle = m.center + m.radius * m.h(m.chart(z));
      EXPECT_LT((dsl_value - oracle).norm(), 1e-12);
      if (m.chart(z).norm() >= 1.0) EXPECT_LT((dsl_value - z).norm(), 1e-12);
    }
  }
}

TEST(RankDrop, PreimageInvertsTheMap) {
  auto m = rank_drop_map(3, 1);
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const VectorXd b = 1.2 * ball_vector(rng, 3);
    EXPECT_LT((m.eval(m.preimage(b)) - b).norm(), 1e-9);
  }
}

TEST(RankDrop, InjectiveOnSampledPairs) {
  auto probe = probe_injectivity(rank_drop_map(3, 2), 20000, 3);
  EXPECT_EQ(probe.collisions, 0u);
  EXPECT_TRUE(radial_factor_monotone());
}

TEST(Complement, ParabolaShelfData) {
  const Subspace leaf_y = span({unit(3, 0), unit(3, 2)}, 3);
  const Subspace tau = span({unit(3, 0)}, 3);
  const Subspace h = choose_complement_H(tau, leaf_y, unit(3, 2), 3);
  EXPECT_EQ(h.dim(), 1);
  EXPECT_EQ(subspace_sum(h, leaf_y).dim(), 3);
  EXPECT_EQ(subspace_sum(h, tau).dim(), 2);
}

TEST(Complement, PlaneWithZeroTau) {
  const Subspace h = choose_complement_H(Subspace::zero(2), span({unit(2, 0)}, 2), unit(2, 0), 2);
  EXPECT_EQ(subspace_sum(h, span({unit(2, 0)}, 2)).dim(), 2);
  EXPECT_EQ(subspace_sum(h, Subspace::zero(2)).dim(), 1);
}

TEST(Complement, NoFaultIsAPreconditionViolation) {
  const Subspace leaf_y = span({unit(3, 0)}, 3);
  const Subspace tau = span({unit(3, 0), unit(3, 1)}, 3);
  EXPECT_THROW(choose_complement_H(tau, leaf_y, unit(3, 0), 3), PreconditionError);
}

TEST(Complement, RandomConfigurations) {
  Rng rng(21);
  for (int k = 0; k < 200; ++k) {
    const Index n = 3 + k % 4;
    const Index ly = 1 + k % (n - 1);
    MatrixXd ybasis(n, ly);
    for (Index j = 0; j < ly; ++j) ybasis.col(j) = gaussian_vector(rng, n);
    const Subspace leaf_y = span_of(ybasis);
    const Index td = k % n;
    MatrixXd tb(n, td);
    for (Index j = 0; j < td; ++j) tb.col(j) = gaussian_vector(rng, n);
    const Subspace tau = span_of(tb);
    const VectorXd v = leaf_y.basis() * gaussian_vector(rng, ly);
    if (contains(tau, span_of({v}, n)).holds) continue;
    const Subspace h = choose_complement_H(tau, leaf_y, v, n);
    EXPECT_EQ(subspace_sum(h, leaf_y).dim(), n);
    EXPECT_LT(subspace_sum(h, tau).dim(), n);
  }
}

TEST(LeastRotation, CarriesSubspaceAndIsOrthogonal) {
  Rng rng(8);
  for (int k = 0; k < 100; ++k) {
    const Index n = 2 + k % 5, d = 1 + k % (n - 1);
    MatrixXd a(n, d), b(n, d);
    for (Index j = 0; j < d; ++j) {
      a.col(j) = gaussian_vector(rng, n);
      b.col(j) = gaussian_vector(rng, n);
    }
    const Subspace from = span_of(a), to = span_of(b);
    const MatrixXd r = least_rotation(from, to);
    EXPECT_LT((r.transpose() * r - MatrixXd::Identity(n, n)).norm(), 1e-10);
    EXPECT_LT(grassmann_distance(span_of(r * from.basis()), to), 1e-8);
  }
}

namespace {

struct ShelfFixture {
  Scene scene = gallery_scene("parabola-shelf");
  StratifiedMapContext ctx = build_context(scene);
  VectorXd y = VectorXd::Zero(3);
};

}  // namespace

TEST(Destabilizer, ParabolaShelfCertificates) {
  ShelfFixture fx;
  auto af = check_af_at(fx.ctx, "S1", "S2", fx.y);
  ASSERT_EQ(af.status, Status::fails);
  const auto w = fault_witness(fx.ctx, af);
  const Subspace h = choose_complement_H(w.tau, w.leaf_y, w.v, 3);
  const std::string base = rank_drop_base_source(h, fx.y, 1.0);
  const auto seq = destabilizing_sequence(base, VectorXd::Zero(3), w, h, 0.5, 25, 1, 2000);
  ASSERT_GE(seq.terms.size(), 20u);
  EXPECT_TRUE(transverse_at(h, w.leaf_y, 3).transverse);
  for (std::size_t i = 0; i < seq.terms.size(); ++i) {
    const auto& t = seq.terms[i];
    EXPECT_FALSE(t.at_x.transverse);
    EXPECT_GE(t.at_x.defect, 1);
    EXPECT_LT(t.value_error, 1e-10);
    EXPECT_LT(t.image_angle, 1e-8);
    if (i) EXPECT_LT(t.c1_distance, seq.terms[i - 1].c1_distance);
  }
}

TEST(Destabilizer, RegularSceneHasNoWitness) {
  auto sc = gallery_scene("parallel-planes");
  auto ctx = build_context(sc);
  auto af = check_af_at(ctx, "S1", "S2", VectorXd::Zero(3));
  EXPECT_THROW(fault_witness(ctx, af), PreconditionError);
}

TEST(TfWitness, ConstantPlanesSheetIsAWitness) {
  auto sc = gallery_scene("parallel-planes-const");
  auto ctx = build_context(sc);
  const VectorXd y = VectorXd::Zero(3);
  const auto w = tf_witness(ctx, "S1", "S2", y, {0, vec({0, 0}), vec({0, 1})}, unit(3, 2));
  EXPECT_TRUE(transverse_at(w.tangent_at_y, span({unit(3, 0), unit(3, 2)}, 3), 3).transverse);
  for (const auto& f : w.frames)
    if (!f.reflected) EXPECT_LT(f.containment, 1e-6) << f.t;
  const auto v = check_tf_at(ctx, "S1", "S2", y, w.as_test());
  EXPECT_EQ(v.status, Status::fails);
  for (const auto& r : v.radii) EXPECT_EQ(r.bad, r.samples);
}

TEST(TfWitness, VInTauIsAPreconditionViolation) {
  auto sc = gallery_scene("parallel-planes-const");
  auto ctx = build_context(sc);
  EXPECT_THROW(tf_witness(ctx, "S1", "S2", VectorXd::Zero(3), {0, vec({0, 0}), vec({0, 1})}, unit(3, 0)),
               PreconditionError);
}
