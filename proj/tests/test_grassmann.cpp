#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "strathom/grassmann.hpp"
#include "strathom/random.hpp"

using namespace strathom;

namespace {

constexpr double kPi = std::numbers::pi;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Subspace span(std::initializer_list<VectorXd> vs) {
  std::vector<VectorXd> list(vs);
  return span_of(list, list.front().size());
}

Subspace random_subspace(Rng& rng, Index n, Index k) {
  MatrixXd m(n, k);
  for (Index j = 0; j < k; ++j) m.col(j) = gaussian_vector(rng, n);
  return span_of(m);
}

/// Random subspace with a prescribed overlap to `a`, so that
/// intersections of every dimension get exercised.
Subspace overlapping_subspace(Rng& rng, const Subspace& a, Index k, Index shared) {
  const Index n = a.ambient_dim();
  MatrixXd m(n, k);
  for (Index j = 0; j < k; ++j) {
    if (j < shared && j < a.dim())
      m.col(j) = a.basis() * gaussian_vector(rng, a.dim());
    else
      m.col(j) = gaussian_vector(rng, n);
  }
  return span_of(m);
}

}  // namespace

TEST(SpanOf, Examples) {
  auto s1 = span({vec({1, 0, 0})});
  EXPECT_EQ(s1.dim(), 1);
  auto s2 = span({vec({1, 0}), vec({2, 0})});
  EXPECT_EQ(s2.dim(), 1);
  EXPECT_NEAR(grassmann_distance(s2, span({vec({1, 0})})), 0.0, 1e-15);
  auto s3 = span({vec({1, 1, 0}), vec({1, -1, 0})});
  EXPECT_EQ(s3.dim(), 2);
  EXPECT_NEAR(grassmann_distance(s3, span({vec({1, 0, 0}), vec({0, 1, 0})})), 0.0, 1e-15);
  EXPECT_EQ(span_of(std::vector<VectorXd>{}, 3).dim(), 0);
  EXPECT_LT(s3.orthonormality_error(), 1e-10);
}

TEST(PrincipalAngles, Examples) {
  auto a = span({vec({1, 0, 0}), vec({0, 1, 1})});
  for (double t : principal_angles(a, a)) EXPECT_NEAR(t, 0.0, 1e-12);
  auto ortho = principal_angles(span({vec({1, 0})}), span({vec({0, 1})}));
  ASSERT_EQ(ortho.size(), 1u);
  EXPECT_NEAR(ortho[0], kPi / 2, 1e-15);
  auto diag = principal_angles(span({vec({1, 1})}), span({vec({1, 0})}));
  EXPECT_NEAR(diag[0], kPi / 4, 1e-15);
}

TEST(PrincipalAngles, SmallAnglesResolved) {
  auto a = span({vec({1, 1e-9})});
  auto b = span({vec({1, 0})});
  EXPECT_NEAR(principal_angles(a, b)[0], 1e-9, 1e-18);
}

TEST(PrincipalAngles, Properties) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = 1 + static_cast<Index>(rng() % 8);
    const Index ka = static_cast<Index>(rng() % (n + 1));
    const Index kb = static_cast<Index>(rng() % (n + 1));
    auto a = random_subspace(rng, n, ka);
    auto b = random_subspace(rng, n, kb);
    auto ab = principal_angles(a, b);
    auto ba = principal_angles(b, a);
    ASSERT_EQ(ab.size(), static_cast<std::size_t>(std::min(ka, kb)));
    for (std::size_t i = 0; i < ab.size(); ++i) {
      EXPECT_NEAR(ab[i], ba[i], 1e-12);
      EXPECT_GE(ab[i], 0.0);
      EXPECT_LE(ab[i], kPi / 2);
      if (i) EXPECT_LE(ab[i - 1], ab[i]);
    }
    // Re-orthonormalized copies are the same point.
    MatrixXd q = MatrixXd::Identity(ka, ka);
    if (ka > 0) q = Eigen::HouseholderQR<MatrixXd>(MatrixXd::Random(ka, ka)).householderQ();
    auto a2 = Subspace::from_orthonormal(a.basis() * q);
    for (double t : principal_angles(a, a2)) EXPECT_LT(t, 1e-7);
  }
}

TEST(Sum, Examples) {
  auto e1 = span({vec({1, 0, 0})});
  auto e2 = span({vec({0, 1, 0})});
  auto plane = span({vec({1, 0, 0}), vec({0, 1, 0})});
  EXPECT_EQ(subspace_sum(e1, e2).dim(), 2);
  EXPECT_NEAR(grassmann_distance(subspace_sum(e1, e2), plane), 0.0, 1e-14);
  EXPECT_EQ(subspace_sum(plane, plane).dim(), 2);
  auto s = subspace_sum(e1, span({vec({1, 1, 0})}));
  EXPECT_EQ(s.dim(), 2);
  EXPECT_NEAR(grassmann_distance(s, plane), 0.0, 1e-14);
}

TEST(Intersection, Examples) {
  auto a = span({vec({1, 0, 0}), vec({0, 1, 0})});
  auto b = span({vec({0, 1, 0}), vec({0, 0, 1})});
  auto i = subspace_intersection(a, b);
  ASSERT_EQ(i.dim(), 1);
  EXPECT_NEAR(grassmann_distance(i, span({vec({0, 1, 0})})), 0.0, 1e-14);
  EXPECT_EQ(subspace_intersection(a, a).dim(), 2);
  Rng rng(3);
  auto p = random_subspace(rng, 3, 2);
  auto q = random_subspace(rng, 3, 2);
  auto line = subspace_intersection(p, q);
  ASSERT_EQ(line.dim(), 1);
  EXPECT_TRUE(contains(p, line).holds);
  EXPECT_TRUE(contains(q, line).holds);
}

TEST(Intersection, DimensionFormulaOnThousandPairs) {
  Rng rng(2024);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 1 + static_cast<Index>(rng() % 8);
    const Index ka = static_cast<Index>(rng() % (n + 1));
    const Index kb = static_cast<Index>(rng() % (n + 1));
    const Index shared = static_cast<Index>(rng() % (std::min(ka, kb) + 1));
    auto a = random_subspace(rng, n, ka);
    auto b = overlapping_subspace(rng, a, kb, shared);
    const Index lhs = subspace_sum(a, b).dim() + subspace_intersection(a, b).dim();
    if (lhs != a.dim() + b.dim()) ++mismatches;
    // Containment and the sum dimension must agree.
    EXPECT_EQ(contains(a, b).holds, subspace_sum(a, b).dim() == a.dim());
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(Contains, Examples) {
  Rng rng(5);
  auto any = random_subspace(rng, 3, 2);
  auto c = contains(Subspace::full(3), any);
  EXPECT_TRUE(c.holds);
  EXPECT_NEAR(c.angle, 0.0, 1e-15);
  auto miss = contains(span({vec({1, 0, 0})}), span({vec({0, 0, 1})}));
  EXPECT_FALSE(miss.holds);
  EXPECT_NEAR(miss.angle, kPi / 2, 1e-15);
  EXPECT_NEAR(std::abs(miss.worst(2)), 1.0, 1e-15);
  EXPECT_TRUE(contains(span({vec({1, 0, 0}), vec({0, 1, 0})}), span({vec({1, 1, 0})})).holds);
  EXPECT_TRUE(contains(span({vec({1, 0, 0})}), Subspace::zero(3)).holds);
}

TEST(Kernel, Examples) {
  MatrixXd row(1, 3);
  row << 0, 1, 1;
  auto k = kernel(row);
  ASSERT_EQ(k.dim(), 2);
  EXPECT_NEAR(grassmann_distance(k, span({vec({1, 0, 0}), vec({0, 1, -1})})), 0.0, 1e-14);
  EXPECT_EQ(kernel(MatrixXd::Identity(3, 3)).dim(), 0);
  EXPECT_EQ(kernel(MatrixXd::Zero(1, 3)).dim(), 3);
  EXPECT_EQ(kernel_of_rank(row, 1).dim(), 2);
}

TEST(Limit, ConstantSequence) {
  SubspaceSequence seq;
  for (int i = 0; i < 10; ++i) seq.push(span({vec({1, 0})}));
  auto r = grassmann_limit(seq);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.residual, 0.0);
}

TEST(Limit, HarmonicTilt) {
  SubspaceSequence seq;
  for (int i = 1; i <= 50; ++i) seq.push(span({vec({1, 1.0 / i})}));
  auto r = grassmann_limit(seq, 5, 1e-2);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(grassmann_distance(r.limit, span({vec({1, 0})})), std::atan(1.0 / 50) + 1e-12);
  EXPECT_FALSE(grassmann_limit(seq, 5, 1e-4).converged);
}

TEST(Limit, Alternating) {
  SubspaceSequence seq;
  for (int i = 0; i < 20; ++i) seq.push(span({i % 2 ? vec({0, 1}) : vec({1, 0})}));
  auto r = grassmann_limit(seq);
  EXPECT_FALSE(r.converged);
  EXPECT_NEAR(r.residual, kPi / 2, 1e-15);
  EXPECT_FALSE(r.residual_history.empty());
}

TEST(Limit, DimensionDriftIsHardError) {
  SubspaceSequence seq;
  seq.push(span({vec({1, 0, 0})}));
  seq.push(span({vec({1, 0, 0}), vec({0, 1, 0})}));
  EXPECT_THROW(grassmann_limit(seq), DimensionError);
}

TEST(Limit, BasisIndependent) {
  Rng rng(9);
  SubspaceSequence a, b;
  for (int i = 1; i <= 30; ++i) {
    MatrixXd m(4, 2);
    m << 1, 0, 0, 1, 1.0 / i, 0, 0, 1.0 / (i * i);
    auto s = span_of(m);
    a.push(s);
    MatrixXd q = Eigen::HouseholderQR<MatrixXd>(MatrixXd::Random(2, 2)).householderQ();
    b.push(Subspace::from_orthonormal(s.basis() * q));
  }
  auto ra = grassmann_limit(a, 5, 0.05);
  auto rb = grassmann_limit(b, 5, 0.05);
  EXPECT_EQ(ra.converged, rb.converged);
  EXPECT_NEAR(ra.residual, rb.residual, 1e-12);
}
