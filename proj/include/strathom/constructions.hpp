#pragma once

// Explicit constructions: the smooth step, a rank-dropping bijection,
// complements spoiling transversality, destabilizing sequences and the
// (t_f) witness sheet.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "strathom/dsl.hpp"
#include "strathom/error.hpp"
#include "strathom/grassmann.hpp"
#include "strathom/random.hpp"
#include "strathom/regularity.hpp"
#include "strathom/strata.hpp"

namespace strathom {

// ---------------------------------------------------------------------------
// Smooth step

/// gamma(a) = phi(a) / (phi(a) + phi(1 - a)), phi(t) = exp(-1/t) for t > 0.
inline double bump_gamma(double a) {
  auto phi = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  if (a <= 0.0) return 0.0;
  if (a >= 1.0) return 1.0;
  const double p = phi(a), q = phi(1.0 - a);
  return p / (p + q);
}

/// gamma'(a) by forward-mode differentiation of the DSL primitive.
inline double bump_gamma_derivative(double a) {
  static const dsl::SmoothMap g = dsl::parse_map("bump(x1)", 1);
  Eigen::VectorXd x(1);
  x(0) = a;
  return g.jacobian(x)(0, 0);
}

// ---------------------------------------------------------------------------
// Rank-drop bijection

namespace detail {

inline std::string var(Index i) { return "x" + std::to_string(i + 1); }

inline std::string shifted(Index i, const VectorXd& c, double radius) {
  return "((" + var(i) + " - " + dsl::format_number(c(i)) + ")/" + dsl::format_number(radius) + ")";
}

}  // namespace detail

/// g = phi^-1 o h o phi with phi(z) = (z - c)/R and
/// h(a) = (a_1..a_r, a_{r+1} gamma(|a|^2), ..., a_n gamma(|a|^2)).
struct RankDropMap {
  Index n = 0;
  Index r = 0;
  VectorXd center;
  double radius = 1.0;
  std::string source;
  dsl::SmoothMap map;

  VectorXd chart(const VectorXd& z) const { return (z - center) / radius; }
  VectorXd eval(const VectorXd& z) const { return map.eval(z); }
  MatrixXd jacobian(const VectorXd& z) const { return map.jacobian(z); }

  /// h in chart coordinates, evaluated directly (oracle for the DSL form).
  VectorXd h(const VectorXd& a) const {
    VectorXd out = a;
    const double g = bump_gamma(a.squaredNorm());
    for (Index i = r; i < n; ++i) out(i) = a(i) * g;
    return out;
  }

  /// Preimage by bisection on the radial factor s -> s gamma(|a_par|^2 + s^2).
  VectorXd preimage(const VectorXd& target) const {
    const VectorXd b = chart(target);
    VectorXd a = b;
    const VectorXd perp = b.tail(n - r);
    const double bn = perp.norm();
    if (bn == 0.0) return target;
    const double par2 = b.head(r).squaredNorm();
    double lo = 0.0, hi = std::max(1.0, bn) + 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid * bump_gamma(par2 + mid * mid) < bn)
        lo = mid;
      else
        hi = mid;
    }
    a.tail(n - r) = perp * (0.5 * (lo + hi) / bn);
    return center + radius * a;
  }
};

inline RankDropMap rank_drop_map(Index n, Index r, VectorXd center = {}, double radius = 1.0) {
  if (n < 2) throw PreconditionError("rank_drop_map needs n >= 2");
  if (r < 1 || r >= n) throw PreconditionError("rank_drop_map needs 1 <= r < n");
  if (n > static_cast<Index>(dsl::kMaxVars)) throw DimensionError("rank_drop_map: n too large");
  if (center.size() == 0) center = VectorXd::Zero(n);
  if (center.size() != n) throw DimensionError("rank_drop_map: center has the wrong dimension");
  if (!(radius > 0.0)) throw PreconditionError("rank_drop_map: radius must be positive");
  RankDropMap m;
  m.n = n;
  m.r = r;
  m.center = center;
  m.radius = radius;
  std::string q;
  for (Index i = 0; i < n; ++i) q += (i ? " + " : "") + detail::shifted(i, center, radius) + "^2";
  for (Index i = 0; i < n; ++i) {
    if (i) m.source += ", ";
    if (i < r) {
      m.source += detail::var(i);
    } else {
      m.source += dsl::format_number(center(i)) + " + " + dsl::format_number(radius) + "*" +
                  detail::shifted(i, center, radius) + "*bump(" + q + ")";
    }
  }
  m.map = dsl::parse_map(m.source, static_cast<std::size_t>(n));
  return m;
}

struct InjectivityProbe {
  std::size_t pairs = 0;
  std::size_t collisions = 0;
  double min_image_gap = std::numeric_limits<double>::infinity();
};

/// Seeded pairs in the box [c - 1.5R, c + 1.5R]^n; a collision is a pair of
/// distinct points whose images agree within tol.
inline InjectivityProbe probe_injectivity(const RankDropMap& m, std::size_t pairs,
                                          std::uint64_t seed, double tol = 1e-9) {
  Rng rng(derive_seed(seed, "injectivity"));
  InjectivityProbe out;
  VectorXd a(m.n), b(m.n);
  for (std::size_t k = 0; k < pairs; ++k) {
    for (Index i = 0; i < m.n; ++i) {
      a(i) = m.center(i) + m.radius * uniform(rng, -1.5, 1.5);
      b(i) = m.center(i) + m.radius * uniform(rng, -1.5, 1.5);
    }
    if ((a - b).norm() <= tol) continue;
    ++out.pairs;
    const double gap = (m.h(m.chart(a)) - m.h(m.chart(b))).norm() * m.radius;
    out.min_image_gap = std::min(out.min_image_gap, gap);
    if (gap <= tol) ++out.collisions;
  }
  return out;
}

/// s -> s gamma(p + s^2) is strictly increasing on s > 0 wherever it is
/// positive; checked on a grid for several p.
inline bool radial_factor_monotone(std::size_t grid = 2000) {
  for (double p : {0.0, 0.1, 0.5, 0.9}) {
    double prev = 0.0;
    for (std::size_t k = 1; k <= grid; ++k) {
      const double s = 1.5 * static_cast<double>(k) / static_cast<double>(grid);
      const double v = s * bump_gamma(p + s * s);
      if (v < prev || (prev > 0.0 && v == prev)) return false;
      prev = v;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Complements and rotations

/// H with H (+) leafY = R^n and H + tau != R^n. With eta the part of v
/// orthogonal to tau, H is the orthogonal complement of leafY /\ eta^perp
/// inside eta^perp; H and tau then both lie in eta^perp.
inline Subspace choose_complement_H(const Subspace& tau, const Subspace& leaf_y, const VectorXd& v,
                                    Index n) {
  if (tau.ambient_dim() != n || leaf_y.ambient_dim() != n || v.size() != n)
    throw DimensionError("choose_complement_H: inconsistent dimensions");
  if (v.norm() == 0.0) throw PreconditionError("choose_complement_H: v is zero");
  const VectorXd vu = v.normalized();
  if (!contains(leaf_y, span_of({vu}, n)).holds)
    throw PreconditionError("choose_complement_H: v is not in the leaf of Y");
  const VectorXd eta = vu - tau.projector() * vu;
  if (eta.norm() <= std::sin(kAngleTol))
    throw PreconditionError("choose_complement_H: v lies in tau (no fault)");
  const VectorXd e = eta.normalized();
  const Subspace hyper = kernel(e.transpose());
  const Subspace common = subspace_intersection(leaf_y, hyper);
  MatrixXd inside = hyper.basis();
  if (common.dim() > 0) inside -= common.projector() * inside;
  const Subspace h = span_of(inside);
  if (h.dim() != n - leaf_y.dim() || subspace_sum(h, leaf_y).dim() != n ||
      subspace_sum(h, tau).dim() == n)
    throw ConstructionFailure("choose_complement_H: degenerate configuration (angle of v from tau " +
                              std::to_string(std::asin(std::min(1.0, eta.norm()))) + " rad)");
  return h;
}

/// Rotation acting in the principal planes of (from, to), carrying from onto to.
inline MatrixXd least_rotation(const Subspace& from, const Subspace& to) {
  require_same_ambient(from, to);
  if (from.dim() != to.dim()) throw DimensionError("least_rotation: dimensions differ");
  const Index n = from.ambient_dim();
  MatrixXd rot = MatrixXd::Identity(n, n);
  if (from.dim() == 0) return rot;
  Eigen::JacobiSVD<MatrixXd> svd(from.basis().transpose() * to.basis(),
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
  const MatrixXd p = from.basis() * svd.matrixU();
  const MatrixXd q = to.basis() * svd.matrixV();
  for (Index j = 0; j < from.dim(); ++j) {
    const double c = std::clamp(svd.singularValues()(j), -1.0, 1.0);
    VectorXd w = q.col(j) - c * p.col(j);
    const double s = w.norm();
    if (s < 1e-15) continue;
    w /= s;
    const VectorXd pj = p.col(j);
    rot += (c - 1.0) * (pj * pj.transpose() + w * w.transpose()) +
           s * (w * pj.transpose() - pj * w.transpose());
  }
  return rot;
}

// ---------------------------------------------------------------------------
// Destabilizing sequence

/// An (a_f) fault: points x_i of X converging to y with leaves converging
/// to tau, and v in the leaf of Y at y outside tau.
struct FaultWitness {
  std::string x;
  std::string y_stratum;
  VectorXd y;
  std::vector<ChartPoint> chart_points;
  std::vector<VectorXd> xs;
  std::vector<Subspace> leaves;
  Subspace tau;
  Subspace leaf_y;
  VectorXd v;
};

/// Witness data from a fails-with-witness (a_f) verdict.
inline FaultWitness fault_witness(const StratifiedMapContext& ctx, const RegularityVerdict& af) {
  if (af.condition != Condition::af || af.status != Status::fails || !af.witness_arc)
    throw PreconditionError("no (a_f) fault witness");
  const ArcEvidence& arc = af.arcs.at(*af.witness_arc);
  const Stratum& xs = ctx.stratum(af.x);
  FaultWitness w;
  w.x = af.x;
  w.y_stratum = af.y;
  w.y = af.point;
  w.tau = arc.tau;
  w.leaf_y = af.required;
  w.v = af.witness_vector;
  for (const auto& cp : detail::arc_points(arc)) {
    w.chart_points.push_back(cp);
    w.xs.push_back(stratum_point(xs, cp));
    w.leaves.push_back(leaf_tangent(ctx, xs, cp));
  }
  return w;
}

struct DestabilizerTerm {
  std::size_t i = 0;
  VectorXd x;
  Subspace leaf;
  Subspace h_i;
  std::string source;
  dsl::SmoothMap map;
  /// |g_i(y) - x_i|
  double value_error = 0.0;
  /// Angle between image d(g_i)_y and H_i.
  double image_angle = 0.0;
  Transversality at_x;
  double c1_distance = 0.0;
};

struct DestabilizerSequence {
  std::string base_source;
  dsl::SmoothMap base;
  VectorXd source_point;
  Subspace h;
  FaultWitness witness;
  double radius = 0.5;
  /// Points of the localization ball used for C^1 distances.
  std::vector<VectorXd> probe;
  std::vector<DestabilizerTerm> terms;
};

namespace detail {

inline std::string linear_combination(const MatrixXd& m, Index row, const VectorXd& at) {
  std::string s;
  for (Index j = 0; j < m.cols(); ++j) {
    if (m(row, j) == 0.0) continue;
    s += " + " + dsl::format_number(m(row, j)) + "*(" + var(j) + " - " + dsl::format_number(at(j)) + ")";
  }
  return s;
}

/// Cutoff beta(|z - y|^2 / R^2): 1 for |z - y| <= R/2, 0 for |z - y| >= R.
inline std::string cutoff_source(const VectorXd& y, double radius) {
  std::string q;
  for (Index i = 0; i < y.size(); ++i)
    q += (i ? " + " : "") + std::string("(") + var(i) + " - " + dsl::format_number(y(i)) + ")^2";
  return "(1 - bump(((" + q + ")/" + dsl::format_number(radius * radius) + " - 0.25)/0.75))";
}

inline double c1_sup(const dsl::SmoothMap& delta, const std::vector<VectorXd>& pts) {
  double sup = 0.0;
  VectorXd v;
  MatrixXd j;
  for (const auto& z : pts) {
    delta.evaluate_unchecked(z, v, j);
    sup = std::max(sup, v.norm() + j.norm());
  }
  return sup;
}

}  // namespace detail

/// Term i: g_i = g + beta * [(x_i - g(y)) + (L_i - I) dg_y (z - y)], where
/// L_i is the least rotation carrying tau to the leaf at x_i and H_i = L_i H.
inline DestabilizerTerm destabilizer_term(const DestabilizerSequence& seq, std::size_t i) {
  const auto& w = seq.witness;
  if (i >= w.xs.size()) throw PreconditionError("destabilizer index beyond the witness");
  const VectorXd& y = seq.source_point;
  const Index m = y.size();
  VectorXd gy;
  MatrixXd b;
  seq.base.evaluate_unchecked(y, gy, b);
  DestabilizerTerm t;
  t.i = i;
  t.x = w.xs[i];
  if ((t.x - gy).norm() == 0.0) throw PreconditionError("x_i coincides with g(y)");
  t.leaf = w.leaves[i];
  const MatrixXd rot = least_rotation(w.tau, t.leaf);
  t.h_i = span_of(rot * seq.h.basis());
  const VectorXd shift = t.x - gy;
  const MatrixXd lin = (rot - MatrixXd::Identity(rot.rows(), rot.cols())) * b;
  const std::string beta = detail::cutoff_source(y, seq.radius);
  std::string delta;
  const auto base_parts = dsl::parse_list(seq.base_source, static_cast<std::size_t>(m));
  for (Index k = 0; k < shift.size(); ++k) {
    const std::string dk =
        beta + "*(" + dsl::format_number(shift(k)) + detail::linear_combination(lin, k, y) + ")";
    delta += (k ? ", " : "") + dk;
    t.source += (k ? ", " : "") + std::string("(") + dsl::print(base_parts[static_cast<std::size_t>(k)]) +
                ") + " + dk;
  }
  t.map = dsl::parse_map(t.source, static_cast<std::size_t>(m));
  VectorXd gi;
  MatrixXd ji;
  t.map.evaluate_unchecked(y, gi, ji);
  t.value_error = (gi - t.x).norm();
  t.image_angle = grassmann_distance(span_of(ji), t.h_i);
  if (t.value_error > 1e-10 || t.image_angle > 1e-8)
    throw ConstructionFailure("destabilizer term " + std::to_string(i) +
                              " misses its target (value error " + std::to_string(t.value_error) +
                              ", image angle " + std::to_string(t.image_angle) + ")");
  t.at_x = transverse_at(t.h_i, t.leaf, t.x.size());
  t.c1_distance = detail::c1_sup(dsl::parse_map(delta, static_cast<std::size_t>(m)), seq.probe);
  return t;
}

/// Base g with g(source_point) = y and image d(g) = H; terms for the first
/// `count` witness points.
inline DestabilizerSequence destabilizing_sequence(const std::string& base_source,
                                                   const VectorXd& source_point,
                                                   const FaultWitness& witness, const Subspace& h,
                                                   double radius, std::size_t count,
                                                   std::uint64_t seed, std::size_t probe_points = 10000) {
  if (!(radius > 0.0)) throw PreconditionError("localization radius must be positive");
  DestabilizerSequence seq;
  seq.base_source = base_source;
  seq.base = dsl::parse_map(base_source, static_cast<std::size_t>(source_point.size()));
  seq.source_point = source_point;
  seq.h = h;
  seq.witness = witness;
  seq.radius = radius;
  VectorXd gy;
  MatrixXd b;
  seq.base.evaluate_unchecked(source_point, gy, b);
  if ((gy - witness.y).norm() > 1e-10) throw PreconditionError("base map does not send the source point to y");
  if (grassmann_distance(span_of(b), h) > 1e-8) throw PreconditionError("image of the base differential is not H");
  Rng rng(derive_seed(seed, "destabilizer/probe"));
  for (std::size_t k = 0; k < probe_points; ++k)
    seq.probe.push_back(source_point + radius * ball_vector(rng, source_point.size()));
  const std::size_t n = std::min(count, witness.xs.size());
  for (std::size_t i = 0; i < n; ++i) seq.terms.push_back(destabilizer_term(seq, i));
  return seq;
}

/// g = y + A h(z - c) with h a rank-drop map of rank dim H at c and A sending
/// the first dim H axes onto H (an explicit linear change of coordinates).
inline std::string rank_drop_base_source(const Subspace& h, const VectorXd& y, double chart_radius) {
  const Index n = h.ambient_dim();
  const Index r = h.dim();
  const auto rd = rank_drop_map(n, r, VectorXd::Zero(n), chart_radius);
  MatrixXd a(n, n);
  a.leftCols(r) = h.basis();
  a.rightCols(n - r) = kernel(h.basis().transpose()).basis();
  const auto parts = dsl::parse_list(rd.source, static_cast<std::size_t>(n));
  std::string out;
  for (Index k = 0; k < n; ++k) {
    std::string comp = dsl::format_number(y(k));
    for (Index j = 0; j < n; ++j)
      if (a(k, j) != 0.0)
        comp += " + " + dsl::format_number(a(k, j)) + "*(" + dsl::print(parts[static_cast<std::size_t>(j)]) + ")";
    out += (k ? ", " : "") + comp;
  }
  return out;
}

// ---------------------------------------------------------------------------
// (t_f) witness

/// A chart curve t -> psi(base + t direction) into X, t in (0, 1].
struct ArcCurve {
  std::size_t chart = 0;
  VectorXd base;
  VectorXd direction;
};

struct WitnessFrame {
  double t = 0.0;
  bool reflected = false;
  ChartPoint on_x;
  VectorXd point;
  VectorXd v_t;
  Subspace p_t;
  Subspace sigma;
  Subspace tangent;
  Subspace leaf;
  /// Angle of the leaf tangent from T S (containment when below tolerance).
  double containment = 0.0;
};

struct TfWitness {
  std::string x;
  std::string y_stratum;
  VectorXd y;
  VectorXd v;
  Subspace tau;
  Subspace sigma0;
  Subspace tangent_at_y;
  std::vector<WitnessFrame> frames;

  /// The sheet as a (t_f) test submanifold (unreflected half, which meets X).
  TestSubmanifold as_test() const {
    TestSubmanifold s;
    s.kind = TestSubmanifold::Kind::sheet;
    s.tangent_at_base = tangent_at_y;
    s.label = "witness sheet";
    for (const auto& f : frames)
      if (!f.reflected) s.sheet.push_back({f.on_x, f.point, f.tangent});
    return s;
  }
};

namespace detail {

/// sigma = P (+) (P (+) <v_t>)^perp inside N.
inline Subspace witness_sigma(const Subspace& normal, const Subspace& p, const VectorXd& vt) {
  const Subspace pv = subspace_sum(p, span_of({vt}, vt.size()));
  MatrixXd rest = normal.basis() - pv.projector() * normal.basis();
  return subspace_sum(p, span_of(rest));
}

/// Continue a frame onto a new subspace: project the old frame, re-orthonormalize.
inline Subspace continue_frame(const MatrixXd& prev, const Subspace& next, double t) {
  if (prev.cols() == 0) return next;
  const MatrixXd proj = next.projector() * prev;
  Eigen::JacobiSVD<MatrixXd> svd(proj, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (detail::rank_from_singular_values(svd.singularValues(), 1e-3) != prev.cols())
    throw ConstructionFailure("witness frame breaks at t = " + std::to_string(t));
  return Subspace::from_orthonormal(svd.matrixU() * svd.matrixV().transpose());
}

}  // namespace detail

inline TfWitness tf_witness(const StratifiedMapContext& ctx, const std::string& xname,
                            const std::string& yname, const VectorXd& y, const ArcCurve& arc,
                            const VectorXd& v, std::size_t samples = 48, double ratio = 0.8) {
  const Stratum& xs = ctx.stratum(xname);
  const Stratum& ys = ctx.stratum(yname);
  const Index n = xs.n;
  if (arc.chart >= xs.charts.size()) throw PreconditionError("arc chart index out of range");
  const Chart& c = xs.charts[arc.chart];
  if (arc.base.size() != xs.d || arc.direction.size() != xs.d)
    throw DimensionError("arc has the wrong chart dimension");
  if ((c.map.eval_unchecked(arc.base) - y).norm() > 1e-8) throw PreconditionError("arc does not start at y");

  TfWitness w;
  w.x = xname;
  w.y_stratum = yname;
  w.y = y;
  const Subspace leaf_y = leaf_tangent(ctx, ys, require_on_stratum(ys, y));
  if (v.size() != n || v.norm() == 0.0) throw PreconditionError("v must be a nonzero vector of R^n");
  w.v = v.normalized();
  if (!contains(leaf_y, span_of({w.v}, n)).holds)
    throw PreconditionError("v is not tangent to the leaf of Y at y");

  SubspaceSequence leaves;
  double t = 1.0;
  for (std::size_t k = 0; k < samples; ++k, t *= ratio) {
    const VectorXd u = arc.base + t * arc.direction;
    if (!c.map.in_domain(u)) throw PreconditionError("arc leaves the chart domain at t = " + std::to_string(t));
    leaves.push(leaf_tangent(ctx, xs, {arc.chart, u}), std::to_string(t));
  }
  const LimitReport lim = grassmann_limit(leaves);
  if (!lim.converged) throw PreconditionError("leaf tangents along the arc do not converge");
  w.tau = lim.limit;
  if (contains(w.tau, span_of({w.v}, n)).holds) throw PreconditionError("v lies in the limit tau (no fault)");

  // Sampled half-sheet along the arc, from t = 1 towards 0.
  t = 1.0;
  MatrixXd frame;
  for (std::size_t k = 0; k < samples; ++k, t *= ratio) {
    const VectorXd u = arc.base + t * arc.direction;
    WitnessFrame f;
    f.t = t;
    f.on_x = {arc.chart, u};
    VectorXd p;
    MatrixXd jpsi;
    c.map.evaluate_unchecked(u, p, jpsi);
    f.point = p;
    const VectorXd a = (jpsi * arc.direction).normalized();
    const Subspace normal = kernel(a.transpose());
    f.leaf = leaves.items[k];
    f.v_t = normal.projector() * w.v;
    f.p_t = subspace_intersection(normal, f.leaf);
    const Subspace sigma = detail::witness_sigma(normal, f.p_t, f.v_t);
    if (sigma.dim() != n - 2)
      throw ConstructionFailure("sigma(t) has dimension " + std::to_string(sigma.dim()) + " at t = " +
                                std::to_string(t));
    f.sigma = detail::continue_frame(frame, sigma, t);
    frame = f.sigma.basis();
    f.tangent = subspace_sum(f.sigma, span_of({a}, n));
    f.containment = contains(f.tangent, f.leaf).angle;
    w.frames.push_back(std::move(f));
  }

  // t = 0: N_0 from the arc tangent at the base point, P_0 from tau.
  const VectorXd a0 = (c.map.jacobian_unchecked(arc.base) * arc.direction).normalized();
  const Subspace n0 = kernel(a0.transpose());
  const VectorXd v0 = n0.projector() * w.v;
  const Subspace p0 = subspace_intersection(n0, w.tau);
  if (v0.norm() <= std::sin(kAngleTol)) throw ConstructionFailure("v_0 = 0: v is tangent to the arc at y");
  if (contains(p0, span_of({v0}, n)).holds) throw ConstructionFailure("v_0 lies in P_0");
  w.sigma0 = detail::witness_sigma(n0, p0, v0);
  w.tangent_at_y = subspace_sum(w.sigma0, span_of({a0}, n));

  // Mirror image of the half-sheet across the hyperplane y + N_0.
  const MatrixXd refl = MatrixXd::Identity(n, n) - 2.0 * a0 * a0.transpose();
  const std::size_t half = w.frames.size();
  for (std::size_t k = 0; k < half; ++k) {
    WitnessFrame f = w.frames[k];
    f.reflected = true;
    f.point = y + refl * (f.point - y);
    f.sigma = span_of(refl * f.sigma.basis());
    f.tangent = span_of(refl * f.tangent.basis());
    f.leaf = span_of(refl * f.leaf.basis());
    w.frames.push_back(std::move(f));
  }
  return w;
}

}  // namespace strathom
