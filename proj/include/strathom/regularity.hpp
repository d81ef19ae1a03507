#pragma once

// Regularity checkers at declared incidence points: Whitney (a), Thom (a_f),
// (t_f) and (a_f^s). Failures carry replayable witnesses; "holds" always
// means "holds on the sampled arcs or radii".

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "strathom/dsl.hpp"
#include "strathom/error.hpp"
#include "strathom/grassmann.hpp"
#include "strathom/random.hpp"
#include "strathom/strata.hpp"

namespace strathom {

enum class Condition { a, af, tf, afs };
enum class Status { holds, fails, inconclusive };

inline const char* to_string(Condition c) {
  switch (c) {
    case Condition::a: return "a";
    case Condition::af: return "af";
    case Condition::tf: return "tf";
    case Condition::afs: return "afs";
  }
  return "?";
}

inline const char* to_string(Status s) {
  switch (s) {
    case Status::holds: return "holds-on-samples";
    case Status::fails: return "fails-with-witness";
    case Status::inconclusive: return "inconclusive";
  }
  return "?";
}

/// "holds" / "fails" as used for expected verdicts in scenes.
inline const char* short_name(Status s) {
  switch (s) {
    case Status::holds: return "holds";
    case Status::fails: return "fails";
    case Status::inconclusive: return "inconclusive";
  }
  return "?";
}

inline Condition parse_condition(const std::string& s) {
  if (s == "a") return Condition::a;
  if (s == "af") return Condition::af;
  if (s == "tf") return Condition::tf;
  if (s == "afs") return Condition::afs;
  throw PreconditionError("unknown condition '" + s + "'");
}

struct ArcEvidence {
  std::size_t chart = 0;
  VectorXd base;
  VectorXd direction;
  double ratio = 0.0;
  std::size_t first_index = 0;
  std::size_t count = 0;
  double final_distance = 0.0;
  bool converged = false;
  double residual = 0.0;
  Subspace tau;
  /// Largest angle between the required subspace and tau.
  double angle = 0.0;
  VectorXd worst;
  bool contained = false;
};

struct RadiusEvidence {
  double radius = 0.0;
  std::size_t samples = 0;
  std::size_t bad = 0;
  /// First offending X-point, if any.
  VectorXd witness;
  Index witness_defect = 0;
};

struct RegularityVerdict {
  Condition condition = Condition::af;
  std::string x;
  std::string y;
  VectorXd point;
  Status status = Status::inconclusive;
  Subspace required;
  std::vector<ArcEvidence> arcs;
  std::size_t rejected_arcs = 0;
  std::optional<std::size_t> witness_arc;
  VectorXd witness_vector;
  double witness_angle = 0.0;
  std::vector<RadiusEvidence> radii;
  std::string note;
};

// ---------------------------------------------------------------------------
// Transversality

struct Transversality {
  bool transverse = false;
  Index defect = 0;
};

/// Dg_image + leaf = R^n.
inline Transversality transverse_at(const Subspace& image, const Subspace& leaf, Index n) {
  if (image.ambient_dim() != n || leaf.ambient_dim() != n)
    throw DimensionError("transverse_at: subspaces are not in R^" + std::to_string(n));
  const Index d = subspace_sum(image, leaf).dim();
  return {d == n, n - d};
}

// ---------------------------------------------------------------------------
// Limit conditions (a) and (a_f)

namespace detail {

inline Subspace stratum_tangent_or_leaf(const StratifiedMapContext& ctx, const Stratum& s,
                                        const ChartPoint& cp, bool leaf) {
  return leaf ? leaf_tangent(ctx, s, cp) : tangent_space(s, cp);
}

/// Chart points of an arc, regenerated with the same arithmetic as approach_arcs.
inline std::vector<ChartPoint> arc_points(const ArcEvidence& a) {
  std::vector<ChartPoint> out;
  double scale = 1.0;
  for (std::size_t i = 1; i < a.first_index + a.count; ++i) {
    scale *= a.ratio;
    if (i >= a.first_index) out.push_back({a.chart, a.base + scale * a.direction});
  }
  return out;
}

inline void evaluate_arc(const StratifiedMapContext& ctx, const Stratum& x, bool leaf,
                         const Subspace& required, const ApproachPlan& plan, ArcEvidence& ev) {
  SubspaceSequence seq;
  for (const auto& cp : arc_points(ev)) seq.push(stratum_tangent_or_leaf(ctx, x, cp, leaf));
  const LimitReport lim = grassmann_limit(seq, plan.window, plan.limit_tol);
  ev.converged = lim.converged;
  ev.residual = lim.residual;
  ev.tau = lim.limit;
  const Containment c = contains(lim.limit, required, plan.angle_tol + lim.residual);
  ev.angle = c.angle;
  ev.worst = c.worst;
  ev.contained = c.holds;
}

inline RegularityVerdict check_limit_condition(const StratifiedMapContext& ctx, Condition cond,
                                               const std::string& xname, const std::string& yname,
                                               const VectorXd& y, const ApproachPlan& plan) {
  const bool leaf = cond == Condition::af;
  const Stratum& x = ctx.stratum(xname);
  const Stratum& ys = ctx.stratum(yname);
  RegularityVerdict v;
  v.condition = cond;
  v.x = xname;
  v.y = yname;
  v.point = y;
  const ChartPoint ycp = require_on_stratum(ys, y);
  v.required = stratum_tangent_or_leaf(ctx, ys, ycp, leaf);
  const ApproachSet set = approach_arcs(x, y, plan);
  v.rejected_arcs = set.rejected;
  if (set.arcs.empty()) {
    v.status = Status::inconclusive;
    v.note = "no approach arc of '" + xname + "' reaches the point";
    return v;
  }
  bool any_open = false;
  for (const auto& arc : set.arcs) {
    ArcEvidence ev;
    ev.chart = arc.chart;
    ev.base = arc.base;
    ev.direction = arc.direction;
    ev.ratio = plan.ratio;
    ev.first_index = arc.first_index;
    ev.count = arc.points.size();
    ev.final_distance = arc.distances.back();
    evaluate_arc(ctx, x, leaf, v.required, plan, ev);
    if (!ev.converged) {
      any_open = true;
    } else if (!ev.contained && (!v.witness_arc || ev.angle > v.witness_angle)) {
      v.witness_arc = v.arcs.size();
      v.witness_angle = ev.angle;
      v.witness_vector = ev.worst;
    }
    v.arcs.push_back(std::move(ev));
  }
  if (v.witness_arc)
    v.status = Status::fails;
  else if (any_open)
    v.status = Status::inconclusive;
  else
    v.status = Status::holds;
  if (v.required.dim() == 0) v.note = "required subspace is {0}";
  return v;
}

}  // namespace detail

inline RegularityVerdict check_af_at(const StratifiedMapContext& ctx, const std::string& x,
                                     const std::string& y, const VectorXd& point,
                                     const ApproachPlan& plan = {}) {
  return detail::check_limit_condition(ctx, Condition::af, x, y, point, plan);
}

inline RegularityVerdict check_whitney_a_at(const StratifiedMapContext& ctx, const std::string& x,
                                            const std::string& y, const VectorXd& point,
                                            const ApproachPlan& plan = {}) {
  return detail::check_limit_condition(ctx, Condition::a, x, y, point, plan);
}

struct ReplayResult {
  bool contained = false;
  bool converged = false;
  double angle = 0.0;
  double residual = 0.0;
};

/// Re-runs one stored arc from its chart data.
inline ReplayResult replay_arc(const StratifiedMapContext& ctx, Condition cond,
                               const std::string& x, const Subspace& required,
                               const ArcEvidence& stored, const ApproachPlan& plan) {
  ArcEvidence ev = stored;
  detail::evaluate_arc(ctx, ctx.stratum(x), cond == Condition::af, required, plan, ev);
  return {ev.contained, ev.converged, ev.angle, ev.residual};
}

struct PairVerdict {
  std::string x;
  std::string y;
  bool regular = true;
  bool no_incidences = true;
  std::vector<RegularityVerdict> points;
};

/// (a_f) over every declared incidence of the pair, in both directions.
inline PairVerdict check_af_pair(const StratifiedMapContext& ctx, const std::string& x,
                                 const std::string& y, const ApproachPlan& plan = {}) {
  PairVerdict pv;
  pv.x = x;
  pv.y = y;
  for (const auto& inc : ctx.strata().incidences) {
    if (!((inc.x == x && inc.y == y) || (inc.x == y && inc.y == x))) continue;
    pv.no_incidences = false;
    auto v = check_af_at(ctx, inc.x, inc.y, inc.point, plan);
    if (v.status != Status::holds) pv.regular = false;
    pv.points.push_back(std::move(v));
  }
  return pv;
}

// ---------------------------------------------------------------------------
// Sampling X near a point

/// Shrinking-radius sampling used by the (t_f) and (a_f^s) checkers.
struct RadiusPlan {
  double r0 = 0.5;
  double ratio = 0.5;
  std::size_t radii = 10;
  std::size_t samples = 200;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<ChartPoint> closure_bases(const Stratum& x, const VectorXd& y) {
  std::vector<ChartPoint> out;
  for (std::size_t ci = 0; ci < x.charts.size(); ++ci) {
    Stratum single{x.name, x.d, x.n, {x.charts[ci]}};
    LocateOptions opt;
    opt.closure = true;
    opt.seed = derive_seed(0x5eedULL, ci);
    auto loc = locate(single, y, opt);
    if (loc.found) out.push_back({ci, loc.where.u});
  }
  return out;
}

/// Chart points of X whose image lies within r of y.
inline std::vector<ChartPoint> sample_near(const Stratum& x, const std::vector<ChartPoint>& bases,
                                           const VectorXd& y, double r, std::size_t count,
                                           Rng& rng) {
  std::vector<ChartPoint> out;
  if (bases.empty()) return out;
  std::vector<double> scales;
  for (const auto& b : bases) {
    const MatrixXd j = x.charts[b.chart].map.jacobian_unchecked(b.u);
    const double norm = j.size() ? Eigen::JacobiSVD<MatrixXd>(j).singularValues()(0) : 1.0;
    scales.push_back(r / std::max(norm, 1e-12));
  }
  for (std::size_t k = 0; k < count * 20 && out.size() < count; ++k) {
    const std::size_t bi = k % bases.size();
    const auto& c = x.charts[bases[bi].chart];
    const VectorXd u = bases[bi].u + scales[bi] * ball_vector(rng, x.d);
    if (!c.map.in_domain(u)) continue;
    if ((c.map.eval(u) - y).norm() >= r) continue;
    out.push_back({bases[bi].chart, u});
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// (t_f)

struct SheetSample {
  ChartPoint on_x;
  VectorXd point;
  Subspace tangent;
};

/// Test submanifold S for (t_f): an implicit submanifold {h = 0}, the whole
/// space, or a sampled sheet through X-points (from the witness construction).
struct TestSubmanifold {
  enum class Kind { implicit, whole, sheet };
  Kind kind = Kind::whole;
  dsl::SmoothMap h;
  std::vector<SheetSample> sheet;
  Subspace tangent_at_base;
  std::string label;

  static TestSubmanifold whole_space(Index n) {
    TestSubmanifold s;
    s.kind = Kind::whole;
    s.tangent_at_base = Subspace::full(n);
    s.label = "R^" + std::to_string(n);
    return s;
  }

  static TestSubmanifold implicit_set(dsl::SmoothMap h, std::string label = {}) {
    TestSubmanifold s;
    s.kind = Kind::implicit;
    s.label = label.empty() ? "{" + h.to_string() + " = 0}" : std::move(label);
    s.h = std::move(h);
    return s;
  }

  Subspace tangent(const VectorXd& p) const {
    switch (kind) {
      case Kind::whole: return Subspace::full(p.size());
      case Kind::implicit: return kernel(h.jacobian(p));
      case Kind::sheet: break;
    }
    throw PreconditionError("sheet tangents are only known at sampled points");
  }
};

namespace detail {

/// Gauss-Newton in X's chart onto h(psi(u)) = 0 (minimum-norm steps).
inline bool project_onto_implicit(const Chart& c, const dsl::SmoothMap& h, VectorXd& u) {
  for (int it = 0; it < 40; ++it) {
    VectorXd x, hv;
    MatrixXd jpsi, jh;
    try {
      c.map.evaluate_unchecked(u, x, jpsi);
      h.evaluate_unchecked(x, hv, jh);
    } catch (const Error&) {
      return false;
    }
    if (hv.norm() < 1e-13) return true;
    const MatrixXd j = jh * jpsi;
    const VectorXd step = j.completeOrthogonalDecomposition().solve(hv);
    if (!step.allFinite()) return false;
    u -= step;
  }
  VectorXd x = c.map.eval_unchecked(u);
  return h.eval_unchecked(x).norm() < 1e-10;
}

}  // namespace detail

inline RegularityVerdict check_tf_at(const StratifiedMapContext& ctx, const std::string& xname,
                                     const std::string& yname, const VectorXd& y,
                                     const TestSubmanifold& s, const RadiusPlan& rp = {}) {
  const Stratum& x = ctx.stratum(xname);
  const Stratum& ys = ctx.stratum(yname);
  const Index n = x.n;
  RegularityVerdict v;
  v.condition = Condition::tf;
  v.x = xname;
  v.y = yname;
  v.point = y;
  v.note = s.label;
  const ChartPoint ycp = require_on_stratum(ys, y);
  v.required = leaf_tangent(ctx, ys, ycp);

  Subspace ty;
  if (s.kind == TestSubmanifold::Kind::implicit) {
    if (s.h.eval(y).norm() > 1e-9) throw PreconditionError("test submanifold does not pass through the point");
    ty = s.tangent(y);
  } else {
    ty = s.tangent_at_base;
  }
  const auto at_y = transverse_at(ty, v.required, n);
  if (!at_y.transverse)
    throw PreconditionError("test submanifold " + s.label + " is not transverse to the leaf of '" +
                            yname + "' at the point (defect " + std::to_string(at_y.defect) + ")");

  const auto bases = detail::closure_bases(x, y);
  if (bases.empty()) throw PreconditionError("point is not in the closure of '" + xname + "'");

  bool all_bad = true;
  double r = rp.r0;
  for (std::size_t j = 0; j < rp.radii; ++j, r *= rp.ratio) {
    RadiusEvidence ev;
    ev.radius = r;
    auto test_point = [&](const ChartPoint& cp, const VectorXd& p, const Subspace& tp) {
      ++ev.samples;
      const auto t = transverse_at(tp, leaf_tangent(ctx, x, cp), n);
      if (!t.transverse) {
        if (ev.bad == 0) {
          ev.witness = p;
          ev.witness_defect = t.defect;
        }
        ++ev.bad;
      }
    };
    if (s.kind == TestSubmanifold::Kind::sheet) {
      for (const auto& smp : s.sheet)
        if ((smp.point - y).norm() < r) test_point(smp.on_x, smp.point, smp.tangent);
    } else {
      Rng rng(derive_seed(rp.seed, "tf/" + xname + "/" + std::to_string(j)));
      const auto pts = detail::sample_near(x, bases, y, r, rp.samples * 4, rng);
      for (const auto& cp0 : pts) {
        if (ev.samples >= rp.samples) break;
        ChartPoint cp = cp0;
        const auto& c = x.charts[cp.chart];
        if (s.kind == TestSubmanifold::Kind::implicit &&
            !detail::project_onto_implicit(c, s.h, cp.u))
          continue;
        if (!c.map.in_domain(cp.u)) continue;
        const VectorXd p = c.map.eval(cp.u);
        if ((p - y).norm() >= r) continue;
        test_point(cp, p, s.tangent(p));
      }
    }
    const bool bad = ev.bad > 0;
    const bool clean = ev.samples > 0 && !bad;
    if (!bad) all_bad = false;
    v.radii.push_back(ev);
    if (clean) {
      v.status = Status::holds;
      return v;
    }
  }
  v.status = all_bad ? Status::fails : Status::inconclusive;
  if (v.status == Status::inconclusive) v.note += "; some radii had no sample on S";
  return v;
}

// ---------------------------------------------------------------------------
// (a_f^s)

/// Affine orthogonal projection onto y + L, as DSL text.
inline std::string affine_projection_source(const VectorXd& y, const Subspace& l) {
  const MatrixXd p = l.projector();
  const Index n = y.size();
  std::string out;
  for (Index i = 0; i < n; ++i) {
    std::string comp = dsl::format_number(y(i));
    for (Index j = 0; j < n; ++j) {
      if (p(i, j) == 0.0) continue;
      comp += " + " + dsl::format_number(p(i, j)) + "*(x" + std::to_string(j + 1) + " - " +
              dsl::format_number(y(j)) + ")";
    }
    out += (i ? ", " : "") + comp;
  }
  return out;
}

struct RetractionCheck {
  double idempotence = 0.0;
  double leaf_fixing = 0.0;
  std::size_t leaf_points = 0;
};

/// Samples points of the Y-leaf through y by walking along the chart kernel
/// of f o psi and Newton-correcting back to the level set.
inline std::vector<VectorXd> sample_leaf_points(const StratifiedMapContext& ctx, const Stratum& ys,
                                                const ChartPoint& ycp, std::size_t count,
                                                double spread, Rng& rng) {
  std::vector<VectorXd> out;
  const auto& c = ys.charts[ycp.chart];
  const Index r = ctx.rank(ys.name).rank;
  VectorXd y0;
  MatrixXd jpsi;
  c.map.evaluate_unchecked(ycp.u, y0, jpsi);
  const VectorXd f0 = ctx.f().eval(y0);
  const MatrixXd jfpsi = ctx.f().jacobian(y0) * jpsi;
  const Subspace k = kernel_of_rank(jfpsi, r);
  if (k.dim() == 0) return {y0};
  for (std::size_t t = 0; t < count * 4 && out.size() < count; ++t) {
    VectorXd u = ycp.u + spread * (k.basis() * ball_vector(rng, k.dim()));
    bool ok = true;
    for (int it = 0; it < 30 && ok; ++it) {
      VectorXd x;
      MatrixXd jp;
      try {
        c.map.evaluate_unchecked(u, x, jp);
        const VectorXd resid = ctx.f().eval(x) - f0;
        if (resid.norm() < 1e-14) break;
        const MatrixXd j = ctx.f().jacobian(x) * jp;
        u -= j.completeOrthogonalDecomposition().solve(resid);
      } catch (const Error&) {
        ok = false;
      }
    }
    if (!ok || !c.map.in_domain(u)) continue;
    const VectorXd x = c.map.eval(u);
    if ((ctx.f().eval(x) - f0).norm() > 1e-10) continue;
    out.push_back(x);
  }
  return out;
}

/// Validates a local retraction onto the Y-leaf through y.
inline RetractionCheck validate_retraction(const StratifiedMapContext& ctx, const Stratum& ys,
                                           const ChartPoint& ycp, const VectorXd& y,
                                           const dsl::SmoothMap& pi, std::uint64_t seed,
                                           double tol = 1e-8) {
  if (static_cast<Index>(pi.input_dim()) != y.size() || static_cast<Index>(pi.output_dim()) != y.size())
    throw ValidationError("retraction must map R^n to R^n");
  RetractionCheck rc;
  Rng rng(derive_seed(seed, "retraction/" + ys.name));
  for (int k = 0; k < 32; ++k) {
    const VectorXd p = y + 0.1 * ball_vector(rng, y.size());
    const VectorXd q = pi.eval(p);
    rc.idempotence = std::max(rc.idempotence, (pi.eval(q) - q).norm());
  }
  const auto leaf_pts = sample_leaf_points(ctx, ys, ycp, 32, 0.2, rng);
  rc.leaf_points = leaf_pts.size();
  for (const auto& p : leaf_pts) rc.leaf_fixing = std::max(rc.leaf_fixing, (pi.eval(p) - p).norm());
  rc.leaf_fixing = std::max(rc.leaf_fixing, (pi.eval(y) - y).norm());
  if (rc.idempotence > tol)
    throw ValidationError("retraction is not idempotent near the point (defect " +
                          std::to_string(rc.idempotence) + ")");
  if (rc.leaf_fixing > tol)
    throw ValidationError("retraction moves points of the leaf through the point (by " +
                          std::to_string(rc.leaf_fixing) + ")");
  return rc;
}

inline RegularityVerdict check_afs_at(const StratifiedMapContext& ctx, const std::string& xname,
                                      const std::string& yname, const VectorXd& y,
                                      const std::optional<dsl::SmoothMap>& retraction = std::nullopt,
                                      const RadiusPlan& rp = {}) {
  const Stratum& x = ctx.stratum(xname);
  const Stratum& ys = ctx.stratum(yname);
  RegularityVerdict v;
  v.condition = Condition::afs;
  v.x = xname;
  v.y = yname;
  v.point = y;
  const ChartPoint ycp = require_on_stratum(ys, y);
  v.required = leaf_tangent(ctx, ys, ycp);
  const Index need = v.required.dim();
  if (need == 0) {
    v.status = Status::holds;
    v.note = "leaf through the point is a point; rank requirement is vacuous";
    return v;
  }
  const dsl::SmoothMap pi = retraction ? *retraction
                                       : dsl::parse_map(affine_projection_source(y, v.required),
                                                        static_cast<std::size_t>(y.size()));
  v.note = retraction ? "declared retraction" : "affine projection onto the leaf tangent";
  validate_retraction(ctx, ys, ycp, y, pi, rp.seed);

  const auto bases = detail::closure_bases(x, y);
  if (bases.empty()) throw PreconditionError("point is not in the closure of '" + xname + "'");
  bool all_bad = true;
  double r = rp.r0;
  for (std::size_t j = 0; j < rp.radii; ++j, r *= rp.ratio) {
    RadiusEvidence ev;
    ev.radius = r;
    Rng rng(derive_seed(rp.seed, "afs/" + xname + "/" + std::to_string(j)));
    for (const auto& cp : detail::sample_near(x, bases, y, r, rp.samples, rng)) {
      const VectorXd p = stratum_point(x, cp);
      const Subspace leaf = leaf_tangent(ctx, x, cp);
      const MatrixXd image = pi.jacobian(p) * leaf.basis();
      const Index rank = numerical_rank(image);
      ++ev.samples;
      if (rank < need) {
        if (ev.bad == 0) {
          ev.witness = p;
          ev.witness_defect = need - rank;
        }
        ++ev.bad;
      }
    }
    const bool bad = ev.bad > 0;
    if (!bad) all_bad = false;
    const bool clean = ev.samples > 0 && !bad;
    v.radii.push_back(ev);
    if (clean) {
      v.status = Status::holds;
      return v;
    }
  }
  v.status = all_bad ? Status::fails : Status::inconclusive;
  return v;
}

}  // namespace strathom
