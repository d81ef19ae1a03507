#pragma once

// Strata as parametrized submanifolds, prestratifications, the constant-rank
// certificate of a stratified map, and induced-foliation leaf tangents.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "strathom/dsl.hpp"
#include "strathom/error.hpp"
#include "strathom/grassmann.hpp"
#include "strathom/random.hpp"

namespace strathom {

/// One parametrization psi: U -> R^n of (part of) a stratum. U is the open
/// set cut out by the map's domain predicates; `lo`/`hi` bound it for sampling.
struct Chart {
  dsl::SmoothMap map;
  VectorXd lo;
  VectorXd hi;
};

struct Stratum {
  std::string name;
  Index d = 0;
  Index n = 0;
  std::vector<Chart> charts;
};

struct ChartPoint {
  std::size_t chart = 0;
  VectorXd u;
};

struct Incidence {
  std::string x;  ///< the stratum whose closure is examined
  std::string y;  ///< the stratum containing the point
  VectorXd point;
};

struct Prestratification {
  Index n = 0;
  std::vector<Stratum> strata;
  std::vector<Incidence> incidences;

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < strata.size(); ++i)
      if (strata[i].name == name) return i;
    throw ValidationError("unknown stratum '" + name + "'");
  }
  const Stratum& get(const std::string& name) const { return strata[index_of(name)]; }
};

inline Chart make_chart(const std::string& source, Index d, const std::vector<std::string>& domain,
                        VectorXd lo, VectorXd hi) {
  Chart c{dsl::parse_map(source, static_cast<std::size_t>(d), domain), std::move(lo),
          std::move(hi)};
  if (c.lo.size() != d || c.hi.size() != d)
    throw DimensionError("chart sampling box has the wrong dimension");
  return c;
}

inline Stratum make_stratum(std::string name, Index d, Index n, std::vector<Chart> charts) {
  Stratum s{std::move(name), d, n, std::move(charts)};
  if (s.charts.empty()) throw ValidationError("stratum '" + s.name + "' has no chart");
  for (const auto& c : s.charts) {
    if (static_cast<Index>(c.map.input_dim()) != d ||
        static_cast<Index>(c.map.output_dim()) != n)
      throw DimensionError("chart of stratum '" + s.name + "' is not a map R^" +
                           std::to_string(d) + " -> R^" + std::to_string(n));
    if (!c.map.is_smooth())
      throw ValidationError("chart of stratum '" + s.name + "' uses a non-smooth primitive");
  }
  return s;
}

inline VectorXd stratum_point(const Stratum& s, const ChartPoint& cp) {
  return s.charts.at(cp.chart).map.eval(cp.u);
}

/// Column span of the chart Jacobian.
inline Subspace tangent_space(const Stratum& s, const ChartPoint& cp) {
  const MatrixXd j = s.charts.at(cp.chart).map.jacobian(cp.u);
  Subspace t = span_of(j);
  if (t.dim() != s.d)
    throw ValidationError("immersion failure on stratum '" + s.name + "': rank " +
                          std::to_string(t.dim()) + " < " + std::to_string(s.d));
  return t;
}

// ---------------------------------------------------------------------------
// Sampling and point location

inline std::optional<VectorXd> sample_in_chart(const Chart& c, Rng& rng, int attempts = 2000) {
  const Index d = c.lo.size();
  for (int a = 0; a < attempts; ++a) {
    VectorXd u(d);
    for (Index i = 0; i < d; ++i) u(i) = uniform(rng, c.lo(i), c.hi(i));
    if (c.map.in_domain(u)) return u;
  }
  return std::nullopt;
}

/// Seeded domain samples, charts visited round-robin.
inline std::vector<ChartPoint> sample_stratum(const Stratum& s, std::size_t count, Rng& rng) {
  std::vector<ChartPoint> out;
  if (s.d == 0) {
    out.push_back({0, VectorXd(0)});
    return out;
  }
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t ci = k % s.charts.size();
    auto u = sample_in_chart(s.charts[ci], rng);
    if (!u) throw ValidationError("no domain point found in the sampling box of '" + s.name + "'");
    out.push_back({ci, *u});
  }
  return out;
}

struct LocateOptions {
  /// Accept base points on the boundary of the chart domain.
  bool closure = false;
  double tol = 1e-9;
  double closure_margin = 1e-7;
  int random_starts = 8;
  std::uint64_t seed = 0x10ca7e;
};

struct LocateResult {
  bool found = false;
  ChartPoint where;
  double residual = std::numeric_limits<double>::infinity();
};

namespace detail {

/// Levenberg-Marquardt on |psi(u) - p|^2. Returns the final residual.
inline double fit_chart(const dsl::SmoothMap& psi, VectorXd& u, const VectorXd& p,
                        int iterations = 200) {
  VectorXd value;
  MatrixXd jac;
  try {
    psi.evaluate_unchecked(u, value, jac);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
  VectorXd r = value - p;
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  const Index d = u.size();
  for (int it = 0; it < iterations && cost > 1e-30; ++it) {
    const MatrixXd a = jac.transpose() * jac;
    const VectorXd g = jac.transpose() * r;
    bool improved = false;
    while (lambda < 1e14) {
      MatrixXd damped = a;
      for (Index i = 0; i < d; ++i) damped(i, i) += lambda * (a(i, i) + 1e-12);
      const VectorXd step = damped.ldlt().solve(g);
      const VectorXd trial = u - step;
      VectorXd tv;
      MatrixXd tj;
      bool ok = true;
      try {
        psi.evaluate_unchecked(trial, tv, tj);
      } catch (const Error&) {
        ok = false;
      }
      const double tc = ok ? (tv - p).squaredNorm() : std::numeric_limits<double>::infinity();
      if (tc < cost) {
        const bool tiny = step.norm() <= 1e-16 * (1.0 + u.norm());
        u = trial;
        value = tv;
        jac = tj;
        r = tv - p;
        cost = tc;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = !tiny;
        break;
      }
      lambda *= 4.0;
    }
    if (!improved) break;
  }
  return std::sqrt(cost);
}

inline bool accept_location(const Chart& c, const VectorXd& u, const LocateOptions& opt) {
  if (!c.map.has_domain()) return true;
  if (!opt.closure) return c.map.in_domain(u);
  return c.map.domain_margin(u) >= -opt.closure_margin;
}

}  // namespace detail

/// Finds a chart preimage of `p`, from a grid of starts plus seeded random ones.
inline LocateResult locate(const Stratum& s, const VectorXd& p, const LocateOptions& opt = {}) {
  LocateResult best;
  if (p.size() != s.n) throw DimensionError("locate: point dimension mismatch");
  Rng rng(derive_seed(opt.seed, s.name));
  for (std::size_t ci = 0; ci < s.charts.size(); ++ci) {
    const Chart& c = s.charts[ci];
    const Index d = s.d;
    std::vector<VectorXd> starts;
    if (d == 0) {
      starts.emplace_back(0);
    } else {
      const int per = d <= 2 ? 3 : 2;
      Index total = 1;
      for (Index i = 0; i < d; ++i) total *= per;
      for (Index k = 0; k < total; ++k) {
        VectorXd u(d);
        Index rest = k;
        for (Index i = 0; i < d; ++i) {
          const double t = (static_cast<double>(rest % per) + 0.5) / per;
          rest /= per;
          u(i) = c.lo(i) + t * (c.hi(i) - c.lo(i));
        }
        starts.push_back(u);
      }
      for (int k = 0; k < opt.random_starts; ++k) {
        VectorXd u(d);
        for (Index i = 0; i < d; ++i) u(i) = uniform(rng, c.lo(i), c.hi(i));
        starts.push_back(u);
      }
    }
    for (auto& u : starts) {
      const double res = d == 0 ? (c.map.eval_unchecked(u) - p).norm()
                                : detail::fit_chart(c.map, u, p);
      if (!std::isfinite(res) || !detail::accept_location(c, u, opt)) continue;
      if (res < best.residual) {
        best.residual = res;
        best.where = {ci, u};
      }
      if (best.residual < opt.tol * 1e-3) break;
    }
  }
  best.found = best.residual < opt.tol;
  return best;
}

/// Distance from p to the closure of the stratum (as far as local fits find it).
inline double closure_distance(const Stratum& s, const VectorXd& p, std::uint64_t seed = 0x10ca7e) {
  LocateOptions opt;
  opt.closure = true;
  opt.seed = seed;
  return locate(s, p, opt).residual;
}

// ---------------------------------------------------------------------------
// Approach sequences

/// Plan for sampling sequences x_i -> y inside a stratum.
struct ApproachPlan {
  double ratio = 0.7;
  std::size_t terms = 50;
  /// Total arc directions per base point: 2d axis directions, the rest seeded.
  std::size_t directions = 8;
  std::vector<VectorXd> explicit_directions;
  std::size_t window = 5;
  double angle_tol = kAngleTol;
  double limit_tol = 1e-3;
  /// Required distance to y for the last term.
  double final_distance = 1e-7;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(ratio > 0.0 && ratio < 1.0))
      throw PreconditionError("approach ratio must lie strictly inside (0,1)");
    if (window < 2) throw PreconditionError("Cauchy window must be at least 2");
    if (terms < window) throw PreconditionError("term count must be at least the window");
  }
};

struct ApproachArc {
  std::size_t chart = 0;
  VectorXd base;
  VectorXd direction;
  /// Geometric exponent of the first kept term.
  std::size_t first_index = 0;
  std::vector<ChartPoint> points;
  std::vector<double> distances;
};

struct ApproachSet {
  std::vector<ApproachArc> arcs;
  /// Directions dropped because the arc left the domain or failed to approach y.
  std::size_t rejected = 0;
};

namespace detail {

inline std::vector<VectorXd> arc_directions(Index d, const ApproachPlan& plan, Rng& rng) {
  std::vector<VectorXd> out = plan.explicit_directions;
  for (Index i = 0; i < d; ++i) {
    for (double sgn : {1.0, -1.0}) {
      VectorXd e = VectorXd::Zero(d);
      e(i) = sgn;
      out.push_back(e);
    }
  }
  while (out.size() < plan.directions + plan.explicit_directions.size() || out.empty())
    out.push_back(unit_vector(rng, d));
  return out;
}

}  // namespace detail

inline constexpr double kGrazingRatio = 1e-3;

/// Geometric arcs u_i = u0 + rho^i w in every chart whose closure reaches y.
inline ApproachSet approach_arcs(const Stratum& x, const VectorXd& y, const ApproachPlan& plan) {
  plan.validate();
  if (x.d == 0) throw PreconditionError("a point stratum cannot approach another point");
  ApproachSet set;
  Rng rng(derive_seed(plan.seed, "approach/" + x.name));
  for (std::size_t ci = 0; ci < x.charts.size(); ++ci) {
    const Chart& c = x.charts[ci];
    Stratum single{x.name, x.d, x.n, {c}};
    LocateOptions opt;
    opt.closure = true;
    opt.seed = derive_seed(plan.seed, ci);
    const LocateResult base = locate(single, y, opt);
    if (!base.found) continue;
    const VectorXd u0 = base.where.u;
    for (const VectorXd& w : detail::arc_directions(x.d, plan, rng)) {
      if (w.size() != x.d) throw DimensionError("arc direction has the wrong dimension");
      ApproachArc arc;
      arc.chart = ci;
      arc.base = u0;
      arc.direction = w;
      double scale = 1.0;
      std::size_t i = 1;
      bool broken = false;
      for (; i <= plan.terms; ++i) {
        scale *= plan.ratio;
        const VectorXd u = u0 + scale * w;
        if (!c.map.in_domain(u)) {
          if (!arc.points.empty()) broken = true;
          if (broken) break;
          continue;
        }
        // Arcs that graze the domain boundary do not approach from inside.
        if (c.map.boundary_distance(u) < kGrazingRatio * scale * w.norm()) {
          broken = true;
          break;
        }
        if (arc.points.empty()) arc.first_index = i;
        arc.points.push_back({ci, u});
        arc.distances.push_back((c.map.eval(u) - y).norm());
      }
      bool ok = !broken && arc.points.size() >= plan.window &&
                arc.distances.back() < plan.final_distance;
      for (std::size_t k = 1; ok && k < arc.distances.size(); ++k)
        if (!(arc.distances[k] < arc.distances[k - 1])) ok = false;
      if (ok)
        set.arcs.push_back(std::move(arc));
      else
        ++set.rejected;
    }
  }
  return set;
}

/// A single approach sequence (the first admissible arc).
inline std::vector<ChartPoint> approach_sequence(const Stratum& x, const VectorXd& y,
                                                 const ApproachPlan& plan) {
  auto set = approach_arcs(x, y, plan);
  if (set.arcs.empty())
    throw ConstructionFailure("no arc of '" + x.name + "' approaches the point");
  return set.arcs.front().points;
}

// ---------------------------------------------------------------------------
// Stratified map context

struct RankCertificate {
  std::string stratum;
  Index rank = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  /// Smallest kept and largest dropped singular value over all samples.
  double smallest_kept = std::numeric_limits<double>::infinity();
  double largest_dropped = 0.0;
};

/// Rank of d(f o psi) with a relative cutoff and an absolute floor scaled by
/// the factor norms (cancellation in the product leaves ~eps residue).
inline Index composite_rank(const MatrixXd& jf, const MatrixXd& jpsi, VectorXd* sv = nullptr) {
  const MatrixXd m = jf * jpsi;
  if (m.size() == 0) return 0;
  const VectorXd s = Eigen::JacobiSVD<MatrixXd>(m).singularValues();
  if (sv) *sv = s;
  const double floor = 1e-10 * std::max(jf.norm() * jpsi.norm(), 1e-300);
  const double cut = std::max(kRankTol * s(0), floor);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  return r;
}

inline std::string format_point(const VectorXd& v) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ")";
  return os.str();
}

inline RankCertificate validate_constant_rank(const dsl::SmoothMap& f, const Stratum& s,
                                              std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw PreconditionError("constant-rank validation needs at least one sample");
  Rng rng(derive_seed(seed, "rank/" + s.name));
  const auto pts = sample_stratum(s, samples, rng);
  RankCertificate cert;
  cert.stratum = s.name;
  cert.samples = pts.size();
  cert.seed = seed;
  std::optional<VectorXd> first;
  for (const auto& cp : pts) {
    const auto& c = s.charts[cp.chart];
    VectorXd x;
    MatrixXd jpsi;
    c.map.evaluate_unchecked(cp.u, x, jpsi);
    const MatrixXd jf = f.jacobian(x);
    VectorXd sv;
    const Index r = composite_rank(jf, jpsi, &sv);
    if (!first) {
      first = x;
      cert.rank = r;
    } else if (r != cert.rank) {
      throw ConstantRankViolation("rank of f varies on stratum '" + s.name + "': " +
                                  std::to_string(cert.rank) + " at " + format_point(*first) +
                                  ", " + std::to_string(r) + " at " + format_point(x));
    }
    if (r > 0) cert.smallest_kept = std::min(cert.smallest_kept, sv(r - 1));
    if (r < sv.size()) cert.largest_dropped = std::max(cert.largest_dropped, sv(r));
  }
  return cert;
}

class StratifiedMapContext {
 public:
  StratifiedMapContext(dsl::SmoothMap f, Prestratification p, std::size_t samples = 64,
                       std::uint64_t seed = 1)
      : f_(std::move(f)), p_(std::move(p)) {
    if (static_cast<Index>(f_.input_dim()) != p_.n)
      throw DimensionError("f must be defined on R^" + std::to_string(p_.n));
    if (!f_.is_smooth()) throw ValidationError("f uses a non-smooth primitive");
    for (const auto& s : p_.strata) ranks_[s.name] = validate_constant_rank(f_, s, samples, seed);
  }

  const dsl::SmoothMap& f() const { return f_; }
  const Prestratification& strata() const { return p_; }
  const Stratum& stratum(const std::string& name) const { return p_.get(name); }
  const RankCertificate& rank(const std::string& name) const {
    auto it = ranks_.find(name);
    if (it == ranks_.end()) throw ValidationError("no rank certificate for '" + name + "'");
    return it->second;
  }
  const std::map<std::string, RankCertificate>& ranks() const { return ranks_; }

 private:
  dsl::SmoothMap f_;
  Prestratification p_;
  std::map<std::string, RankCertificate> ranks_;
};

struct LeafTangentPair {
  Subspace ambient;   ///< ker d(f|T_xS) pushed into T_xS
  Subspace pushed;    ///< dpsi applied to ker d(f o psi)
  double angle = 0.0;
};

/// Both leaf-tangent routes at a chart point, at the certified rank.
inline LeafTangentPair leaf_tangent_pair(const StratifiedMapContext& ctx, const Stratum& s,
                                         const ChartPoint& cp) {
  const Index r = ctx.rank(s.name).rank;
  const auto& c = s.charts.at(cp.chart);
  if (!c.map.in_domain(cp.u)) throw DomainError("leaf tangent requested outside the chart domain");
  VectorXd x;
  MatrixXd jpsi;
  c.map.evaluate_unchecked(cp.u, x, jpsi);
  const MatrixXd jf = ctx.f().jacobian(x);
  const Subspace t = span_of(jpsi);
  if (t.dim() != s.d)
    throw ValidationError("immersion failure on stratum '" + s.name + "' at " + format_point(x));
  LeafTangentPair out;
  const Subspace k_amb = kernel_of_rank(jf * t.basis(), r);
  out.ambient = Subspace::from_orthonormal(t.basis() * k_amb.basis());
  const Subspace k_chart = kernel_of_rank(jf * jpsi, r);
  out.pushed = span_of(jpsi * k_chart.basis());
  if (out.pushed.dim() != out.ambient.dim())
    throw NumericalInconsistency("leaf tangent routes disagree in dimension on '" + s.name + "'");
  out.angle = grassmann_distance(out.ambient, out.pushed);
  return out;
}

/// Tangent space of the leaf of the induced foliation through psi(u).
inline Subspace leaf_tangent(const StratifiedMapContext& ctx, const Stratum& s,
                             const ChartPoint& cp, double tol = kAngleTol) {
  auto pair = leaf_tangent_pair(ctx, s, cp);
  if (pair.angle >= tol)
    throw NumericalInconsistency("leaf tangent routes on '" + s.name + "' differ by " +
                                 std::to_string(pair.angle) + " rad");
  return pair.ambient;
}

/// Leaf or full tangent at an ambient point of a stratum (located first).
inline ChartPoint require_on_stratum(const Stratum& s, const VectorXd& p) {
  auto loc = locate(s, p);
  if (!loc.found)
    throw ValidationError("point " + format_point(p) + " does not lie on stratum '" + s.name +
                          "' (residual " + std::to_string(loc.residual) + ")");
  return loc.where;
}

// ---------------------------------------------------------------------------
// Prestratification validation

enum class FrontierStatus { satisfied, violated, undetermined };

inline const char* to_string(FrontierStatus s) {
  switch (s) {
    case FrontierStatus::satisfied: return "satisfied";
    case FrontierStatus::violated: return "violated";
    case FrontierStatus::undetermined: return "undetermined";
  }
  return "?";
}

struct IncidenceCheck {
  std::size_t index = 0;
  double y_residual = 0.0;
  std::size_t arcs = 0;
  double closest = std::numeric_limits<double>::infinity();
  /// Frontier points of X near y that lie in Y.
  FrontierStatus frontier = FrontierStatus::undetermined;
};

struct ValidationReport {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double min_pairwise_distance = std::numeric_limits<double>::infinity();
  std::vector<IncidenceCheck> incidences;
  /// Frontier condition near the declared incidences: each sampled frontier
  /// point lies in a stratum W and W stays inside the closure of X.
  FrontierStatus frontier = FrontierStatus::undetermined;
  std::vector<std::string> frontier_notes;
};

namespace detail {

/// A preimage clear of the chart boundary. Frontier points are reached from
/// inside the domain at vanishing distance and do not count.
inline bool located_inside(const Stratum& s, const LocateResult& loc, double margin) {
  return loc.found && s.charts[loc.where.chart].map.boundary_distance(loc.where.u) > margin;
}

/// Domain-boundary points near a base point u0 of the chart closure: random
/// offsets pushed back onto the zero set of one predicate active at u0.
inline std::vector<VectorXd> boundary_points_near(const Chart& c, const VectorXd& u0,
                                                  std::size_t count, double spread, Rng& rng) {
  std::vector<VectorXd> out;
  if (!c.map.has_domain() || u0.size() == 0) return out;
  const VectorXd g0 = c.map.domain_values(u0);
  std::vector<std::size_t> active;
  for (Index k = 0; k < g0.size(); ++k)
    if (std::fabs(g0(k)) <= 1e-7) active.push_back(static_cast<std::size_t>(k));
  if (active.empty()) return out;
  const auto& preds = c.map.domain();
  for (std::size_t k = 0; k < count * 3 && out.size() < count; ++k) {
    const std::size_t a = active[k % active.size()];
    const dsl::SmoothMap g(static_cast<std::size_t>(u0.size()), {preds[a]});
    VectorXd u = u0 + spread * ball_vector(rng, u0.size());
    bool ok = true;
    for (int it = 0; it < 200; ++it) {
      VectorXd val;
      MatrixXd jac;
      try {
        g.evaluate_unchecked(u, val, jac);
      } catch (const Error&) {
        ok = false;
        break;
      }
      if (std::fabs(val(0)) < 1e-15) break;
      const double nrm = jac.squaredNorm();
      if (nrm < 1e-300) break;
      u -= (val(0) / nrm) * jac.row(0).transpose();
    }
    if (!ok || c.map.domain_margin(u) < -1e-9) continue;
    out.push_back(u);
  }
  return out;
}

}  // namespace detail

/// Sampled prestratification checks: immersion, disjointness, incidences,
/// and a local frontier-condition probe near the declared incidence points.
inline ValidationReport validate_prestratification(const Prestratification& p,
                                                   std::size_t samples, std::uint64_t seed,
                                                   const ApproachPlan& plan = {},
                                                   double frontier_radius = 0.5) {
  ValidationReport rep;
  rep.samples = samples;
  rep.seed = seed;
  std::vector<std::vector<ChartPoint>> pts(p.strata.size());
  std::vector<std::vector<VectorXd>> imgs(p.strata.size());
  for (std::size_t i = 0; i < p.strata.size(); ++i) {
    const Stratum& s = p.strata[i];
    if (s.n != p.n) throw DimensionError("stratum '" + s.name + "' lives in the wrong ambient");
    Rng rng(derive_seed(seed, "validate/" + s.name));
    pts[i] = sample_stratum(s, samples, rng);
    for (const auto& cp : pts[i]) {
      tangent_space(s, cp);
      imgs[i].push_back(stratum_point(s, cp));
    }
  }
  for (std::size_t i = 0; i < p.strata.size(); ++i) {
    for (std::size_t j = 0; j < p.strata.size(); ++j) {
      if (i == j) continue;
      if (i < j)
        for (const auto& a : imgs[i])
          for (const auto& b : imgs[j])
            rep.min_pairwise_distance = std::min(rep.min_pairwise_distance, (a - b).norm());
      LocateOptions opt;
      opt.seed = derive_seed(seed, i * 131 + j);
      opt.random_starts = 2;
      for (const auto& a : imgs[i]) {
        if (detail::located_inside(p.strata[j], locate(p.strata[j], a, opt), opt.closure_margin))
          throw OverlapError("point " + format_point(a) + " is claimed by strata '" +
                             p.strata[i].name + "' and '" + p.strata[j].name + "'");
      }
    }
  }
  if (rep.min_pairwise_distance <= 1e-9)
    throw OverlapError("sampled strata come within 1e-9 of each other");

  bool any_probe = false, any_violation = false;
  for (std::size_t k = 0; k < p.incidences.size(); ++k) {
    const Incidence& inc = p.incidences[k];
    const Stratum& x = p.get(inc.x);
    const Stratum& y = p.get(inc.y);
    IncidenceCheck chk;
    chk.index = k;
    auto on_y = locate(y, inc.point);
    chk.y_residual = on_y.residual;
    if (!on_y.found)
      throw ValidationError("incidence " + std::to_string(k) + ": point " +
                            format_point(inc.point) + " is not on '" + y.name + "'");
    auto arcs = approach_arcs(x, inc.point, plan);
    chk.arcs = arcs.arcs.size();
    for (const auto& a : arcs.arcs) chk.closest = std::min(chk.closest, a.distances.back());
    if (arcs.arcs.empty())
      throw ValidationError("incidence " + std::to_string(k) + ": point " +
                            format_point(inc.point) + " is not a limit of '" + x.name + "'");

    // Frontier probe near this incidence.
    Rng rng(derive_seed(seed, "frontier/" + std::to_string(k)));
    std::size_t probed = 0, in_y = 0;
    std::vector<std::pair<std::size_t, VectorXd>> bases;
    for (const auto& arc : arcs.arcs) {
      bool seen = false;
      for (const auto& b : bases) seen = seen || (b.first == arc.chart && b.second == arc.base);
      if (!seen) bases.emplace_back(arc.chart, arc.base);
    }
    for (const auto& [ci, base] : bases) {
      for (const VectorXd& ub : detail::boundary_points_near(x.charts[ci], base, 12, 0.2, rng)) {
        VectorXd q;
        try {
          q = x.charts[ci].map.eval_unchecked(ub);
        } catch (const Error&) {
          continue;
        }
        if ((q - inc.point).norm() > frontier_radius) continue;
        if (detail::located_inside(x, locate(x, q), LocateOptions{}.closure_margin))
          continue;  // still inside X via another chart
        ++probed;
        any_probe = true;
        std::optional<std::size_t> owner;
        for (std::size_t w = 0; w < p.strata.size() && !owner; ++w)
          if (&p.strata[w] != &x) {
            LocateOptions opt;
            opt.tol = 1e-6;
            if (locate(p.strata[w], q, opt).found) owner = w;
          }
        if (!owner) {
          any_violation = true;
          if (rep.frontier_notes.size() < 8) rep.frontier_notes.push_back("frontier point " + format_point(q) + " of '" + x.name +
                                       "' lies in no stratum");
          continue;
        }
        if (p.strata[*owner].name == y.name) ++in_y;
        // The owning stratum must stay in the closure of X near q.
        const Stratum& w = p.strata[*owner];
        auto wq = locate(w, q, LocateOptions{false, 1e-6});
        Rng wr(derive_seed(seed, "frontier-w/" + std::to_string(k) + "/" + w.name));
        for (int t = 0; t < 4 && w.d > 0; ++t) {
          VectorXd u = wq.where.u + 0.1 * unit_vector(wr, w.d);
          if (!w.charts[wq.where.chart].map.in_domain(u)) continue;
          const VectorXd z = w.charts[wq.where.chart].map.eval(u);
          if (closure_distance(x, z) > 1e-6) {
            any_violation = true;
            if (rep.frontier_notes.size() < 8) rep.frontier_notes.push_back("'" + w.name + "' meets the frontier of '" + x.name +
                                         "' at " + format_point(q) + " but " + format_point(z) +
                                         " is not in its closure");
            break;
          }
        }
      }
    }
    if (probed > 0) chk.frontier = in_y == probed ? FrontierStatus::satisfied : FrontierStatus::violated;
    rep.incidences.push_back(chk);
  }
  if (any_probe) rep.frontier = any_violation ? FrontierStatus::violated : FrontierStatus::satisfied;
  return rep;
}

}  // namespace strathom
