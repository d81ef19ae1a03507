#pragma once

// Stability, instability and non-genericity experiments on gallery scenes.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "strathom/constructions.hpp"
#include "strathom/regularity.hpp"
#include "strathom/scene.hpp"
#include "strathom/strata.hpp"

namespace strathom {

// ---------------------------------------------------------------------------
// Perturbations

/// Sum of Gaussian bumps with linear parts, times a global scale.
struct BumpField {
  Index source_dim = 0;
  Index target_dim = 0;
  double width = 0.25;
  double scale = 1.0;
  std::vector<VectorXd> centers;
  std::vector<VectorXd> offsets;
  std::vector<MatrixXd> linear;

  void eval(const VectorXd& w, VectorXd& value, MatrixXd& jac) const {
    value = VectorXd::Zero(target_dim);
    jac = MatrixXd::Zero(target_dim, source_dim);
    const double s2 = width * width;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const VectorXd d = w - centers[k];
      const double e = std::exp(-d.squaredNorm() / (2.0 * s2));
      if (e == 0.0) continue;
      const VectorXd inner = offsets[k] + linear[k] * d;
      value += e * inner;
      jac += e * linear[k] - (e / s2) * inner * d.transpose();
    }
    value *= scale;
    jac *= scale;
  }
};

inline BumpField random_bump_field(Index m, Index n, std::size_t bumps,
                                   const std::vector<std::pair<double, double>>& box,
                                   std::uint64_t seed) {
  if (static_cast<Index>(box.size()) != m) throw DimensionError("bump field box has the wrong dimension");
  Rng rng(seed);
  BumpField f;
  f.source_dim = m;
  f.target_dim = n;
  double extent = 0.0;
  for (const auto& [lo, hi] : box) extent += hi - lo;
  f.width = 0.25 * extent / static_cast<double>(m);
  for (std::size_t k = 0; k < bumps; ++k) {
    VectorXd c(m);
    for (Index i = 0; i < m; ++i) c(i) = uniform(rng, box[i].first, box[i].second);
    f.centers.push_back(c);
    f.offsets.push_back(gaussian_vector(rng, n));
    MatrixXd b(n, m);
    for (Index j = 0; j < m; ++j) b.col(j) = gaussian_vector(rng, n) / f.width;
    f.linear.push_back(b);
  }
  return f;
}

/// sup over the points of |delta| + |D delta| (Frobenius).
inline double sampled_c1_norm(const BumpField& f, const std::vector<VectorXd>& pts) {
  double sup = 0.0;
  VectorXd v;
  MatrixXd j;
  for (const auto& w : pts) {
    f.eval(w, v, j);
    sup = std::max(sup, v.norm() + j.norm());
  }
  return sup;
}

/// Rescales the field so its sampled C^1 norm equals eps.
inline void normalize_c1(BumpField& f, const std::vector<VectorXd>& pts, double eps) {
  f.scale = 1.0;
  const double norm = sampled_c1_norm(f, pts);
  f.scale = norm > 0.0 ? eps / norm : 0.0;
}

inline std::vector<VectorXd> box_samples(const std::vector<std::pair<double, double>>& box,
                                         std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<VectorXd> out;
  for (std::size_t k = 0; k < count; ++k) {
    VectorXd w(static_cast<Index>(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i) w(static_cast<Index>(i)) = uniform(rng, box[i].first, box[i].second);
    out.push_back(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transversality of a map on a compact grid

namespace detail {

/// Leaf basis with a consistent orientation relative to a reference frame.
inline MatrixXd oriented(const Subspace& leaf, const MatrixXd& ref) {
  MatrixXd b = leaf.basis();
  if (b.cols() == 0 || ref.cols() != b.cols()) return b;
  if ((ref.transpose() * b).determinant() < 0.0) b.col(0) *= -1.0;
  return b;
}

/// n-th singular value of [Dh/|Dh| | L]; zero when image + leaf is not R^n.
inline double transversality_margin(const MatrixXd& dh, const MatrixXd& leaf) {
  const Index n = dh.rows();
  if (dh.cols() + leaf.cols() < n) return 0.0;
  MatrixXd m(n, dh.cols() + leaf.cols());
  const double scale = Eigen::JacobiSVD<MatrixXd>(dh).singularValues()(0);
  m << (scale > 0.0 ? MatrixXd(dh / scale) : dh), leaf;
  const VectorXd sv = Eigen::JacobiSVD<MatrixXd>(m).singularValues();
  return sv(n - 1);
}

}  // namespace detail

struct GridCell {
  std::size_t index = 0;
  std::size_t stratum = 0;
  ChartPoint base;
  double base_distance = 0.0;
};

/// The compact set K (a grid in the box) with the base map's data cached.
struct TransversalityGrid {
  const StratifiedMapContext* ctx = nullptr;
  std::size_t side = 0;
  std::vector<VectorXd> points;
  std::vector<VectorXd> values;
  std::vector<MatrixXd> jacobians;
  std::vector<GridCell> cells;
  std::vector<MatrixXd> reference;
  double band = 0.05;
  double margin = 1e-3;
};

struct GridCheck {
  bool transverse = true;
  double min_margin = std::numeric_limits<double>::infinity();
  std::size_t cells_checked = 0;
  std::size_t bad_cells = 0;
  std::size_t sign_changes = 0;
};

inline TransversalityGrid make_grid(const StratifiedMapContext& ctx, const dsl::SmoothMap& g,
                                    const std::vector<std::pair<double, double>>& box, std::size_t side,
                                    double band, double margin) {
  if (box.size() != g.input_dim()) throw DimensionError("grid box does not match the map's source");
  if (static_cast<Index>(g.output_dim()) != ctx.strata().n) throw DimensionError("map target is not the ambient space");
  if (box.size() > 2) throw PreconditionError("grids are supported for source dimension 1 or 2");
  TransversalityGrid grid;
  grid.ctx = &ctx;
  grid.side = side;
  grid.band = band;
  grid.margin = margin;
  const std::size_t m = box.size();
  const std::size_t total = m == 1 ? side : side * side;
  for (std::size_t k = 0; k < total; ++k) {
    VectorXd w(static_cast<Index>(m));
    std::size_t rest = k;
    for (std::size_t i = 0; i < m; ++i) {
      const double t = side > 1 ? static_cast<double>(rest % side) / static_cast<double>(side - 1) : 0.5;
      rest /= side;
      w(static_cast<Index>(i)) = box[i].first + t * (box[i].second - box[i].first);
    }
    VectorXd v;
    MatrixXd j;
    g.evaluate_unchecked(w, v, j);
    grid.points.push_back(w);
    grid.values.push_back(v);
    grid.jacobians.push_back(j);
  }
  const auto& strata = ctx.strata().strata;
  grid.reference.resize(strata.size());
  for (std::size_t s = 0; s < strata.size(); ++s) {
    LocateOptions opt;
    opt.closure = true;
    opt.tol = std::numeric_limits<double>::infinity();
    opt.random_starts = 2;
    for (std::size_t k = 0; k < total; ++k) {
      const auto loc = locate(strata[s], grid.values[k], opt);
      if (!loc.found) continue;
      grid.cells.push_back({k, s, loc.where, loc.residual});
    }
  }
  return grid;
}

/// Checks h = g + delta (delta may be null) on the cells near strata.
inline GridCheck check_grid(const TransversalityGrid& grid, const BumpField* delta) {
  const auto& ctx = *grid.ctx;
  const auto& strata = ctx.strata().strata;
  GridCheck out;
  struct Near {
    std::size_t stratum;
    double det;
  };
  std::vector<std::vector<Near>> near(grid.points.size());
  std::vector<MatrixXd> reference = grid.reference;
  for (const auto& cell : grid.cells) {
    VectorXd p = grid.values[cell.index];
    MatrixXd dh = grid.jacobians[cell.index];
    double shift = 0.0;
    if (delta) {
      VectorXd dv;
      MatrixXd dj;
      delta->eval(grid.points[cell.index], dv, dj);
      p += dv;
      dh += dj;
      shift = dv.norm();
    }
    if (cell.base_distance - shift > grid.band) continue;
    const Stratum& s = strata[cell.stratum];
    const Chart& c = s.charts[cell.base.chart];
    VectorXd u = cell.base.u;
    const double dist = s.d == 0 ? (c.map.eval_unchecked(u) - p).norm() : detail::fit_chart(c.map, u, p);
    if (!(dist <= grid.band) || !c.map.in_domain(u)) continue;
    const Subspace leaf = leaf_tangent(ctx, s, {cell.base.chart, u});
    MatrixXd& ref = reference[cell.stratum];
    if (ref.cols() == 0 && leaf.dim() > 0) ref = leaf.basis();
    const MatrixXd lb = detail::oriented(leaf, ref);
    ++out.cells_checked;
    const double mg = detail::transversality_margin(dh, lb);
    out.min_margin = std::min(out.min_margin, mg);
    if (mg < grid.margin) ++out.bad_cells;
    if (dh.cols() + lb.cols() == dh.rows()) {
      MatrixXd sq(dh.rows(), dh.rows());
      sq << dh, lb;
      near[cell.index].push_back({cell.stratum, sq.determinant()});
    }
  }
  // A sign change of det[Dh | L] between grid neighbours near the same
  // stratum brackets a non-transverse point.
  const std::size_t m = grid.points.empty() ? 0 : static_cast<std::size_t>(grid.points[0].size());
  auto compare = [&](std::size_t a, std::size_t b) {
    for (const auto& na : near[a])
      for (const auto& nb : near[b])
        if (na.stratum == nb.stratum && na.det * nb.det < 0.0) ++out.sign_changes;
  };
  for (std::size_t k = 0; k < grid.points.size(); ++k) {
    const std::size_t i = k % grid.side;
    if (i + 1 < grid.side) compare(k, k + 1);
    if (m == 2 && k + grid.side < grid.points.size()) compare(k, k + grid.side);
  }
  out.transverse = out.bad_cells == 0 && out.sign_changes == 0;
  return out;
}

// ---------------------------------------------------------------------------
// Stability trials

struct TrialOutcome {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double c1_norm = 0.0;
  GridCheck check;
};

struct StabilityReport {
  std::string base_map;
  std::size_t grid_points = 0;
  std::size_t cells = 0;
  double epsilon = 0.0;
  std::size_t trials = 0;
  std::vector<TrialOutcome> outcomes;
  std::size_t persisted = 0;
  std::optional<double> fraction;
  std::string note;
  /// Bisection history (eps, all transverse) when calibrated.
  std::vector<std::pair<double, bool>> calibration;
  double largest_passing = 0.0;
};

struct StabilityExperiment {
  const StratifiedMapContext* ctx = nullptr;
  StabilitySpec spec;
  dsl::SmoothMap base;
  TransversalityGrid grid;
  std::vector<VectorXd> norm_points;

  StabilityExperiment(const StratifiedMapContext& c, StabilitySpec s)
      : ctx(&c), spec(std::move(s)) {
    if (spec.box.size() != spec.source_dim) throw SchemaError("/stability/box", "box does not match source_dim");
    base = dsl::parse_map(spec.map, spec.source_dim);
    grid = make_grid(c, base, spec.box, spec.grid, spec.band, spec.margin);
    norm_points = box_samples(spec.box, 1000, derive_seed(0xc1ULL, "c1-sample"));
    const GridCheck g0 = check_grid(grid, nullptr);
    if (!g0.transverse)
      throw PreconditionError("base map is not transverse on K (margin " + std::to_string(g0.min_margin) +
                              ", " + std::to_string(g0.sign_changes) + " sign changes)");
  }

  BumpField field(std::uint64_t seed, double eps) const {
    BumpField f = random_bump_field(static_cast<Index>(spec.source_dim), ctx->strata().n, spec.bumps, spec.box, seed);
    normalize_c1(f, norm_points, eps);
    return f;
  }

  TrialOutcome trial(std::size_t k, std::uint64_t seed, double eps) const {
    TrialOutcome t;
    t.trial = k;
    t.seed = seed;
    const BumpField f = field(seed, eps);
    t.c1_norm = sampled_c1_norm(f, norm_points);
    t.check = check_grid(grid, &f);
    return t;
  }

  /// `trials` perturbations of C^1 size eps; seeds derive from (seed, "trial", k).
  StabilityReport run(double eps, std::size_t trials, std::uint64_t seed) const {
    StabilityReport r;
    r.base_map = spec.map;
    r.grid_points = grid.points.size();
    r.cells = grid.cells.size();
    r.epsilon = eps;
    r.trials = trials;
    for (std::size_t k = 0; k < trials; ++k) {
      auto t = trial(k, derive_seed(seed, "trial/" + std::to_string(k)), eps);
      if (t.check.transverse) ++r.persisted;
      r.outcomes.push_back(std::move(t));
    }
    if (trials == 0)
      r.note = "no trials: persistence fraction undefined";
    else
      r.fraction = static_cast<double>(r.persisted) / static_cast<double>(trials);
    return r;
  }

  bool all_transverse(double eps, std::size_t trials, std::uint64_t seed, const std::string& tag) const {
    for (std::size_t k = 0; k < trials; ++k)
      if (!trial(k, derive_seed(seed, tag + "/" + std::to_string(k)), eps).check.transverse) return false;
    return true;
  }

  /// Bisection for the largest eps in [0, eps_max] at which all calibration
  /// trials persist; half of it is used for the confirmation run.
  StabilityReport calibrate_and_run(std::uint64_t seed) const {
    std::vector<std::pair<double, bool>> history;
    double lo = 0.0, hi = spec.eps_max;
    if (all_transverse(hi, spec.calibration_trials, seed, "calibrate/max")) {
      lo = hi;
      history.emplace_back(hi, true);
    } else {
      history.emplace_back(hi, false);
      for (std::size_t s = 0; s < spec.bisection_steps; ++s) {
        const double mid = 0.5 * (lo + hi);
        const bool ok = all_transverse(mid, spec.calibration_trials, seed, "calibrate/" + std::to_string(s));
        history.emplace_back(mid, ok);
        (ok ? lo : hi) = mid;
      }
    }
    StabilityReport r = run(0.5 * lo, spec.trials, seed);
    r.calibration = std::move(history);
    r.largest_passing = lo;
    if (lo == 0.0) r.note = "no positive eps passed calibration";
    return r;
  }
};

struct SweepPoint {
  double epsilon = 0.0;
  std::size_t trials = 0;
  std::size_t persisted = 0;
  double fraction = 0.0;
};

/// Persistence fraction over a list of eps values, same seed family.
inline std::vector<SweepPoint> stability_sweep(const StabilityExperiment& ex, const std::vector<double>& eps,
                                               std::size_t trials, std::uint64_t seed) {
  std::vector<SweepPoint> out;
  for (double e : eps) {
    const auto r = ex.run(e, trials, seed);
    out.push_back({e, trials, r.persisted, r.fraction.value_or(0.0)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instability demo

struct InstabilityDemo {
  std::string x;
  std::string y_stratum;
  VectorXd y;
  RegularityVerdict fault;
  Subspace h;
  Transversality base_at_y;
  /// Smallest singular value of dg over sampled source points off the center.
  double base_min_singular = 0.0;
  DestabilizerSequence sequence;
};

inline InstabilityDemo instability_demo(const Scene& sc, const StratifiedMapContext& ctx,
                                        std::optional<std::size_t> count_override = {},
                                        std::uint64_t seed = 1) {
  const InstabilitySpec spec = sc.instability.value_or(InstabilitySpec{});
  if (spec.incidence >= sc.incidences.size()) throw PreconditionError("instability incidence index out of range");
  const auto& inc = sc.incidences[spec.incidence];
  InstabilityDemo d;
  d.x = inc.x;
  d.y_stratum = inc.y;
  d.y = Eigen::Map<const VectorXd>(inc.point.data(), static_cast<Index>(inc.point.size()));
  d.fault = check_af_at(ctx, inc.x, inc.y, d.y, sc.plan);
  if (d.fault.status != Status::fails) throw PreconditionError("no (a_f) fault witness at the incidence");
  const FaultWitness w = fault_witness(ctx, d.fault);
  const Index n = ctx.strata().n;
  d.h = choose_complement_H(w.tau, w.leaf_y, w.v, n);
  d.base_at_y = transverse_at(d.h, w.leaf_y, n);
  const std::string base = rank_drop_base_source(d.h, d.y, spec.chart_radius);
  const std::size_t count = count_override.value_or(spec.count);
  if (count == 0) throw PreconditionError("instability demo needs count >= 1");
  d.sequence = destabilizing_sequence(base, VectorXd::Zero(n), w, d.h, spec.radius, count, seed);
  Rng rng(derive_seed(seed, "instability/base-rank"));
  d.base_min_singular = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k) {
    const VectorXd z = spec.chart_radius * ball_vector(rng, n);
    if (z.norm() < 1e-3 * spec.chart_radius) continue;
    const VectorXd sv = Eigen::JacobiSVD<MatrixXd>(d.sequence.base.jacobian(z)).singularValues();
    d.base_min_singular = std::min(d.base_min_singular, sv(n - 1));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Non-genericity certificates

/// Phi(w) = (h(g(w)) if an implicit equation is given, det[Dg(w) | L(g(w))]).
/// A sign change (interval) or a nonzero winding number (loop) of Phi
/// certifies a non-transverse point of g inside the region.
struct CertificateResult {
  bool certified = false;
  int degree = 0;
  /// Approximate non-transverse point in the source, when certified.
  VectorXd zero;
};

struct TransversalityReport {
  std::string stratum;
  std::string map;
  CertificateResult base;
  double eps = 0.0;
  std::size_t trials = 0;
  std::size_t persisted = 0;
  std::string verdict;
};

class NonTransversalityCertificate {
 public:
  NonTransversalityCertificate(const StratifiedMapContext& ctx, TransversalitySpec spec)
      : ctx_(&ctx), spec_(std::move(spec)), stratum_(&ctx.stratum(spec_.stratum)) {
    g_ = dsl::parse_map(spec_.map, spec_.source_dim);
    if (static_cast<Index>(g_.output_dim()) != ctx.strata().n) throw DimensionError("map target is not the ambient space");
    if (spec_.implicit) h_ = dsl::parse_map(*spec_.implicit, static_cast<std::size_t>(ctx.strata().n));
    if (spec_.center.size() != spec_.source_dim) throw SchemaError("/transversality/center", "center does not match source_dim");
    const Index leaf = ctx.strata().n - static_cast<Index>(ctx.rank(stratum_->name).rank) - (stratum_->n - stratum_->d);
    const std::size_t comps = (h_ ? 1u : 0u) + 1u;
    if (comps != spec_.source_dim || static_cast<Index>(spec_.source_dim) + leaf != ctx.strata().n)
      throw PreconditionError("certificate needs dim source + dim leaf = n and one equation per extra source dimension");
    center_ = Eigen::Map<const VectorXd>(spec_.center.data(), static_cast<Index>(spec_.center.size()));
    reference_ = leaf_at(g_.eval(center_)).basis();
  }

  VectorXd phi(const VectorXd& w, const BumpField* delta = nullptr) const {
    VectorXd p;
    MatrixXd dg;
    g_.evaluate_unchecked(w, p, dg);
    if (delta) {
      VectorXd dv;
      MatrixXd dj;
      delta->eval(w, dv, dj);
      p += dv;
      dg += dj;
    }
    const MatrixXd l = detail::oriented(leaf_at(p), reference_);
    MatrixXd sq(dg.rows(), dg.cols() + l.cols());
    sq << dg, l;
    VectorXd out(static_cast<Index>(spec_.source_dim));
    Index k = 0;
    if (h_) out(k++) = h_->eval_unchecked(p)(0);
    out(k) = sq.determinant();
    return out;
  }

  CertificateResult certify(const BumpField* delta = nullptr) const {
    CertificateResult r;
    const double rad = spec_.radius;
    if (spec_.source_dim == 1) {
      VectorXd a = center_, b = center_;
      a(0) -= rad;
      b(0) += rad;
      double fa = phi(a, delta)(0), fb = phi(b, delta)(0);
      if (fa * fb >= 0.0) return r;
      r.certified = true;
      r.degree = fb > 0.0 ? 1 : -1;
      for (int it = 0; it < 60; ++it) {
        VectorXd mid = 0.5 * (a + b);
        const double fm = phi(mid, delta)(0);
        if (fm * fa > 0.0) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      r.zero = 0.5 * (a + b);
      return r;
    }
    // Winding number of Phi along the circle of radius rad.
    const int steps = 720;
    double total = 0.0;
    VectorXd prev = phi(loop_point(0, steps), delta);
    const VectorXd first = prev;
    for (int k = 1; k <= steps; ++k) {
      const VectorXd cur = k == steps ? first : phi(loop_point(k, steps), delta);
      if (prev.norm() == 0.0 || cur.norm() == 0.0) return r;
      double d = std::atan2(cur(1), cur(0)) - std::atan2(prev(1), prev(0));
      while (d > std::numbers::pi) d -= 2 * std::numbers::pi;
      while (d < -std::numbers::pi) d += 2 * std::numbers::pi;
      if (std::abs(d) > std::numbers::pi / 2) return r;
      total += d;
      prev = cur;
    }
    r.degree = static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
    r.certified = r.degree != 0;
    if (r.certified) r.zero = newton_zero(delta);
    return r;
  }

  TransversalityReport run(std::uint64_t seed) const {
    TransversalityReport rep;
    rep.stratum = spec_.stratum;
    rep.map = spec_.map;
    rep.base = certify();
    rep.eps = spec_.eps;
    rep.trials = spec_.trials;
    std::vector<std::pair<double, double>> box;
    for (double c : spec_.center) box.emplace_back(c - 2 * spec_.radius, c + 2 * spec_.radius);
    const auto pts = box_samples(box, 1000, derive_seed(seed, "transversality/c1"));
    for (std::size_t k = 0; k < spec_.trials; ++k) {
      BumpField f = random_bump_field(static_cast<Index>(spec_.source_dim), ctx_->strata().n, 6, box,
                                      derive_seed(seed, "transversality/" + std::to_string(k)));
      normalize_c1(f, pts, spec_.eps);
      if (certify(&f).certified) ++rep.persisted;
    }
    rep.verdict = rep.base.certified ? "non-transverse" : "no-certificate";
    return rep;
  }

 private:
  Subspace leaf_at(const VectorXd& p) const {
    LocateOptions opt;
    opt.closure = true;
    opt.tol = std::numeric_limits<double>::infinity();
    const auto loc = locate(*stratum_, p, opt);
    if (!loc.found) throw NumericalInconsistency("no chart of '" + stratum_->name + "' near the image point");
    ChartPoint cp = loc.where;
    const Chart& c = stratum_->charts[cp.chart];
    if (!c.map.in_domain(cp.u)) throw NumericalInconsistency("image point projects outside the chart domain");
    return leaf_tangent(*ctx_, *stratum_, cp);
  }

  VectorXd loop_point(int k, int steps) const {
    const double a = 2 * std::numbers::pi * k / steps;
    VectorXd w = center_;
    w(0) += spec_.radius * std::cos(a);
    w(1) += spec_.radius * std::sin(a);
    return w;
  }

  VectorXd newton_zero(const BumpField* delta) const {
    VectorXd w = center_;
    for (int it = 0; it < 50; ++it) {
      const VectorXd f = phi(w, delta);
      if (f.norm() < 1e-12) break;
      MatrixXd j(f.size(), w.size());
      for (Index i = 0; i < w.size(); ++i) {
        VectorXd e = VectorXd::Zero(w.size());
        e(i) = 1e-7;
        j.col(i) = (phi(w + e, delta) - phi(w - e, delta)) / 2e-7;
      }
      const VectorXd step = j.completeOrthogonalDecomposition().solve(f);
      w -= step;
      if ((w - center_).norm() > spec_.radius) return center_;
    }
    return w;
  }

  const StratifiedMapContext* ctx_;
  TransversalitySpec spec_;
  const Stratum* stratum_;
  dsl::SmoothMap g_;
  std::optional<dsl::SmoothMap> h_;
  VectorXd center_;
  MatrixXd reference_;
};

// ---------------------------------------------------------------------------
// (t_f) test submanifolds

/// Quadric {a.(p - y) + (p - y)^T Q (p - y)/2 = 0} with a having a component of
/// at least a tenth of its length in the leaf of Y (so it is transverse to
/// the leaf at y); the whole space when that leaf is a point.
inline TestSubmanifold random_test_submanifold(const Subspace& leaf_y, const VectorXd& y, std::uint64_t seed) {
  const Index n = y.size();
  if (leaf_y.dim() == 0) return TestSubmanifold::whole_space(n);
  Rng rng(seed);
  VectorXd a;
  do {
    a = gaussian_vector(rng, n);
  } while ((leaf_y.projector() * a).norm() < 0.1 * a.norm());
  MatrixXd q(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) q(i, j) = q(j, i) = 0.5 * uniform(rng, -1, 1);
  auto d = [&](Index i) {
    return std::string("(") + detail::var(i) + " - " + dsl::format_number(y(i)) + ")";
  };
  std::string src;
  for (Index i = 0; i < n; ++i) src += (i ? " + " : "") + dsl::format_number(a(i)) + "*" + d(i);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) src += " + " + dsl::format_number(0.5 * q(i, j)) + "*" + d(i) + "*" + d(j);
  return TestSubmanifold::implicit_set(dsl::parse_map(src, static_cast<std::size_t>(n)), "random quadric");
}

}  // namespace strathom
