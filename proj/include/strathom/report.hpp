#pragma once

// Scene-level drivers and report serialization (JSON "report-v1", RFC-4180 CSV).

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "strathom/experiments.hpp"
#include "strathom/regularity.hpp"
#include "strathom/scene.hpp"
#include "strathom/strata.hpp"

#ifndef STRATHOM_VERSION
#define STRATHOM_VERSION "0.0.0"
#endif

namespace strathom {

inline constexpr const char* kReportSchema = "report-v1";
inline constexpr const char* kToolVersion = STRATHOM_VERSION;

// ---------------------------------------------------------------------------
// Driving the checkers over a scene

struct CheckOptions {
  std::vector<Condition> conditions{Condition::a, Condition::af, Condition::tf, Condition::afs};
  std::uint64_t seed = 1;
  /// Random test submanifolds per incidence for (t_f).
  std::size_t tf_tests = 5;
};

/// Plans of the scene with their seeds replaced by sub-seeds of `seed`.
inline ApproachPlan seeded_plan(const Scene& sc, std::uint64_t seed) {
  ApproachPlan p = sc.plan;
  p.seed = derive_seed(seed, "plan/approach");
  return p;
}

inline RadiusPlan seeded_radius_plan(const Scene& sc, std::uint64_t seed) {
  RadiusPlan p = sc.radius_plan;
  p.seed = derive_seed(seed, "plan/radius");
  return p;
}

inline VectorXd incidence_point(const IncidenceSpec& inc) {
  return Eigen::Map<const VectorXd>(inc.point.data(), static_cast<Index>(inc.point.size()));
}

/// (t_f) against `tests` seeded random quadrics; the reported verdict is the
/// first failing one, else the first inconclusive one, else the last.
inline RegularityVerdict check_tf_random(const StratifiedMapContext& ctx, const std::string& x,
                                         const std::string& y, const VectorXd& point, std::size_t tests,
                                         const RadiusPlan& rp, std::uint64_t seed) {
  const Stratum& ys = ctx.stratum(y);
  const Subspace leaf = leaf_tangent(ctx, ys, require_on_stratum(ys, point));
  std::optional<RegularityVerdict> worst;
  for (std::size_t k = 0; k < std::max<std::size_t>(tests, 1); ++k) {
    const auto s = random_test_submanifold(leaf, point, derive_seed(seed, "tf/test/" + std::to_string(k)));
    auto v = check_tf_at(ctx, x, y, point, s, rp);
    v.note += " #" + std::to_string(k);
    const auto rank = [](Status st) { return st == Status::fails ? 2 : st == Status::inconclusive ? 1 : 0; };
    if (!worst || rank(v.status) > rank(worst->status)) worst = std::move(v);
    if (worst->status == Status::fails) break;
  }
  return *worst;
}

inline std::vector<RegularityVerdict> check_scene(const Scene& sc, const StratifiedMapContext& ctx,
                                                  const CheckOptions& opt) {
  const ApproachPlan plan = seeded_plan(sc, opt.seed);
  const RadiusPlan rp = seeded_radius_plan(sc, opt.seed);
  std::vector<RegularityVerdict> out;
  for (std::size_t i = 0; i < sc.incidences.size(); ++i) {
    const auto& inc = sc.incidences[i];
    const VectorXd p = incidence_point(inc);
    std::optional<dsl::SmoothMap> retraction;
    if (inc.retraction) retraction = dsl::parse_map(*inc.retraction, static_cast<std::size_t>(sc.ambient));
    for (Condition c : opt.conditions) {
      switch (c) {
        case Condition::a: out.push_back(check_whitney_a_at(ctx, inc.x, inc.y, p, plan)); break;
        case Condition::af: out.push_back(check_af_at(ctx, inc.x, inc.y, p, plan)); break;
        case Condition::afs: out.push_back(check_afs_at(ctx, inc.x, inc.y, p, retraction, rp)); break;
        case Condition::tf:
          out.push_back(check_tf_random(ctx, inc.x, inc.y, p, opt.tf_tests, rp,
                                        derive_seed(opt.seed, "incidence/" + std::to_string(i))));
          break;
      }
    }
  }
  return out;
}

/// 0 when everything holds, 3 if any fault, else 4 if anything is inconclusive.
inline int verdict_exit_code(const std::vector<RegularityVerdict>& vs) {
  bool fault = false, open = false;
  for (const auto& v : vs) {
    fault |= v.status == Status::fails;
    open |= v.status == Status::inconclusive;
  }
  return fault ? 3 : open ? 4 : 0;
}

// ---------------------------------------------------------------------------
// JSON

inline json vector_json(const VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json subspace_json(const Subspace& s) {
  json basis = json::array();
  for (Index j = 0; j < s.dim(); ++j) basis.push_back(vector_json(s.basis().col(j)));
  return {{"ambient", s.ambient_dim()}, {"dim", s.dim()}, {"basis", basis}};
}

inline json arc_json(const ArcEvidence& a) {
  return {{"chart", a.chart},
          {"base", vector_json(a.base)},
          {"direction", vector_json(a.direction)},
          {"ratio", a.ratio},
          {"first_index", a.first_index},
          {"count", a.count},
          {"final_distance", a.final_distance},
          {"converged", a.converged},
          {"residual", a.residual},
          {"tau", subspace_json(a.tau)},
          {"angle", a.angle},
          {"contained", a.contained}};
}

inline json verdict_json(const RegularityVerdict& v) {
  json j = {{"condition", to_string(v.condition)},
            {"x", v.x},
            {"y", v.y},
            {"point", vector_json(v.point)},
            {"status", to_string(v.status)},
            {"required", subspace_json(v.required)}};
  if (!v.arcs.empty() || v.condition == Condition::a || v.condition == Condition::af) {
    json arcs = json::array();
    for (const auto& a : v.arcs) arcs.push_back(arc_json(a));
    j["arcs"] = arcs;
    j["rejected_arcs"] = v.rejected_arcs;
  }
  if (v.witness_arc) {
    j["witness"] = {{"arc", *v.witness_arc}, {"vector", vector_json(v.witness_vector)}, {"angle", v.witness_angle}};
  }
  if (!v.radii.empty()) {
    json radii = json::array();
    for (const auto& r : v.radii) {
      json e = {{"radius", r.radius}, {"samples", r.samples}, {"bad", r.bad}};
      if (r.bad) e["witness"] = {{"point", vector_json(r.witness)}, {"defect", r.witness_defect}};
      radii.push_back(e);
    }
    j["radii"] = radii;
  }
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

inline json validation_json(const ValidationReport& r, const StratifiedMapContext& ctx) {
  json inc = json::array();
  for (const auto& c : r.incidences)
    inc.push_back({{"index", c.index},
                   {"y_residual", c.y_residual},
                   {"arcs", c.arcs},
                   {"frontier", to_string(c.frontier)}});
  json ranks = json::object();
  for (const auto& [name, cert] : ctx.ranks())
    ranks[name] = {{"rank", cert.rank},
                   {"samples", cert.samples},
                   {"smallest_kept", cert.smallest_kept},
                   {"largest_dropped", cert.largest_dropped}};
  json notes = json::array();
  for (const auto& n : r.frontier_notes) notes.push_back(n);
  return {{"samples", r.samples},
          {"min_pairwise_distance", r.min_pairwise_distance},
          {"incidences", inc},
          {"frontier", to_string(r.frontier)},
          {"frontier_notes", notes},
          {"ranks", ranks}};
}

inline json stability_json(const StabilityReport& r) {
  json trials = json::array();
  for (const auto& t : r.outcomes)
    trials.push_back({{"trial", t.trial},
                      {"seed", t.seed},
                      {"c1_norm", t.c1_norm},
                      {"transverse", t.check.transverse},
                      {"min_margin", t.check.cells_checked ? json(t.check.min_margin) : json(nullptr)},
                      {"cells_checked", t.check.cells_checked},
                      {"bad_cells", t.check.bad_cells},
                      {"sign_changes", t.check.sign_changes}});
  json cal = json::array();
  for (const auto& [e, ok] : r.calibration) cal.push_back({{"epsilon", e}, {"all_transverse", ok}});
  json j = {{"base_map", r.base_map},
            {"grid_points", r.grid_points},
            {"epsilon", r.epsilon},
            {"trials", r.trials},
            {"persisted", r.persisted},
            {"fraction", r.fraction ? json(*r.fraction) : json(nullptr)},
            {"largest_passing", r.largest_passing},
            {"calibration", cal},
            {"outcomes", trials}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline json instability_json(const InstabilityDemo& d) {
  json terms = json::array();
  for (const auto& t : d.sequence.terms)
    terms.push_back({{"i", t.i},
                     {"x", vector_json(t.x)},
                     {"h_i", subspace_json(t.h_i)},
                     {"leaf", subspace_json(t.leaf)},
                     {"value_error", t.value_error},
                     {"image_angle", t.image_angle},
                     {"transverse", t.at_x.transverse},
                     {"defect", t.at_x.defect},
                     {"c1_distance", t.c1_distance}});
  return {{"x", d.x},
          {"y", d.y_stratum},
          {"point", vector_json(d.y)},
          {"fault", verdict_json(d.fault)},
          {"h", subspace_json(d.h)},
          {"base_map", d.sequence.base_source},
          {"base_transverse_at_y", d.base_at_y.transverse},
          {"base_min_singular", d.base_min_singular},
          {"radius", d.sequence.radius},
          {"terms", terms}};
}

inline json transversality_json(const TransversalityReport& r) {
  json j = {{"stratum", r.stratum},
            {"map", r.map},
            {"certified", r.base.certified},
            {"degree", r.base.degree},
            {"epsilon", r.eps},
            {"trials", r.trials},
            {"persisted", r.persisted},
            {"verdict", r.verdict}};
  if (r.base.certified) j["zero"] = vector_json(r.base.zero);
  return j;
}

/// Report skeleton; `timing` lives in its own field and is omitted when deterministic.
inline json report_header(const std::string& command, const Scene& sc, std::uint64_t seed) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(scene_hash(sc)));
  return {{"schema", kReportSchema},
          {"tool", {{"name", "strathom"}, {"version", kToolVersion}}},
          {"command", command},
          {"scene", {{"name", sc.name}, {"hash", hash}}},
          {"seed", seed}};
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180)

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_number(double v) { return dsl::format_number(v); }

inline std::string csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
    out += "\r\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

inline std::string stability_csv(const StabilityReport& r) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& t : r.outcomes)
    rows.push_back({std::to_string(t.trial), csv_number(r.epsilon), t.check.transverse ? "1" : "0"});
  return csv_table({"trial", "epsilon", "transverse"}, rows);
}

inline std::string instability_csv(const InstabilityDemo& d) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& t : d.sequence.terms)
    rows.push_back({std::to_string(t.i), csv_number(t.c1_distance), t.at_x.transverse ? "1" : "0",
                    std::to_string(t.at_x.defect)});
  return csv_table({"i", "c1_distance", "transverse", "defect"}, rows);
}

inline std::string sweep_csv(const std::vector<SweepPoint>& s) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : s)
    rows.push_back({csv_number(p.epsilon), std::to_string(p.trials), std::to_string(p.persisted),
                    csv_number(p.fraction)});
  return csv_table({"epsilon", "trials", "persisted", "fraction"}, rows);
}

}  // namespace strathom
