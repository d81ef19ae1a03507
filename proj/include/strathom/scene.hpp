#pragma once

// Scene files: one JSON document ("scene-v1") describing the ambient space,
// the map f, the strata, the incidences and optional experiment blocks.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "strathom/dsl.hpp"
#include "strathom/error.hpp"
#include "strathom/random.hpp"
#include "strathom/regularity.hpp"
#include "strathom/strata.hpp"

namespace strathom {

using json = nlohmann::json;

inline constexpr const char* kSceneSchema = "scene-v1";

struct ChartSpec {
  std::string map;
  std::vector<std::string> domain;
  std::vector<std::pair<double, double>> box;
};

struct StratumSpec {
  std::string name;
  Index dim = 0;
  std::vector<ChartSpec> charts;
};

struct IncidenceSpec {
  std::string x;
  std::string y;
  std::vector<double> point;
  /// Optional local retraction onto the Y-leaf through the point.
  std::optional<std::string> retraction;
};

struct StabilitySpec {
  std::size_t source_dim = 2;
  std::string map;
  std::vector<std::pair<double, double>> box;
  std::size_t grid = 32;
  std::size_t trials = 200;
  std::size_t calibration_trials = 24;
  std::size_t bisection_steps = 10;
  double eps_max = 1.0;
  double band = 0.05;
  double margin = 1e-3;
  std::size_t bumps = 6;
};

struct InstabilitySpec {
  std::size_t incidence = 0;
  std::size_t count = 25;
  double chart_radius = 1.0;
  double radius = 0.5;
};

/// A map from a parameter space of M into N tested against one foliated
/// stratum; the certificate region is an interval (dim 1) or a loop (dim 2).
struct TransversalitySpec {
  std::string stratum;
  std::size_t source_dim = 1;
  std::string map;
  std::optional<std::string> implicit;
  std::vector<double> center;
  double radius = 0.5;
  double eps = 1e-2;
  std::size_t trials = 50;
};

struct Scene {
  std::string name;
  std::string topic;
  std::string description;
  Index ambient = 0;
  std::string map;
  std::vector<StratumSpec> strata;
  std::vector<IncidenceSpec> incidences;
  ApproachPlan plan;
  RadiusPlan radius_plan;
  std::optional<StabilitySpec> stability;
  std::optional<InstabilitySpec> instability;
  std::optional<TransversalitySpec> transversality;
  /// condition -> expected status per incidence ("holds" / "fails").
  std::map<std::string, std::vector<std::string>> expected;
};

// ---------------------------------------------------------------------------
// Reading

namespace detail {

inline const json& require(const json& obj, const std::string& key, const std::string& ptr) {
  if (!obj.is_object()) throw SchemaError(ptr, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(ptr + "/" + key, "required field is missing");
  return *it;
}

inline std::string get_string(const json& v, const std::string& ptr) {
  if (!v.is_string()) throw SchemaError(ptr, "expected a string");
  return v.get<std::string>();
}

inline double get_number(const json& v, const std::string& ptr) {
  if (!v.is_number()) throw SchemaError(ptr, "expected a number");
  return v.get<double>();
}

inline std::size_t get_count(const json& v, const std::string& ptr) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw SchemaError(ptr, "expected a non-negative integer");
  return v.get<std::size_t>();
}

inline std::vector<double> get_vector(const json& v, const std::string& ptr) {
  if (!v.is_array()) throw SchemaError(ptr, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(get_number(v[i], ptr + "/" + std::to_string(i)));
  return out;
}

inline std::vector<std::string> get_strings(const json& v, const std::string& ptr) {
  if (!v.is_array()) throw SchemaError(ptr, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(get_string(v[i], ptr + "/" + std::to_string(i)));
  return out;
}

inline std::vector<std::pair<double, double>> get_box(const json& v, const std::string& ptr) {
  if (!v.is_array()) throw SchemaError(ptr, "expected an array of [lo, hi] pairs");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = ptr + "/" + std::to_string(i);
    auto pair = get_vector(v[i], p);
    if (pair.size() != 2 || !(pair[0] < pair[1])) throw SchemaError(p, "expected [lo, hi] with lo < hi");
    out.emplace_back(pair[0], pair[1]);
  }
  return out;
}

template <class T, class F>
void optional_field(const json& obj, const char* key, const std::string& ptr, T& out, F get) {
  auto it = obj.find(key);
  if (it != obj.end()) out = get(*it, ptr + "/" + key);
}

/// Parses DSL text; parse errors are reported against the JSON location.
inline dsl::SmoothMap parse_dsl(const std::string& src, std::size_t n,
                                const std::vector<std::string>& domain, const std::string& ptr) {
  try {
    return dsl::parse_map(src, n, domain);
  } catch (const ParseError& e) {
    throw SchemaError(ptr, std::string("DSL error at ") + std::to_string(e.line()) + ":" +
                               std::to_string(e.column()) + ": " + e.what());
  }
}

}  // namespace detail

inline Scene parse_scene(const json& doc) {
  using namespace detail;
  Scene sc;
  if (!doc.is_object()) throw SchemaError("", "scene must be a JSON object");
  if (get_string(require(doc, "schema", ""), "/schema") != kSceneSchema)
    throw SchemaError("/schema", std::string("unsupported schema, expected ") + kSceneSchema);
  sc.name = get_string(require(doc, "name", ""), "/name");
  optional_field(doc, "topic", "", sc.topic, get_string);
  optional_field(doc, "description", "", sc.description, get_string);
  const auto ambient = get_count(require(doc, "ambient", ""), "/ambient");
  if (ambient < 1 || ambient > dsl::kMaxVars) throw SchemaError("/ambient", "ambient dimension out of range");
  sc.ambient = static_cast<Index>(ambient);
  sc.map = get_string(require(doc, "map", ""), "/map");
  parse_dsl(sc.map, ambient, {}, "/map");

  const json& strata = require(doc, "strata", "");
  if (!strata.is_array() || strata.empty()) throw SchemaError("/strata", "expected a non-empty array");
  for (std::size_t i = 0; i < strata.size(); ++i) {
    const std::string p = "/strata/" + std::to_string(i);
    StratumSpec ss;
    ss.name = get_string(require(strata[i], "name", p), p + "/name");
    for (const auto& other : sc.strata)
      if (other.name == ss.name) throw SchemaError(p + "/name", "duplicate stratum name");
    const auto dim = get_count(require(strata[i], "dim", p), p + "/dim");
    if (dim > ambient) throw SchemaError(p + "/dim", "stratum dimension exceeds the ambient");
    ss.dim = static_cast<Index>(dim);
    const json& charts = require(strata[i], "charts", p);
    if (!charts.is_array() || charts.empty()) throw SchemaError(p + "/charts", "expected a non-empty array");
    for (std::size_t c = 0; c < charts.size(); ++c) {
      const std::string cp = p + "/charts/" + std::to_string(c);
      ChartSpec cs;
      cs.map = get_string(require(charts[c], "map", cp), cp + "/map");
      optional_field(charts[c], "domain", cp, cs.domain, get_strings);
      optional_field(charts[c], "box", cp, cs.box, get_box);
      if (cs.box.size() != dim) throw SchemaError(cp + "/box", "box must have one [lo, hi] per chart coordinate");
      auto m = parse_dsl(cs.map, dim, cs.domain, cp);
      if (static_cast<Index>(m.output_dim()) != sc.ambient)
        throw SchemaError(cp + "/map", "chart must have " + std::to_string(ambient) + " components");
      ss.charts.push_back(std::move(cs));
    }
    sc.strata.push_back(std::move(ss));
  }
  auto has_stratum = [&](const std::string& n) {
    for (const auto& s : sc.strata)
      if (s.name == n) return true;
    return false;
  };

  if (auto it = doc.find("incidences"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError("/incidences", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = "/incidences/" + std::to_string(i);
      const json& e = (*it)[i];
      IncidenceSpec inc;
      inc.x = get_string(require(e, "x", p), p + "/x");
      inc.y = get_string(require(e, "y", p), p + "/y");
      if (!has_stratum(inc.x)) throw SchemaError(p + "/x", "unknown stratum '" + inc.x + "'");
      if (!has_stratum(inc.y)) throw SchemaError(p + "/y", "unknown stratum '" + inc.y + "'");
      inc.point = get_vector(require(e, "point", p), p + "/point");
      if (inc.point.size() != ambient) throw SchemaError(p + "/point", "point has the wrong dimension");
      if (auto r = e.find("retraction"); r != e.end()) {
        inc.retraction = get_string(*r, p + "/retraction");
        auto m = parse_dsl(*inc.retraction, ambient, {}, p + "/retraction");
        if (m.output_dim() != ambient) throw SchemaError(p + "/retraction", "retraction must map R^n to R^n");
      }
      sc.incidences.push_back(std::move(inc));
    }
  }

  if (auto it = doc.find("plan"); it != doc.end()) {
    const std::string p = "/plan";
    optional_field(*it, "ratio", p, sc.plan.ratio, get_number);
    optional_field(*it, "terms", p, sc.plan.terms, get_count);
    optional_field(*it, "directions", p, sc.plan.directions, get_count);
    optional_field(*it, "window", p, sc.plan.window, get_count);
    optional_field(*it, "angle_tol", p, sc.plan.angle_tol, get_number);
    optional_field(*it, "limit_tol", p, sc.plan.limit_tol, get_number);
    optional_field(*it, "r0", p, sc.radius_plan.r0, get_number);
    optional_field(*it, "radius_ratio", p, sc.radius_plan.ratio, get_number);
    optional_field(*it, "radii", p, sc.radius_plan.radii, get_count);
    optional_field(*it, "samples", p, sc.radius_plan.samples, get_count);
    try {
      sc.plan.validate();
    } catch (const PreconditionError& e) {
      throw SchemaError(p, e.what());
    }
  }

  if (auto it = doc.find("experiments"); it != doc.end()) {
    const std::string p = "/experiments";
    if (auto st = it->find("stability"); st != it->end()) {
      const std::string q = p + "/stability";
      StabilitySpec s;
      s.source_dim = get_count(require(*st, "source_dim", q), q + "/source_dim");
      s.map = get_string(require(*st, "map", q), q + "/map");
      s.box = get_box(require(*st, "box", q), q + "/box");
      if (s.box.size() != s.source_dim) throw SchemaError(q + "/box", "box must match source_dim");
      auto m = parse_dsl(s.map, s.source_dim, {}, q + "/map");
      if (static_cast<Index>(m.output_dim()) != sc.ambient) throw SchemaError(q + "/map", "map must land in the ambient space");
      optional_field(*st, "grid", q, s.grid, get_count);
      optional_field(*st, "trials", q, s.trials, get_count);
      optional_field(*st, "calibration_trials", q, s.calibration_trials, get_count);
      optional_field(*st, "bisection_steps", q, s.bisection_steps, get_count);
      optional_field(*st, "eps_max", q, s.eps_max, get_number);
      optional_field(*st, "band", q, s.band, get_number);
      optional_field(*st, "margin", q, s.margin, get_number);
      optional_field(*st, "bumps", q, s.bumps, get_count);
      sc.stability = s;
    }
    if (auto in = it->find("instability"); in != it->end()) {
      const std::string q = p + "/instability";
      InstabilitySpec s;
      optional_field(*in, "incidence", q, s.incidence, get_count);
      optional_field(*in, "count", q, s.count, get_count);
      optional_field(*in, "chart_radius", q, s.chart_radius, get_number);
      optional_field(*in, "radius", q, s.radius, get_number);
      if (s.incidence >= sc.incidences.size()) throw SchemaError(q + "/incidence", "no such incidence");
      sc.instability = s;
    }
    if (auto tr = it->find("transversality"); tr != it->end()) {
      const std::string q = p + "/transversality";
      TransversalitySpec s;
      s.stratum = get_string(require(*tr, "stratum", q), q + "/stratum");
      if (!has_stratum(s.stratum)) throw SchemaError(q + "/stratum", "unknown stratum '" + s.stratum + "'");
      s.source_dim = get_count(require(*tr, "source_dim", q), q + "/source_dim");
      if (s.source_dim < 1 || s.source_dim > 2) throw SchemaError(q + "/source_dim", "expected 1 or 2");
      s.map = get_string(require(*tr, "map", q), q + "/map");
      auto m = parse_dsl(s.map, s.source_dim, {}, q + "/map");
      if (static_cast<Index>(m.output_dim()) != sc.ambient) throw SchemaError(q + "/map", "map must land in the ambient space");
      if (auto im = tr->find("implicit"); im != tr->end()) {
        s.implicit = get_string(*im, q + "/implicit");
        parse_dsl(*s.implicit, ambient, {}, q + "/implicit");
      }
      s.center = get_vector(require(*tr, "center", q), q + "/center");
      if (s.center.size() != s.source_dim) throw SchemaError(q + "/center", "center must match source_dim");
      optional_field(*tr, "radius", q, s.radius, get_number);
      optional_field(*tr, "eps", q, s.eps, get_number);
      optional_field(*tr, "trials", q, s.trials, get_count);
      sc.transversality = s;
    }
  }

  if (auto it = doc.find("expected"); it != doc.end()) {
    if (!it->is_object()) throw SchemaError("/expected", "expected an object");
    for (auto e = it->begin(); e != it->end(); ++e) {
      const std::string p = "/expected/" + e.key();
      auto list = get_strings(e.value(), p);
      for (std::size_t i = 0; i < list.size(); ++i)
        if (list[i] != "holds" && list[i] != "fails" && list[i] != "non-transverse")
          throw SchemaError(p + "/" + std::to_string(i), "unknown expected status '" + list[i] + "'");
      sc.expected[e.key()] = std::move(list);
    }
  }
  return sc;
}

inline Scene parse_scene_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_scene(doc);
}

// ---------------------------------------------------------------------------
// Writing

inline json box_to_json(const std::vector<std::pair<double, double>>& box) {
  json out = json::array();
  for (const auto& [lo, hi] : box) out.push_back({lo, hi});
  return out;
}

inline json to_json(const Scene& sc) {
  json doc;
  doc["schema"] = kSceneSchema;
  doc["name"] = sc.name;
  if (!sc.topic.empty()) doc["topic"] = sc.topic;
  if (!sc.description.empty()) doc["description"] = sc.description;
  doc["ambient"] = sc.ambient;
  doc["map"] = sc.map;
  json strata = json::array();
  for (const auto& s : sc.strata) {
    json charts = json::array();
    for (const auto& c : s.charts) {
      json cj{{"map", c.map}, {"box", box_to_json(c.box)}};
      if (!c.domain.empty()) cj["domain"] = c.domain;
      charts.push_back(cj);
    }
    strata.push_back({{"name", s.name}, {"dim", s.dim}, {"charts", charts}});
  }
  doc["strata"] = strata;
  json inc = json::array();
  for (const auto& i : sc.incidences) {
    json ij{{"x", i.x}, {"y", i.y}, {"point", i.point}};
    if (i.retraction) ij["retraction"] = *i.retraction;
    inc.push_back(ij);
  }
  doc["incidences"] = inc;
  doc["plan"] = {{"ratio", sc.plan.ratio},        {"terms", sc.plan.terms},
                 {"directions", sc.plan.directions}, {"window", sc.plan.window},
                 {"angle_tol", sc.plan.angle_tol},   {"limit_tol", sc.plan.limit_tol},
                 {"r0", sc.radius_plan.r0},           {"radius_ratio", sc.radius_plan.ratio},
                 {"radii", sc.radius_plan.radii},     {"samples", sc.radius_plan.samples}};
  json ex = json::object();
  if (sc.stability) {
    const auto& s = *sc.stability;
    ex["stability"] = {{"source_dim", s.source_dim},
                       {"map", s.map},
                       {"box", box_to_json(s.box)},
                       {"grid", s.grid},
                       {"trials", s.trials},
                       {"calibration_trials", s.calibration_trials},
                       {"bisection_steps", s.bisection_steps},
                       {"eps_max", s.eps_max},
                       {"band", s.band},
                       {"margin", s.margin},
                       {"bumps", s.bumps}};
  }
  if (sc.instability) {
    const auto& s = *sc.instability;
    ex["instability"] = {{"incidence", s.incidence},
                         {"count", s.count},
                         {"chart_radius", s.chart_radius},
                         {"radius", s.radius}};
  }
  if (sc.transversality) {
    const auto& s = *sc.transversality;
    json t{{"stratum", s.stratum}, {"source_dim", s.source_dim}, {"map", s.map},
           {"center", s.center},   {"radius", s.radius},         {"eps", s.eps},
           {"trials", s.trials}};
    if (s.implicit) t["implicit"] = *s.implicit;
    ex["transversality"] = t;
  }
  if (!ex.empty()) doc["experiments"] = ex;
  if (!sc.expected.empty()) doc["expected"] = sc.expected;
  return doc;
}

/// FNV-1a of the canonical (sorted-key) serialization.
inline std::uint64_t scene_hash(const Scene& sc) { return fnv1a64(to_json(sc).dump()); }

// ---------------------------------------------------------------------------
// Building

inline Prestratification build_prestratification(const Scene& sc) {
  Prestratification p;
  p.n = sc.ambient;
  for (const auto& ss : sc.strata) {
    std::vector<Chart> charts;
    for (const auto& c : ss.charts) {
      VectorXd lo(ss.dim), hi(ss.dim);
      for (Index i = 0; i < ss.dim; ++i) {
        lo(i) = c.box[static_cast<std::size_t>(i)].first;
        hi(i) = c.box[static_cast<std::size_t>(i)].second;
      }
      charts.push_back(make_chart(c.map, ss.dim, c.domain, lo, hi));
    }
    p.strata.push_back(make_stratum(ss.name, ss.dim, sc.ambient, std::move(charts)));
  }
  for (const auto& i : sc.incidences)
    p.incidences.push_back({i.x, i.y, Eigen::Map<const VectorXd>(i.point.data(),
                                                                 static_cast<Index>(i.point.size()))});
  return p;
}

inline dsl::SmoothMap build_map(const Scene& sc) {
  return dsl::parse_map(sc.map, static_cast<std::size_t>(sc.ambient));
}

inline StratifiedMapContext build_context(const Scene& sc, std::size_t samples = 64,
                                          std::uint64_t seed = 1) {
  return StratifiedMapContext(build_map(sc), build_prestratification(sc), samples, seed);
}

}  // namespace strathom
