#include <gtest/gtest.h>

#include "strathom/gallery.hpp"
#include "strathom/strata.hpp"

using namespace strathom;

namespace {

json line_scene(const std::string& f) {
  return json::parse(R"({
    "schema": "scene-v1", "name": "line", "ambient": 2, "map": ")" + f + R"(",
    "strata": [{"name": "L", "dim": 1, "charts": [{"map": "x, 0", "box": [[-1, 1]]}]}]
  })");
}

std::string pointer_of(const json& doc) {
  try {
    parse_scene(doc);
  } catch (const SchemaError& e) {
    return e.pointer();
  }
  return "<accepted>";
}

}  // namespace

TEST(Scene, SchemaErrorsCarryPointers) {
  const json base = to_json(gallery_scene("parallel-planes"));
  EXPECT_EQ(pointer_of(base), "<accepted>");

  json d = base;
  d.erase("map");
  EXPECT_EQ(pointer_of(d), "/map");

  d = base;
  d["strata"][1]["charts"][0]["box"] = json::array({json::array({-1, 1})});
  EXPECT_EQ(pointer_of(d), "/strata/1/charts/0/box");

  d = base;
  d["strata"][0]["charts"][0]["map"] = "x, y";
  EXPECT_EQ(pointer_of(d), "/strata/0/charts/0/map");

  d = base;
  d["incidences"][2]["y"] = "S3";
  EXPECT_EQ(pointer_of(d), "/incidences/2/y");

  d = base;
  d["incidences"][0]["point"] = json::array({0.0, 0.0});
  EXPECT_EQ(pointer_of(d), "/incidences/0/point");

  d = base;
  d["map"] = "y + ";
  EXPECT_EQ(pointer_of(d), "/map");

  d = base;
  d["schema"] = "scene-v0";
  EXPECT_EQ(pointer_of(d), "/schema");
}

TEST(Scene, EmitParseIsStable) {
  for (const auto& sc : gallery()) {
    const json j = to_json(sc);
    EXPECT_EQ(to_json(parse_scene(j)), j) << sc.name;
    EXPECT_EQ(scene_hash(parse_scene(j)), scene_hash(sc));
  }
}

TEST(Strata, ConstantRankViolationNamesTwoPoints) {
  const Scene sc = parse_scene(line_scene("bump(x)"));
  try {
    build_context(sc);
    FAIL() << "rank-varying map accepted";
  } catch (const ConstantRankViolation& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("1 at"), std::string::npos) << msg;
    EXPECT_NE(msg.find("0 at"), std::string::npos) << msg;
  }
}

TEST(Strata, ConstantRankReported) {
  const auto ctx = build_context(gallery_scene("parallel-planes"));
  EXPECT_EQ(ctx.rank("S1").rank, 1);
  EXPECT_EQ(ctx.rank("S2").rank, 1);
  const auto shelf = build_context(gallery_scene("parabola-shelf"));
  EXPECT_EQ(shelf.rank("S1").rank, 1);
  EXPECT_EQ(shelf.rank("S2").rank, 0);
}

TEST(Strata, OverlapDetected) {
  json d = to_json(gallery_scene("parallel-planes"));
  d["strata"][1]["charts"][0]["map"] = "x, y, 0";
  d.erase("incidences");
  d.erase("expected");
  d.erase("stability");
  const Scene sc = parse_scene(d);
  EXPECT_THROW(validate_prestratification(build_prestratification(sc), 32, 1), OverlapError);
}

TEST(Strata, FrontierPointsAreNotOverlaps) {
  // The blow-up band accumulates on the core circle from inside its domain.
  const Scene sc = gallery_scene("blowup");
  EXPECT_NO_THROW(validate_prestratification(build_prestratification(sc), 64, 1, sc.plan));
}

TEST(Strata, FrontierProbe) {
  // The closure of the half plane meets S2 in the x-axis only: every frontier
  // point near the incidences is in S2, yet S2 is not inside that closure.
  const Scene sc = gallery_scene("parallel-planes");
  const auto rep = validate_prestratification(build_prestratification(sc), 64, 1, sc.plan);
  ASSERT_EQ(rep.incidences.size(), 3u);
  for (const auto& c : rep.incidences) EXPECT_EQ(c.frontier, FrontierStatus::satisfied);
  EXPECT_EQ(rep.frontier, FrontierStatus::violated);
  EXPECT_FALSE(rep.frontier_notes.empty());
}

TEST(Strata, IncidenceOffStratumRejected) {
  json d = to_json(gallery_scene("parallel-planes"));
  d["incidences"][0]["point"] = json::array({0.0, 0.5, 0.0});
  const Scene sc = parse_scene(d);
  EXPECT_THROW(validate_prestratification(build_prestratification(sc), 32, 1, sc.plan), ValidationError);
}

TEST(Strata, BoundaryDistance) {
  const auto m = dsl::parse_map("x, y", 2, {"y", "1 - x^2"});
  EXPECT_NEAR(m.boundary_distance(Eigen::Vector2d(0.0, 0.25)), 0.25, 1e-12);
  EXPECT_NEAR(m.boundary_distance(Eigen::Vector2d(0.6, 0.9)), 0.64 / 1.2, 1e-12);
  EXPECT_EQ(m.boundary_distance(Eigen::Vector2d(0.0, -0.1)), 0.0);
  EXPECT_TRUE(std::isinf(dsl::parse_map("x", 1).boundary_distance(VectorXd::Constant(1, 3.0))));
}
