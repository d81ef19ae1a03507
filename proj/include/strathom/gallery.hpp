#pragma once

// Built-in scenes with their expected verdicts.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "strathom/dsl.hpp"
#include "strathom/error.hpp"
#include "strathom/random.hpp"
#include "strathom/scene.hpp"

namespace strathom {

class UnknownGalleryEntry : public Error {
 public:
  explicit UnknownGalleryEntry(const std::string& name)
      : Error("no gallery entry named '" + name + "'") {}
};

namespace gallery_detail {

inline ChartSpec chart(std::string map, std::vector<std::string> domain,
                       std::vector<std::pair<double, double>> box) {
  return {std::move(map), std::move(domain), std::move(box)};
}

inline std::vector<IncidenceSpec> axis_incidences(const std::string& x, const std::string& y) {
  return {{x, y, {0.0, 0.0, 0.0}, {}}, {x, y, {0.5, 0.0, 0.0}, {}}, {x, y, {-0.5, 0.0, 0.0}, {}}};
}

inline std::vector<std::string> repeat(const char* s, std::size_t n) {
  return std::vector<std::string>(n, s);
}

/// Seeded graph map (u, v) -> (c1 u + c2 v + small quadratic, u, v) into R^3.
inline std::string stability_base_map(std::uint64_t seed) {
  Rng rng(seed);
  const double c1 = uniform(rng, -1, 1), c2 = uniform(rng, -1, 1);
  const double a = uniform(rng, -1, 1), b = uniform(rng, -1, 1), c = uniform(rng, -1, 1);
  auto num = dsl::format_number;
  return num(c1) + "*x + " + num(c2) + "*y + 0.1*(" + num(a) + "*x^2 + " + num(b) + "*x*y + " +
         num(c) + "*y^2), x, y";
}

inline Scene parallel_planes(bool constant) {
  Scene sc;
  sc.name = constant ? "parallel-planes-const" : "parallel-planes";
  sc.topic = constant ? "f constant on strata: (a_f) coincides with (a)"
                      : "(a_f) holds while Whitney (a) fails";
  sc.description = "S1 = {z = 0, y > 0} over S2 = {y = 0}, f = " +
                   std::string(constant ? "0" : "y + z");
  sc.ambient = 3;
  sc.map = constant ? "0" : "y + z";
  sc.strata = {{"S1", 2, {chart("x, y, 0", {"y"}, {{-1, 1}, {0, 1}})}},
               {"S2", 2, {chart("x, 0, y", {}, {{-1, 1}, {-1, 1}})}}};
  sc.incidences = axis_incidences("S1", "S2");
  sc.expected["a"] = repeat("fails", 3);
  sc.expected["af"] = repeat(constant ? "fails" : "holds", 3);
  sc.expected["afs"] = repeat(constant ? "fails" : "holds", 3);
  if (!constant) {
    StabilitySpec st;
    st.source_dim = 2;
    st.map = stability_base_map(2024);
    st.box = {{-0.5, 0.5}, {-0.5, 0.5}};
    st.eps_max = 4.0;
    sc.stability = st;
  }
  return sc;
}

inline Scene parabola_shelf(bool constant) {
  Scene sc;
  sc.name = constant ? "parabola-shelf-const" : "parabola-shelf";
  sc.topic = constant ? "f constant on strata: (a_f) coincides with (a)"
                      : "Whitney (a) holds while (a_f) fails";
  sc.description = "S1 = {y = z^2, z < 0} over S2 = {y = 0}, f = " +
                   std::string(constant ? "0" : "y");
  sc.ambient = 3;
  sc.map = constant ? "0" : "y";
  sc.strata = {{"S1", 2, {chart("x, y^2, y", {"-y"}, {{-1, 1}, {-1, 0}})}},
               {"S2", 2, {chart("x, 0, y", {}, {{-1, 1}, {-1, 1}})}}};
  sc.incidences = axis_incidences("S1", "S2");
  sc.expected["a"] = repeat("holds", 3);
  sc.expected["af"] = repeat(constant ? "holds" : "fails", 3);
  sc.expected["afs"] = repeat(constant ? "holds" : "fails", 3);
  if (!constant) sc.instability = InstabilitySpec{};
  return sc;
}

/// Blow-up of the plane at 0 as a Moebius band in R^3: the core circle
/// X = beta^-1(0) and the open band Y minus the core, each in two charts.
/// theta in one chart covers (0, pi), the other (-pi/2, pi/2); the band
/// coordinate s satisfies 0 < |s| < 1.
inline Scene blowup() {
  Scene sc;
  sc.name = "blowup";
  sc.topic = "blow-up of the plane at 0: not a_beta-regular on the exceptional stratum";
  sc.description =
      "beta(theta, s) = (s cos theta, s sin theta) on a Moebius band; f extends beta to R^3";
  sc.ambient = 3;
  sc.map = "sqrt(x^2 + y^2) - 2, z";
  const std::string core = "2*cos(2*x), 2*sin(2*x), 0";
  const std::string band = "(2 + y*cos(x))*cos(2*x), (2 + y*cos(x))*sin(2*x), y*sin(x)";
  const double pi = std::numbers::pi;
  sc.strata = {
      {"X", 1,
       {chart(core, {"x", "pi - x"}, {{0, pi}}),
        chart(core, {"x + pi/2", "pi/2 - x"}, {{-pi / 2, pi / 2}})}},
      {"Y", 2,
       {chart(band, {"x", "pi - x", "y^2", "1 - y^2"}, {{0, pi}, {-1, 1}}),
        chart(band, {"x + pi/2", "pi/2 - x", "y^2", "1 - y^2"}, {{-pi / 2, pi / 2}, {-1, 1}})}}};
  const std::string radial = "2*x/sqrt(x^2 + y^2), 2*y/sqrt(x^2 + y^2), 0";
  for (double theta : {0.3, 1.2, 2.5})
    sc.incidences.push_back(
        {"Y", "X", {2 * std::cos(2 * theta), 2 * std::sin(2 * theta), 0.0}, radial});
  sc.expected["a"] = repeat("holds", 3);
  sc.expected["af"] = repeat("fails", 3);
  sc.expected["afs"] = repeat("fails", 3);
  return sc;
}

/// The plane foliated by horizontal lines (f = y).
inline Scene foliated_plane(std::string name, std::string topic, std::string source,
                            double center) {
  Scene sc;
  sc.name = std::move(name);
  sc.topic = std::move(topic);
  sc.description = "map R^1 -> R^2 = " + source + " against the foliation by lines parallel to the x-axis";
  sc.ambient = 2;
  sc.map = "y";
  sc.strata = {{"N", 2, {chart("x, y", {}, {{-2, 2}, {-2, 2}})}}};
  TransversalitySpec t;
  t.stratum = "N";
  t.source_dim = 1;
  t.map = std::move(source);
  t.center = {center};
  t.radius = 0.3;
  sc.transversality = t;
  sc.expected["transversality"] = {"non-transverse"};
  return sc;
}

inline Scene sphere_disc() {
  Scene sc;
  sc.name = "sphere-disc";
  sc.topic = "projection of the sphere onto a disc against the circle foliated by points";
  sc.description =
      "M = S^2 in spherical coordinates, projected onto the unit disc centred at (0.5, 0); "
      "the unit circle is foliated by its points";
  sc.ambient = 2;
  sc.map = "x, y";
  sc.strata = {{"C", 1,
                {chart("cos(x), sin(x)", {"x + 2", "2 - x"}, {{-2, 2}}),
                 chart("cos(x), sin(x)", {"x - 1", "5.3 - x"}, {{1, 5.3}})}}};
  TransversalitySpec t;
  t.stratum = "C";
  t.source_dim = 2;
  t.map = "sin(y)*cos(x) + 0.5, sin(y)*sin(x)";
  t.implicit = "x^2 + y^2 - 1";
  t.center = {std::acos(-0.25), std::numbers::pi / 2};
  t.radius = 0.3;
  sc.transversality = t;
  sc.expected["transversality"] = {"non-transverse"};
  return sc;
}

}  // namespace gallery_detail

inline std::vector<Scene> gallery() {
  using namespace gallery_detail;
  return {parallel_planes(false),
          parabola_shelf(false),
          parallel_planes(true),
          parabola_shelf(true),
          blowup(),
          foliated_plane("circle-foliated-plane",
                         "embedded circle in the plane foliated by horizontal lines", "cos(x), sin(x)",
                         std::numbers::pi / 2),
          foliated_plane("cubic-graph", "graph of x^3 - x in the plane foliated by horizontal lines",
                         "x, x^3 - x", 1.0 / std::sqrt(3.0)),
          sphere_disc()};
}

inline Scene gallery_scene(const std::string& name) {
  for (auto& sc : gallery())
    if (sc.name == name) return sc;
  throw UnknownGalleryEntry(name);
}

}  // namespace strathom
