// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [N ...]   (no argument runs every criterion)

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "strathom/strathom.hpp"

namespace {

using namespace strathom;

// Tolerances pinned by the acceptance contract.
constexpr double kWitnessAngleTol = 1e-6;
constexpr double kRankGap = 1e6;
constexpr double kIdentityTol = 1e-12;
constexpr std::size_t kInjectivityPairs = 100000;
constexpr std::size_t kRankPoints = 100;
constexpr std::size_t kTfTestsPerIncidence = 20;
constexpr double kContainmentTol = 1e-6;
constexpr std::size_t kStabilityTrials = 200;
constexpr std::size_t kMinDestabilizerTerms = 20;
constexpr std::size_t kGrassmannPairs = 1000;
constexpr double kAdFdTol = 1e-6;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------

Outcome golden_matrix() {
  std::vector<std::string> bad;
  double parabola_angle = 0.0;
  for (const auto& sc : gallery()) {
    if (sc.incidences.empty()) continue;
    const auto ctx = build_context(sc);
    CheckOptions opt;
    opt.conditions = {Condition::a, Condition::af};
    opt.seed = kSeed;
    const auto vs = check_scene(sc, ctx, opt);
    for (std::size_t k = 0; k < vs.size(); ++k) {
      const auto& v = vs[k];
      const std::size_t inc = k / 2;
      const std::string want = sc.expected.at(to_string(v.condition))[inc];
      if (want != short_name(v.status))
        bad.push_back(sc.name + "#" + std::to_string(inc) + " " + to_string(v.condition) + "=" + std::string(short_name(v.status)));
      if (v.status == Status::fails && !v.witness_arc) bad.push_back(sc.name + ": fault without witness");
      if (sc.name == "parabola-shelf" && v.condition == Condition::af) {
        parabola_angle = std::max(parabola_angle, std::abs(v.witness_angle - std::numbers::pi / 2));
      }
    }
  }
  if (parabola_angle > kWitnessAngleTol) bad.push_back("parabola-shelf witness angle off by " + num(parabola_angle));
  if (!bad.empty()) return {false, bad.front() + " (" + std::to_string(bad.size()) + " mismatches)"};
  return {true, "all gallery incidences match; parabola-shelf |angle - pi/2| = " + num(parabola_angle)};
}

Outcome rank_drop_suite() {
  std::ostringstream detail;
  for (auto [n, r] : {std::pair<Index, Index>{2, 1}, {3, 1}, {3, 2}, {5, 3}}) {
    const auto m = rank_drop_map(n, r);
    const VectorXd sv0 = Eigen::JacobiSVD<MatrixXd>(m.jacobian(VectorXd::Zero(n))).singularValues();
    const Index rank0 = detail::rank_from_singular_values(sv0, kRankTol);
    const double gap = sv0(r) == 0.0 ? std::numeric_limits<double>::infinity() : sv0(r - 1) / sv0(r);
    if (rank0 != r || gap < kRankGap)
      return {false, "(" + std::to_string(n) + "," + std::to_string(r) + ") center rank " + std::to_string(rank0)};
    Rng rng(derive_seed(kSeed, "rank-drop/" + std::to_string(n) + "/" + std::to_string(r)));
    for (std::size_t k = 0; k < kRankPoints; ++k) {
      // Off-center points with |a| in [0.25, 1.5]: closer in, the extra
      // singular values are positive but below the relative rank tolerance.
      const VectorXd z = unit_vector(rng, n) * uniform(rng, 0.25, 1.5);
      const VectorXd sv = Eigen::JacobiSVD<MatrixXd>(m.jacobian(z)).singularValues();
      if (detail::rank_from_singular_values(sv, kRankTol) != n)
        return {false, "rank below n at " + format_point(z)};
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < 1000; ++k) {
      const VectorXd z = unit_vector(rng, n) * uniform(rng, 1.0, 3.0);
      worst = std::max(worst, (m.eval(z) - z).cwiseAbs().maxCoeff());
    }
    if (worst > kIdentityTol) return {false, "not the identity outside the ball: " + num(worst)};
    const auto probe = probe_injectivity(m, kInjectivityPairs, kSeed);
    if (probe.collisions) return {false, std::to_string(probe.collisions) + " collisions"};
    detail << "(" << n << "," << r << ") ok ";
  }
  if (!radial_factor_monotone()) return {false, "radial factor not monotone"};
  return {true, detail.str() + "- " + std::to_string(kInjectivityPairs) + " pairs each, no collisions"};
}

Outcome af_afs_agreement() {
  std::size_t total = 0, disagree = 0;
  std::string first;
  for (const auto& sc : gallery()) {
    if (sc.incidences.empty()) continue;
    const auto ctx = build_context(sc);
    CheckOptions opt;
    opt.conditions = {Condition::af, Condition::afs};
    opt.seed = kSeed;
    const auto vs = check_scene(sc, ctx, opt);
    for (std::size_t k = 0; k + 1 < vs.size(); k += 2) {
      ++total;
      if (vs[k].status != vs[k + 1].status) {
        ++disagree;
        if (first.empty()) first = sc.name + "#" + std::to_string(k / 2);
      }
    }
  }
  if (disagree) return {false, std::to_string(disagree) + "/" + std::to_string(total) + " disagree, first " + first};
  return {true, std::to_string(total) + " incidences, 0 disagreements"};
}

Outcome af_implies_tf() {
  std::size_t checked = 0, counter = 0;
  std::string first;
  for (const auto& sc : gallery()) {
    if (sc.incidences.empty()) continue;
    const auto ctx = build_context(sc);
    const ApproachPlan plan = seeded_plan(sc, kSeed);
    const RadiusPlan rp = seeded_radius_plan(sc, kSeed);
    for (std::size_t i = 0; i < sc.incidences.size(); ++i) {
      const auto& inc = sc.incidences[i];
      const VectorXd p = incidence_point(inc);
      if (check_af_at(ctx, inc.x, inc.y, p, plan).status != Status::holds) continue;
      const Stratum& ys = ctx.stratum(inc.y);
      const Subspace leaf = leaf_tangent(ctx, ys, require_on_stratum(ys, p));
      for (std::size_t k = 0; k < kTfTestsPerIncidence; ++k) {
        const auto s = random_test_submanifold(leaf, p, derive_seed(kSeed, sc.name + "/" + std::to_string(i) + "/" + std::to_string(k)));
        ++checked;
        if (check_tf_at(ctx, inc.x, inc.y, p, s, rp).status != Status::holds) {
          ++counter;
          if (first.empty()) first = sc.name + "#" + std::to_string(i) + " test " + std::to_string(k);
        }
      }
    }
  }
  if (checked == 0) return {false, "no (a_f)-regular incidence found"};
  if (counter) return {false, std::to_string(counter) + " counterexamples, first " + first};
  return {true, std::to_string(checked) + " (incidence, submanifold) checks, 0 counterexamples"};
}

Outcome tf_witness_parabola() {
  const auto sc = gallery_scene("parabola-shelf");
  const auto ctx = build_context(sc);
  const VectorXd y = incidence_point(sc.incidences[0]);
  const auto af = check_af_at(ctx, "S1", "S2", y, seeded_plan(sc, kSeed));
  if (af.status != Status::fails) return {false, "no (a_f) fault at the origin"};
  const auto& arc = af.arcs[*af.witness_arc];
  const ArcCurve curve{arc.chart, arc.base, arc.direction * std::pow(arc.ratio, static_cast<double>(arc.first_index))};
  try {
    const auto w = tf_witness(ctx, "S1", "S2", y, curve, af.witness_vector);
    const Subspace leaf_y = af.required;
    const bool transverse = transverse_at(w.tangent_at_y, leaf_y, 3).transverse;
    double worst = 0.0;
    for (const auto& f : w.frames)
      if (!f.reflected) worst = std::max(worst, f.containment);
    const auto tf = check_tf_at(ctx, "S1", "S2", y, w.as_test(), seeded_radius_plan(sc, kSeed));
    const bool ok = transverse && worst < kContainmentTol && tf.status == Status::fails;
    return {ok, std::string("transverse at 0: ") + (transverse ? "yes" : "no") + ", max containment angle " +
                    num(worst) + ", (t_f) " + to_string(tf.status)};
  } catch (const Error& e) {
    return {false, std::string("construction failed: ") + e.what()};
  }
}

Outcome stability() {
  const auto sc = gallery_scene("parallel-planes");
  const auto ctx = build_context(sc);
  StabilitySpec spec = *sc.stability;
  spec.trials = kStabilityTrials;
  StabilityExperiment ex(ctx, spec);
  const auto r = ex.calibrate_and_run(kSeed);
  bool bisected = false;
  for (const auto& [e, ok] : r.calibration) bisected |= !ok;
  const bool pass = r.epsilon > 0.0 && bisected && r.trials == kStabilityTrials && r.persisted == r.trials;
  return {pass, "eps = " + num(r.epsilon) + " (largest passing " + num(r.largest_passing) + "), " +
                    std::to_string(r.persisted) + "/" + std::to_string(r.trials) + " transverse"};
}

Outcome instability() {
  const auto sc = gallery_scene("parabola-shelf");
  const auto ctx = build_context(sc);
  const auto d = instability_demo(sc, ctx, std::nullopt, kSeed);
  const auto& terms = d.sequence.terms;
  if (!d.base_at_y.transverse) return {false, "base map not transverse at y"};
  if (terms.size() < kMinDestabilizerTerms) return {false, "only " + std::to_string(terms.size()) + " terms"};
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    if (t.at_x.transverse || t.at_x.defect < 1) return {false, "term " + std::to_string(i) + " is transverse"};
    if (t.value_error > 1e-10 || t.image_angle > 1e-8) return {false, "term " + std::to_string(i) + " misses its value or image target"};
    if (i && !(t.c1_distance < terms[i - 1].c1_distance))
      return {false, "C1 distance not decreasing at " + std::to_string(i)};
  }
  return {true, std::to_string(terms.size()) + " terms, C1 distance " + num(terms.front().c1_distance) + " -> " +
                    num(terms.back().c1_distance) + ", defect >= 1 throughout"};
}

double ad_fd_error(const dsl::SmoothMap& f, const VectorXd& x) {
  const MatrixXd ad = f.jacobian(x);
  const MatrixXd fd = dsl::finite_difference_jacobian(f, x);
  return (ad - fd).cwiseAbs().maxCoeff() / std::max(1.0, ad.cwiseAbs().maxCoeff());
}

Outcome substrate() {
  // Grassmann dimension formula.
  Rng rng(derive_seed(kSeed, "grassmann"));
  std::normal_distribution<double> normal;
  auto gaussian = [&](Rng& r) { return normal(r); };
  for (std::size_t k = 0; k < kGrassmannPairs; ++k) {
    const Index n = 1 + static_cast<Index>(k % 8);
    const Index common = static_cast<Index>(rng() % static_cast<std::uint64_t>(n + 1));
    const Index extra_a = static_cast<Index>(rng() % static_cast<std::uint64_t>(n - common + 1));
    const Index extra_b = static_cast<Index>(rng() % static_cast<std::uint64_t>(n - common - extra_a + 1));
    MatrixXd q = Eigen::HouseholderQR<MatrixXd>(MatrixXd::NullaryExpr(n, n, [&] { return gaussian(rng); }))
                     .householderQ();
    MatrixXd a(n, common + extra_a), b(n, common + extra_b);
    a << q.leftCols(common), q.middleCols(common, extra_a);
    b << q.leftCols(common), q.middleCols(common + extra_a, extra_b);
    MatrixXd ma = a * MatrixXd::NullaryExpr(a.cols(), a.cols(), [&] { return gaussian(rng); });
    MatrixXd mb = b * MatrixXd::NullaryExpr(b.cols(), b.cols(), [&] { return gaussian(rng); });
    const Subspace sa = span_of(ma), sb = span_of(mb);
    const Index sum = subspace_sum(sa, sb).dim(), cap = subspace_intersection(sa, sb).dim();
    if (sa.dim() != a.cols() || sb.dim() != b.cols() || sum + cap != sa.dim() + sb.dim() || cap != common)
      return {false, "dimension formula broken for pair " + std::to_string(k)};
  }
  // AD against finite differences over the gallery's maps.
  double worst = 0.0;
  std::size_t evals = 0;
  for (const auto& sc : gallery()) {
    const auto p = build_prestratification(sc);
    const auto f = build_map(sc);
    Rng prng(derive_seed(kSeed, "adfd/" + sc.name));
    for (const auto& s : p.strata) {
      for (const auto& cp : sample_stratum(s, 20, prng)) {
        const auto& c = s.charts[cp.chart];
        worst = std::max(worst, ad_fd_error(c.map, cp.u));
        worst = std::max(worst, ad_fd_error(f, c.map.eval(cp.u)));
        evals += 2;
      }
    }
    for (const auto& inc : sc.incidences) {
      if (!inc.retraction) continue;
      const auto r = dsl::parse_map(*inc.retraction, static_cast<std::size_t>(sc.ambient));
      for (int k = 0; k < 20; ++k) {
        worst = std::max(worst, ad_fd_error(r, incidence_point(inc) + 0.2 * ball_vector(prng, sc.ambient)));
        ++evals;
      }
    }
    if (sc.transversality) {
      const auto& t = *sc.transversality;
      const auto g = dsl::parse_map(t.map, t.source_dim);
      const VectorXd c = Eigen::Map<const VectorXd>(t.center.data(), static_cast<Index>(t.center.size()));
      for (int k = 0; k < 20; ++k) {
        worst = std::max(worst, ad_fd_error(g, c + t.radius * ball_vector(prng, c.size())));
        ++evals;
      }
    }
    if (sc.stability) {
      const auto g = dsl::parse_map(sc.stability->map, sc.stability->source_dim);
      for (const auto& w : box_samples(sc.stability->box, 20, derive_seed(kSeed, "adfd/stability"))) {
        worst = std::max(worst, ad_fd_error(g, w));
        ++evals;
      }
    }
  }
  if (worst >= kAdFdTol) return {false, "AD vs FD relative error " + num(worst)};
  // Replay: two independent runs with the same seed give identical reports.
  for (const char* name : {"parallel-planes", "parabola-shelf", "blowup"}) {
    const auto sc = gallery_scene(name);
    std::string dumps[2];
    for (auto& d : dumps) {
      const auto ctx = build_context(sc, 64, kSeed);
      CheckOptions opt;
      opt.seed = kSeed;
      json vs = json::array();
      for (const auto& v : check_scene(sc, ctx, opt)) vs.push_back(verdict_json(v));
      d = vs.dump();
    }
    if (dumps[0] != dumps[1]) return {false, std::string("replay differs on ") + name};
  }
  return {true, std::to_string(kGrassmannPairs) + " subspace pairs exact; AD-FD max rel. error " + num(worst) +
                    " over " + std::to_string(evals) + " Jacobians; replay bit-identical"};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list = {
      {"golden verdict matrix", golden_matrix},
      {"rank-drop bijection", rank_drop_suite},
      {"(a_f) and (a_f^s) agree", af_afs_agreement},
      {"(a_f) implies (t_f)", af_implies_tf},
      {"(t_f) witness on parabola-shelf", tf_witness_parabola},
      {"empirical stability", stability},
      {"empirical instability", instability},
      {"numerical substrate", substrate},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> which;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria().size())) {
      std::cerr << "usage: acceptance [1-" << criteria().size() << " ...]\n";
      return 64;
    }
    which.push_back(static_cast<std::size_t>(k));
  }
  if (which.empty())
    for (std::size_t k = 1; k <= criteria().size(); ++k) which.push_back(k);
  bool all = true;
  for (std::size_t k : which) {
    const auto& [name, run] = criteria()[k - 1];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << k << " [" << name << "]: " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail
              << " (" << num(secs) << " s)\n";
    all &= o.pass;
  }
  return all ? 0 : 1;
}
