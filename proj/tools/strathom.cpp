// strathom command-line front end.
//
// Exit codes: 0 ok, 2 validation or precondition failure, 3 a regularity
// fault was found, 4 inconclusive verdicts only, 64 usage error or missing
// file, 65 bad scene data or unknown gallery entry, 70 internal numerical
// failure.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "strathom/strathom.hpp"

namespace {

using namespace strathom;

constexpr int kExitValidation = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitSoftware = 70;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scene load_scene(const std::string& arg) {
  const std::string prefix = "gallery:";
  if (arg.rfind(prefix, 0) == 0) return gallery_scene(arg.substr(prefix.size()));
  std::ifstream in(arg, std::ios::binary);
  if (!in) throw UsageError("cannot open scene file '" + arg + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene_text(ss.str());
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("STRATHOM_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("STRATHOM_SEED must be a non-negative integer");
  }
  return 1;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

struct Output {
  std::string json_path;
  std::string csv_path;
  bool deterministic = false;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  bool quiet() const { return json_path == "-" || csv_path == "-"; }

  void finish(json report) const {
    if (!deterministic) {
      const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      report["timing"] = {{"elapsed_ms", ms}};
    }
    if (!json_path.empty()) write_text(json_path, report.dump(2) + "\n");
  }
};

std::string fmt_point(const VectorXd& p) {
  std::ostringstream s;
  s << "(";
  for (Index i = 0; i < p.size(); ++i) s << (i ? ", " : "") << std::setprecision(4) << p(i);
  return s.str() + ")";
}

std::string verdict_detail(const RegularityVerdict& v) {
  std::ostringstream s;
  if (v.witness_arc) s << "angle " << std::setprecision(6) << v.witness_angle << " rad";
  for (const auto& r : v.radii)
    if (v.status == Status::fails && r.bad) {
      s << "witness at " << fmt_point(r.witness) << " (r = " << r.radius << ")";
      break;
    }
  if (!v.note.empty()) s << (s.tellp() > 0 ? "; " : "") << v.note;
  return s.str();
}

// ---------------------------------------------------------------------------

struct CommonArgs {
  std::string scene;
  std::uint64_t seed = 0;
  bool seed_given = false;
  Output out;
  std::size_t samples = 64;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool csv) {
  cmd->add_option("scene", a.scene, "Scene file, or gallery:<name>")->required();
  cmd->add_option("--seed", a.seed, "Seed (default: STRATHOM_SEED or 1)")
      ->each([&a](const std::string&) { a.seed_given = true; });
  cmd->add_option("--json", a.out.json_path, "Write the JSON report to FILE ('-' for stdout)");
  if (csv) cmd->add_option("--csv", a.out.csv_path, "Write CSV plot data to FILE ('-' for stdout)");
  cmd->add_flag("--deterministic", a.out.deterministic, "Omit the timing field from the report");
  cmd->add_option("--samples", a.samples, "Samples per stratum for rank certification")->check(CLI::PositiveNumber);
}

std::uint64_t seed_of(const CommonArgs& a) { return a.seed_given ? a.seed : default_seed(); }

int cmd_validate(const CommonArgs& a) {
  const Scene sc = load_scene(a.scene);
  const std::uint64_t seed = seed_of(a);
  json rep = report_header("validate", sc, seed);
  const auto ctx = build_context(sc, a.samples, seed);
  const auto v = validate_prestratification(ctx.strata(), a.samples, seed, seeded_plan(sc, seed));
  rep["validation"] = validation_json(v, ctx);
  rep["valid"] = true;
  if (!a.out.quiet()) {
    std::cout << "scene " << sc.name << ": valid prestratification\n";
    for (const auto& [name, cert] : ctx.ranks())
      std::cout << "  rank of f on " << name << ": " << cert.rank << "\n";
    for (const auto& c : v.incidences) {
      const auto& inc = sc.incidences[c.index];
      std::cout << "  incidence " << c.index << " (" << inc.x << " over " << inc.y << "): frontier points in "
                << inc.y << ": " << to_string(c.frontier) << "\n";
    }
    std::cout << "  frontier condition near incidences: " << to_string(v.frontier) << "\n";
    for (const auto& n : v.frontier_notes) std::cout << "    " << n << "\n";
  }
  a.out.finish(rep);
  return 0;
}

struct CheckArgs {
  std::string condition = "all";
  std::size_t tf_tests = 5;
  std::optional<double> ratio;
  std::optional<std::size_t> terms;
  std::optional<std::size_t> directions;
  std::optional<std::size_t> window;
  std::optional<double> angle_tol;
};

int cmd_check(const CommonArgs& a, const CheckArgs& c) {
  Scene sc = load_scene(a.scene);
  if (c.ratio) sc.plan.ratio = *c.ratio;
  if (c.terms) sc.plan.terms = *c.terms;
  if (c.directions) sc.plan.directions = *c.directions;
  if (c.window) sc.plan.window = *c.window;
  if (c.angle_tol) sc.plan.angle_tol = *c.angle_tol;
  sc.plan.validate();
  const std::uint64_t seed = seed_of(a);
  const auto ctx = build_context(sc, a.samples, seed);
  CheckOptions opt;
  opt.seed = seed;
  opt.tf_tests = c.tf_tests;
  if (c.condition != "all") opt.conditions = {parse_condition(c.condition)};
  const auto verdicts = check_scene(sc, ctx, opt);

  json rep = report_header("check", sc, seed);
  json plan = {{"ratio", sc.plan.ratio}, {"terms", sc.plan.terms}, {"directions", sc.plan.directions},
               {"window", sc.plan.window}, {"angle_tol", sc.plan.angle_tol}, {"limit_tol", sc.plan.limit_tol}};
  rep["plan"] = plan;
  json vs = json::array();
  for (const auto& v : verdicts) vs.push_back(verdict_json(v));
  rep["verdicts"] = vs;
  const int code = verdict_exit_code(verdicts);
  rep["exit_code"] = code;
  if (!a.out.quiet()) {
    std::cout << "scene " << sc.name << " (seed " << seed << ")\n";
    std::cout << std::left << std::setw(6) << "cond" << std::setw(8) << "X" << std::setw(8) << "Y" << std::setw(26)
              << "point" << std::setw(20) << "status" << "detail\n";
    for (const auto& v : verdicts)
      std::cout << std::left << std::setw(6) << to_string(v.condition) << std::setw(8) << v.x << std::setw(8) << v.y
                << std::setw(26) << fmt_point(v.point) << std::setw(20) << to_string(v.status) << verdict_detail(v)
                << "\n";
  }
  a.out.finish(rep);
  return code;
}

struct ExperimentArgs {
  bool stability = false;
  bool instability = false;
  bool transversality = false;
  bool sweep = false;
  std::optional<double> eps;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> count;
  std::vector<double> sweep_eps{0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0};
};

int cmd_experiment(const CommonArgs& a, const ExperimentArgs& e) {
  const int picked = e.stability + e.instability + e.transversality + e.sweep;
  if (picked != 1) throw UsageError("choose exactly one of --stability, --instability, --transversality, --sweep");
  const Scene sc = load_scene(a.scene);
  const std::uint64_t seed = seed_of(a);
  const auto ctx = build_context(sc, a.samples, seed);
  json rep = report_header("experiment", sc, seed);
  std::string csv;
  if (e.stability || e.sweep) {
    if (!sc.stability) throw PreconditionError("scene has no stability block");
    StabilitySpec spec = *sc.stability;
    if (e.trials) spec.trials = *e.trials;
    StabilityExperiment ex(ctx, spec);
    if (e.sweep) {
      const auto s = stability_sweep(ex, e.sweep_eps, spec.trials, seed);
      json pts = json::array();
      for (const auto& p : s)
        pts.push_back({{"epsilon", p.epsilon}, {"trials", p.trials}, {"persisted", p.persisted}, {"fraction", p.fraction}});
      rep["sweep"] = pts;
      csv = sweep_csv(s);
      if (!a.out.quiet())
        for (const auto& p : s) std::cout << "eps " << p.epsilon << ": " << p.persisted << "/" << p.trials << " transverse\n";
    } else {
      const auto r = e.eps ? ex.run(*e.eps, spec.trials, seed) : ex.calibrate_and_run(seed);
      rep["stability"] = stability_json(r);
      csv = stability_csv(r);
      if (!a.out.quiet()) {
        std::cout << "stability on " << sc.name << ": eps = " << r.epsilon << ", " << r.persisted << "/" << r.trials
                  << " perturbations transverse";
        if (r.fraction) std::cout << " (fraction " << *r.fraction << ")";
        if (!r.note.empty()) std::cout << "; " << r.note;
        std::cout << "\n";
      }
    }
  } else if (e.instability) {
    const auto d = instability_demo(sc, ctx, e.count, seed);
    rep["instability"] = instability_json(d);
    csv = instability_csv(d);
    if (!a.out.quiet()) {
      std::cout << "instability on " << sc.name << ": base transverse at y: " << (d.base_at_y.transverse ? "yes" : "no")
                << "\n";
      std::cout << std::left << std::setw(6) << "i" << std::setw(16) << "c1_distance" << "defect\n";
      for (const auto& t : d.sequence.terms)
        std::cout << std::left << std::setw(6) << t.i << std::setw(16) << std::setprecision(6) << t.c1_distance
                  << t.at_x.defect << "\n";
    }
  } else {
    if (!sc.transversality) throw PreconditionError("scene has no transversality block");
    TransversalitySpec spec = *sc.transversality;
    if (e.eps) spec.eps = *e.eps;
    if (e.trials) spec.trials = *e.trials;
    const auto r = NonTransversalityCertificate(ctx, spec).run(seed);
    rep["transversality"] = transversality_json(r);
    if (!a.out.quiet())
      std::cout << sc.name << ": " << r.verdict << " (degree " << r.base.degree << "), persists in " << r.persisted
                << "/" << r.trials << " perturbations of size " << r.eps << "\n";
  }
  if (!a.out.csv_path.empty()) {
    if (csv.empty()) throw UsageError("this experiment produces no CSV");
    write_text(a.out.csv_path, csv);
  }
  a.out.finish(rep);
  return 0;
}

int cmd_gallery(bool list, const std::string& emit) {
  if (list == !emit.empty()) throw UsageError("use exactly one of --list or --emit NAME");
  if (list) {
    for (const auto& sc : gallery()) std::cout << std::left << std::setw(24) << sc.name << sc.topic << "\n";
    return 0;
  }
  std::cout << to_json(gallery_scene(emit)).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strathom: regularity of foliated prestratifications"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("strathom ") + kToolVersion);

  CommonArgs common;
  CheckArgs check;
  ExperimentArgs exp;
  bool list = false;
  std::string emit;

  auto* validate = app.add_subcommand("validate", "Validate a scene's prestratification and constant ranks");
  add_common(validate, common, false);

  auto* chk = app.add_subcommand("check", "Run the regularity checkers on every incidence");
  add_common(chk, common, false);
  chk->add_option("--condition", check.condition, "Condition to check")
      ->check(CLI::IsMember({"a", "af", "tf", "afs", "all"}));
  chk->add_option("--tf-tests", check.tf_tests, "Random test submanifolds per incidence for (t_f)")
      ->check(CLI::PositiveNumber);
  chk->add_option("--ratio", check.ratio, "Approach ratio rho in (0, 1)");
  chk->add_option("--terms", check.terms, "Approach terms per arc");
  chk->add_option("--directions", check.directions, "Random approach directions");
  chk->add_option("--window", check.window, "Limit window length");
  chk->add_option("--angle-tol", check.angle_tol, "Containment angle tolerance");

  auto* ex = app.add_subcommand("experiment", "Run a stability, instability or transversality experiment");
  add_common(ex, common, true);
  ex->add_flag("--stability", exp.stability, "Perturbation persistence at a calibrated (or given) eps");
  ex->add_flag("--instability", exp.instability, "Destabilizing sequence at an (a_f) fault");
  ex->add_flag("--transversality", exp.transversality, "Non-transversality certificate and its persistence");
  ex->add_flag("--sweep", exp.sweep, "Persistence fraction over a list of eps values");
  ex->add_option("--eps", exp.eps, "Perturbation size (C^1)")->check(CLI::NonNegativeNumber);
  ex->add_option("--trials", exp.trials, "Number of perturbation trials");
  ex->add_option("--count", exp.count, "Number of destabilizer terms")->check(CLI::PositiveNumber);
  ex->add_option("--sweep-eps", exp.sweep_eps, "Comma-separated eps values for --sweep")->delimiter(',');

  auto* gal = app.add_subcommand("gallery", "List or emit built-in scenes");
  gal->add_flag("--list", list, "List the built-in scenes");
  gal->add_option("--emit", emit, "Write the named scene to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(common);
    if (*chk) return cmd_check(common, check);
    if (*ex) return cmd_experiment(common, exp);
    if (*gal) return cmd_gallery(list, emit);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnknownGalleryEntry& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const SchemaError& e) {
    std::cerr << "scene error: " << e.what() << "\n";
    return kExitData;
  } catch (const ValidationError& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    return kExitValidation;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    if (*ex && exp.instability)
      std::cerr << "hint: run 'strathom check " << common.scene
                << " --condition af' and point the instability block at an incidence that fails\n";
    else if (*ex)
      std::cerr << "hint: the experiment block of the scene must describe a map transverse on its grid\n";
    return kExitValidation;
  } catch (const strathom::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSoftware;
  }
  return kExitUsage;
}
