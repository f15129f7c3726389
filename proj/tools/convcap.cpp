#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "convcap/experiment.hpp"

namespace fs = std::filesystem;
using convcap::Json;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string grid;
  int jobs = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "experiment configuration (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "seed for random body generation");
  sub->add_option("--grid", c.grid, "grid options (JSON file)")->check(CLI::ExistingFile);
  sub->add_option("--jobs", c.jobs, "tasks run concurrently")->check(CLI::Range(1, 256));
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

/// Loads --config when given, else starts from `fallback`; CLI flags override.
Json assemble(const std::string& kind, const Common& c, Json fallback, std::string& base_dir) {
  Json cfg;
  if (!c.config.empty()) {
    cfg = convcap::read_json_file(c.config);
    base_dir = fs::path(c.config).parent_path().string();
    if (!cfg.contains("experiment")) cfg["experiment"] = kind;
    const std::string e = cfg["experiment"].is_string() ? cfg["experiment"].get<std::string>() : "";
    const bool compatible = e == kind || (kind == "verify-tree" && e == "sweep");
    if (!compatible) throw convcap::InputError("config experiment '" + e + "' does not match subcommand '" + kind + "'");
    for (auto it = fallback.begin(); it != fallback.end(); ++it) {
      if (it.key() != "experiment") cfg[it.key()] = it.value();
    }
  } else {
    cfg = std::move(fallback);
  }
  if (c.seed) cfg["seed"] = *c.seed;
  if (!c.grid.empty()) cfg["grid"] = convcap::read_json_file(c.grid);
  if (c.jobs > 1) cfg["jobs"] = c.jobs;
  return cfg;
}

int execute(const Json& cfg, const std::string& base_dir, const std::string& out_flag) {
  std::vector<convcap::Diagnostic> diags;
  convcap::ExperimentConfig c = convcap::parse_config(cfg, base_dir, diags);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << "error: " << d.str() << "\n";
    return 2;
  }
  std::string out = !out_flag.empty() ? out_flag : !c.output.empty() ? c.output : "out";
  if (out_flag.empty() && !c.output.empty() && fs::path(out).is_relative() && !base_dir.empty()) out = (fs::path(base_dir) / out).string();
  const convcap::RunManifest m = convcap::run(c, out);
  for (const auto& t : m.tasks) {
    std::cout << t.status << "  " << t.id;
    if (!t.message.empty()) std::cout << "  (" << t.message << ")";
    std::cout << "\n";
  }
  std::cout << m.tasks.size() << " task(s), " << m.files.size() << " file(s) in " << out << "\n";
  return m.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convex body capacity toolkit"};
  app.require_subcommand(1);

  Common cap_c, tree_c, sand_c, max_c, adm_c;
  std::vector<std::string> bodies;
  std::vector<double> ps;

  auto* cap = app.add_subcommand("capacity", "p-capacity of convex bodies");
  add_common(cap, cap_c);
  cap->add_option("--body", bodies, "body spec (JSON file), repeatable")->check(CLI::ExistingFile);
  cap->add_option("--p", ps, "exponent(s)");

  std::vector<std::string> tree_bodies;
  std::vector<double> tree_ps;
  int count = 0;
  double r0 = 1.0;
  auto* tree = app.add_subcommand("verify-tree", "radius inequalities; --count N runs a seeded random 2D sweep");
  add_common(tree, tree_c);
  tree->add_option("--body", tree_bodies, "body spec (JSON file), repeatable")->check(CLI::ExistingFile);
  tree->add_option("--p", tree_ps, "exponent(s)");
  tree->add_option("--count", count, "number of random 2D bodies")->check(CLI::NonNegativeNumber);
  tree->add_option("--r0", r0, "mean support value of random bodies")->check(CLI::PositiveNumber);
  std::optional<double> tolerance;
  tree->add_option("--tolerance", tolerance, "relative slack allowed per inequality")->check(CLI::Range(0.0, 1.0));

  std::vector<std::string> sand_bodies;
  std::vector<double> sand_ps;
  std::optional<double> alpha, beta;
  auto* sand = app.add_subcommand("sandwich", "surface bounds from curvature pinching");
  add_common(sand, sand_c);
  sand->add_option("--body", sand_bodies, "body spec (JSON file), repeatable")->check(CLI::ExistingFile);
  sand->add_option("--p", sand_ps, "exponent(s)");
  sand->add_option("--alpha", alpha, "lower bound on principal curvatures");
  sand->add_option("--beta", beta, "upper bound on mean curvature");

  std::string hfile, objective;
  std::vector<double> max_ps;
  std::optional<int> starts;
  auto* mx = app.add_subcommand("maximize", "gradient ascent of int_A h - cost(A)");
  mx->set_help_flag("--help", "Print this help message and exit");
  add_common(mx, max_c);
  mx->add_option("--h", hfile, "mass density preset (JSON file)")->check(CLI::ExistingFile);
  mx->add_option("--objective", objective, "pcap, surface or volume")->check(CLI::IsMember({"pcap", "surface", "volume"}));
  mx->add_option("--p", max_ps, "exponent(s)");
  mx->add_option("--starts", starts, "initial balls")->check(CLI::Range(1, 64));

  std::vector<std::string> profiles;
  std::vector<double> masses;
  auto* adm = app.add_subcommand("adm", "ADM mass of graphical manifolds");
  add_common(adm, adm_c);
  adm->add_option("--profile", profiles, "graph profile (JSON file), repeatable")->check(CLI::ExistingFile);
  adm->add_option("--m", masses, "Schwarzschild mass parameter(s)");

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "summarize a finished run as Markdown");
  rep->add_option("--out", report_dir, "output directory of the run")->required();

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "check a configuration without running it");
  val->add_option("--config", validate_path, "experiment configuration (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    std::string base;
    auto body_entries = [](const std::vector<std::string>& files) {
      Json a = Json::array();
      for (const auto& f : files) a.push_back({{"id", stem_of(f)}, {"file", fs::absolute(f).string()}});
      return a;
    };
    if (*cap) {
      Json f{{"experiment", "capacity"}};
      if (!bodies.empty()) f["bodies"] = body_entries(bodies);
      if (!ps.empty()) f["p"] = ps;
      return execute(assemble("capacity", cap_c, f, base), base, cap_c.out);
    }
    if (*tree) {
      Json f{{"experiment", count > 0 ? "sweep" : "verify-tree"}};
      if (!tree_bodies.empty()) f["bodies"] = body_entries(tree_bodies);
      if (!tree_ps.empty()) f["p"] = tree_ps;
      if (count > 0) f["sweep"] = {{"count", count}, {"r0", r0}};
      if (tolerance) f["tolerance"] = *tolerance;
      return execute(assemble("verify-tree", tree_c, f, base), base, tree_c.out);
    }
    if (*sand) {
      Json f{{"experiment", "sandwich"}};
      if (!sand_bodies.empty()) f["bodies"] = body_entries(sand_bodies);
      if (!sand_ps.empty()) f["p"] = sand_ps;
      if (alpha) f["alpha"] = *alpha;
      if (beta) f["beta"] = *beta;
      return execute(assemble("sandwich", sand_c, f, base), base, sand_c.out);
    }
    if (*mx) {
      Json f{{"experiment", "maximize"}};
      if (!hfile.empty()) f["density"] = fs::absolute(hfile).string();
      if (!objective.empty()) f["objective"] = objective;
      if (!max_ps.empty()) f["p"] = max_ps;
      if (starts) f["starts"] = *starts;
      return execute(assemble("maximize", max_c, f, base), base, max_c.out);
    }
    if (*adm) {
      Json f{{"experiment", "adm"}};
      Json pr = Json::array();
      for (const auto& p : profiles) {
        Json j = convcap::read_json_file(p);
        if (!j.contains("id")) j["id"] = stem_of(p);
        pr.push_back(j);
      }
      for (double m : masses) pr.push_back({{"kind", "schwarzschild"}, {"m", m}, {"id", "schwarzschild-" + convcap::detail::fmt(m)}});
      if (!pr.empty()) f["profiles"] = pr;
      return execute(assemble("adm", adm_c, f, base), base, adm_c.out);
    }
    if (*rep) {
      std::cout << convcap::report(report_dir);
      const Json man = convcap::read_json_file((fs::path(report_dir) / "manifest.json").string());
      return man.value("pass", false) ? 0 : 1;
    }
    if (*val) {
      const auto diags = convcap::validate_file(validate_path);
      for (const auto& d : diags) std::cerr << "error: " << d.str() << "\n";
      if (diags.empty()) std::cout << "ok\n";
      return diags.empty() ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
