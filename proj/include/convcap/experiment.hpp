#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "convcap/io.hpp"
#include "convcap/svg.hpp"

namespace convcap {

inline constexpr const char* kVersion = "1.0.0";

inline const std::map<std::string, std::string>& module_versions() {
  static const std::map<std::string, std::string> v{{"convex_geometry", kVersion}, {"capacity_solver", kVersion},
                                                    {"radius_tree", kVersion},     {"yau_optimizer", kVersion},
                                                    {"adm_mass", kVersion},        {"cli_report", kVersion}};
  return v;
}

struct Diagnostic {
  std::string path;
  std::string message;
  std::string str() const { return path.empty() ? message : path + ": " + message; }
};

struct BodySpec {
  std::string id;
  Body body;
};

struct ProfileSpec {
  std::string id;
  GraphFunction profile;
};

struct ExperimentConfig {
  std::string experiment;
  std::vector<BodySpec> bodies;
  std::vector<double> p;
  Json grid;
  double tolerance = 0.02;
  std::map<std::string, double> tolerance_overrides;
  std::optional<MassDensity> density;
  std::string objective = "pcap";
  int starts = 4;
  int max_iterations = 60;
  std::vector<ProfileSpec> profiles;
  std::vector<double> adm_radii;
  std::optional<double> alpha, beta;
  int sweep_count = 0;
  double sweep_r0 = 1.0;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string output;
  /// Hash of the canonical config text; output and jobs are excluded.
  std::string hash;

  CapacityOptions capacity_options(int dim) const { return capacity_options_from_json(grid, dim); }
};

namespace detail {

inline const std::set<std::string>& experiment_kinds() {
  static const std::set<std::string> k{"capacity", "verify-tree", "sandwich", "maximize", "adm", "sweep"};
  return k;
}

inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> k{"experiment", "bodies",    "p",          "grid",  "tolerance", "tolerance_overrides",
                                       "density",    "objective", "starts",     "max_iterations", "profiles", "adm_radii",
                                       "alpha",      "beta",      "sweep",      "seed",  "jobs",      "output"};
  return k;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      if (r[i].find_first_of(",\"\n") != std::string::npos) {
        out += '"';
        for (char c : r[i]) out += c == '"' ? std::string("\"\"") : std::string(1, c);
        out += '"';
      } else {
        out += r[i];
      }
    }
    out += '\n';
  }
  return out;
}

inline std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  return out;
}

inline std::string p_tag(double p) {
  std::string s = fmt(p);
  for (char& c : s) {
    if (c == '.') c = '_';
  }
  return "p" + s;
}

/// Runs `f`, turning a library error into a diagnostic at `path`.
template <class F>
bool guarded(std::vector<Diagnostic>& diags, const std::string& path, F&& f) {
  try {
    f();
    return true;
  } catch (const Json::exception& e) {
    diags.push_back({path, e.what()});
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) {
      diags.push_back({"", msg});
    } else {
      diags.push_back({path, msg});
    }
  }
  return false;
}

}  // namespace detail

/// Parses and checks a configuration; every problem is reported, none thrown.
inline ExperimentConfig parse_config(const Json& raw, const std::string& base_dir, std::vector<Diagnostic>& diags) {
  ExperimentConfig c;
  if (!raw.is_object()) {
    diags.push_back({"", "configuration must be a JSON object"});
    return c;
  }
  for (auto it = raw.begin(); it != raw.end(); ++it) {
    if (!detail::config_keys().count(it.key())) diags.push_back({it.key(), "unknown field"});
  }
  if (!raw.contains("experiment") || !raw.at("experiment").is_string()) {
    diags.push_back({"experiment", "missing or not a string"});
  } else {
    c.experiment = raw.at("experiment").get<std::string>();
    if (!detail::experiment_kinds().count(c.experiment)) {
      diags.push_back({"experiment", "unknown experiment kind '" + c.experiment + "'"});
    }
  }
  auto get_number = [&](const std::string& key, double& dst, double lo, double hi) {
    if (!raw.contains(key)) return;
    const Json& v = raw.at(key);
    if (!v.is_number() || !(v.get<double>() >= lo && v.get<double>() <= hi)) {
      diags.push_back({key, "expected a number in [" + detail::fmt(lo) + ", " + detail::fmt(hi) + "]"});
      return;
    }
    dst = v.get<double>();
  };
  double tmp = c.tolerance;
  get_number("tolerance", tmp, 0.0, 1.0);
  c.tolerance = tmp;
  tmp = c.starts;
  get_number("starts", tmp, 1, 64);
  c.starts = static_cast<int>(tmp);
  tmp = c.max_iterations;
  get_number("max_iterations", tmp, 1, 10000);
  c.max_iterations = static_cast<int>(tmp);
  tmp = c.jobs;
  get_number("jobs", tmp, 1, 256);
  c.jobs = static_cast<int>(tmp);
  if (raw.contains("seed")) {
    const Json& s = raw.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      diags.push_back({"seed", "expected a nonnegative integer"});
    } else {
      c.seed = s.is_number_unsigned() ? s.get<std::uint64_t>() : static_cast<std::uint64_t>(s.get<std::int64_t>());
    }
  }
  if (raw.contains("output")) {
    if (raw.at("output").is_string()) {
      c.output = raw.at("output").get<std::string>();
    } else {
      diags.push_back({"output", "expected a string"});
    }
  }
  if (raw.contains("tolerance_overrides")) {
    const Json& o = raw.at("tolerance_overrides");
    if (!o.is_object()) diags.push_back({"tolerance_overrides", "expected an object"});
    for (auto it = o.begin(); o.is_object() && it != o.end(); ++it) {
      if (!it.value().is_number()) {
        diags.push_back({"tolerance_overrides." + it.key(), "expected a number"});
      } else {
        c.tolerance_overrides[it.key()] = it.value().get<double>();
      }
    }
  }
  for (const char* key : {"alpha", "beta"}) {
    if (!raw.contains(key)) continue;
    if (!raw.at(key).is_number() || !(raw.at(key).get<double>() > 0.0)) {
      diags.push_back({key, "expected a positive number"});
    } else {
      (std::string(key) == "alpha" ? c.alpha : c.beta) = raw.at(key).get<double>();
    }
  }

  // p values
  if (raw.contains("p")) {
    const Json& p = raw.at("p");
    if (p.is_number()) {
      c.p.push_back(p.get<double>());
    } else if (p.is_array()) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (!p[i].is_number()) {
          diags.push_back({"p[" + std::to_string(i) + "]", "expected a number"});
        } else {
          c.p.push_back(p[i].get<double>());
        }
      }
    } else {
      diags.push_back({"p", "expected a number or an array of numbers"});
    }
  }
  auto p_path = [&](std::size_t i) { return raw.contains("p") && raw.at("p").is_array() ? "p[" + std::to_string(i) + "]" : std::string("p"); };
  auto check_p = [&](int n, const std::string& who) {
    for (std::size_t i = 0; i < c.p.size(); ++i) {
      if (!(c.p[i] > 1.0 && c.p[i] < n)) {
        diags.push_back({p_path(i), "p must lie in (1,n); got p = " + detail::fmt(c.p[i]) + " with n = " + std::to_string(n) + " for " + who});
      }
    }
  };

  // bodies
  if (raw.contains("bodies")) {
    const Json& b = raw.at("bodies");
    if (!b.is_array()) diags.push_back({"bodies", "expected an array"});
    for (std::size_t i = 0; b.is_array() && i < b.size(); ++i) {
      const std::string path = "bodies[" + std::to_string(i) + "]";
      const Json& e = b[i];
      if (!e.is_object()) {
        diags.push_back({path, "expected an object"});
        continue;
      }
      std::string id = "body" + std::to_string(i);
      if (e.contains("id")) {
        if (e.at("id").is_string()) {
          id = e.at("id").get<std::string>();
        } else {
          diags.push_back({path + ".id", "expected a string"});
        }
      }
      Json spec;
      std::string spec_path = path;
      if (e.contains("file")) {
        if (!e.at("file").is_string()) {
          diags.push_back({path + ".file", "expected a string"});
          continue;
        }
        std::filesystem::path f = e.at("file").get<std::string>();
        if (f.is_relative() && !base_dir.empty()) f = std::filesystem::path(base_dir) / f;
        if (!std::filesystem::exists(f)) {
          diags.push_back({path + ".file", "body file not found: " + f.string()});
          continue;
        }
        if (!detail::guarded(diags, path + ".file", [&] { spec = read_json_file(f.string()); })) continue;
        spec_path = f.string();
      } else if (e.contains("body")) {
        spec = e.at("body");
        spec_path = path + ".body";
      } else if (e.contains("kind")) {
        spec = e;
      } else {
        diags.push_back({path, "needs one of file, body, kind"});
        continue;
      }
      detail::guarded(diags, spec_path, [&] { c.bodies.push_back({id, body_from_json(spec, spec_path)}); });
    }
  }

  if (raw.contains("sweep")) {
    const Json& s = raw.at("sweep");
    if (!s.is_object()) {
      diags.push_back({"sweep", "expected an object"});
    } else {
      detail::guarded(diags, "sweep", [&] {
        c.sweep_count = static_cast<int>(detail::number_or(s, "count", 0, "sweep"));
        c.sweep_r0 = detail::number_or(s, "r0", 1.0, "sweep");
        if (c.sweep_count < 0) throw InputError("sweep.count: must be nonnegative");
        if (!(c.sweep_r0 > 0.0)) throw InputError("sweep.r0: must be positive");
      });
    }
  }

  if (raw.contains("density")) {
    detail::guarded(diags, "density", [&] {
      Json d = raw.at("density");
      if (d.is_string()) {
        std::filesystem::path f = d.get<std::string>();
        if (f.is_relative() && !base_dir.empty()) f = std::filesystem::path(base_dir) / f;
        if (!std::filesystem::exists(f)) throw InputError("density: density file not found: " + f.string());
        d = read_json_file(f.string());
      }
      c.density = density_from_json(d);
    });
  }
  if (raw.contains("objective")) {
    const Json& o = raw.at("objective");
    if (!o.is_string() || (o != "pcap" && o != "surface" && o != "volume")) {
      diags.push_back({"objective", "expected one of pcap, surface, volume"});
    } else {
      c.objective = o.get<std::string>();
    }
  }

  if (raw.contains("profiles")) {
    const Json& pr = raw.at("profiles");
    if (!pr.is_array()) diags.push_back({"profiles", "expected an array"});
    for (std::size_t i = 0; pr.is_array() && i < pr.size(); ++i) {
      const std::string path = "profiles[" + std::to_string(i) + "]";
      detail::guarded(diags, path, [&] {
        std::string id = pr[i].contains("id") && pr[i].at("id").is_string() ? pr[i].at("id").get<std::string>() : "profile" + std::to_string(i);
        c.profiles.push_back({id, profile_from_json(pr[i], path)});
      });
    }
  }
  if (raw.contains("adm_radii")) {
    detail::guarded(diags, "adm_radii", [&] {
      Json wrap{{"adm_radii", raw.at("adm_radii")}};
      c.adm_radii = detail::numbers(wrap, "adm_radii", "");
      for (std::size_t i = 1; i < c.adm_radii.size(); ++i) {
        if (!(c.adm_radii[i] > c.adm_radii[i - 1])) throw InputError("adm_radii: must increase");
      }
    });
  }

  if (raw.contains("grid")) {
    c.grid = raw.at("grid");
    for (int dim : {2, 3}) {
      if (!detail::guarded(diags, "grid", [&] { capacity_options_from_json(c.grid, dim); })) break;
    }
  }

  // per-experiment requirements
  const std::string& k = c.experiment;
  const bool needs_bodies = k == "capacity" || k == "verify-tree" || k == "sandwich";
  if (needs_bodies && !raw.contains("bodies")) diags.push_back({"bodies", "required for " + k});
  if ((needs_bodies || k == "sweep" || (k == "maximize" && c.objective == "pcap")) && c.p.empty()) {
    diags.push_back({"p", "required for " + k});
  }
  if (needs_bodies) {
    for (const auto& b : c.bodies) check_p(dimension(b.body), "body '" + b.id + "'");
  }
  if (k == "sweep") {
    if (!raw.contains("sweep")) diags.push_back({"sweep", "required for sweep"});
    check_p(2, "random 2D bodies");
  }
  if (k == "maximize") {
    if (!raw.contains("density")) diags.push_back({"density", "required for maximize"});
    if (c.density && c.objective == "pcap") check_p(c.density->dimension(), "the density dimension");
  }
  if (k == "adm" && !raw.contains("profiles")) diags.push_back({"profiles", "required for adm"});
  if (k == "sandwich" && c.alpha && c.beta && *c.alpha > *c.beta) diags.push_back({"alpha", "must not exceed beta"});

  Json canon = raw;
  canon.erase("output");
  canon.erase("jobs");
  c.hash = hex64(fnv1a(canon.dump()));
  return c;
}

inline std::vector<Diagnostic> validate(const Json& raw, const std::string& base_dir = "") {
  std::vector<Diagnostic> d;
  parse_config(raw, base_dir, d);
  return d;
}

/// Reads a configuration file; relative paths inside resolve against its directory.
inline std::vector<Diagnostic> validate_file(const std::string& path) {
  if (!std::filesystem::exists(path)) return {{"", "config file not found: " + path}};
  try {
    return validate(read_json_file(path), std::filesystem::path(path).parent_path().string());
  } catch (const std::exception& e) {
    return {{"", e.what()}};
  }
}

inline ExperimentConfig load_config(const Json& raw, const std::string& base_dir = "") {
  std::vector<Diagnostic> d;
  ExperimentConfig c = parse_config(raw, base_dir, d);
  if (!d.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& x : d) msg += "\n  " + x.str();
    throw InputError(msg);
  }
  return c;
}

struct TaskStatus {
  std::string id;
  /// "pass", "fail" (a check failed) or "error" (the task threw).
  std::string status;
  std::string message;
};

struct RunManifest {
  std::string experiment;
  std::string config_hash;
  std::map<std::string, std::string> versions;
  std::vector<TaskStatus> tasks;
  std::vector<std::string> files;

  bool all_pass() const {
    for (const auto& t : tasks) {
      if (t.status != "pass") return false;
    }
    return true;
  }

  Json to_json() const {
    Json t = Json::array();
    for (const auto& s : tasks) {
      Json e{{"id", s.id}, {"status", s.status}};
      if (!s.message.empty()) e["message"] = s.message;
      t.push_back(e);
    }
    return {{"experiment", experiment}, {"config_hash", config_hash}, {"versions", versions},
            {"tasks", t},               {"files", files},             {"pass", all_pass()}};
  }
};

namespace detail {

struct TaskOutcome {
  TaskStatus status;
  Json record;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> files;
};

using Task = std::pair<std::string, std::function<TaskOutcome()>>;

inline TaskOutcome run_guarded(const Task& t) {
  try {
    TaskOutcome o = t.second();
    o.status.id = t.first;
    return o;
  } catch (const std::exception& e) {
    TaskOutcome o;
    o.status = {t.first, "error", e.what()};
    o.record = {{"id", t.first}, {"error", e.what()}};
    return o;
  }
}

inline std::vector<TaskOutcome> execute(const std::vector<Task>& tasks, int jobs) {
  std::vector<TaskOutcome> out(tasks.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) out[i] = run_guarded(tasks[i]);
    return out;
  }
  for (std::size_t start = 0; start < tasks.size(); start += jobs) {
    std::vector<std::future<TaskOutcome>> wave;
    for (std::size_t i = start; i < std::min(tasks.size(), start + jobs); ++i) {
      wave.push_back(std::async(std::launch::async, run_guarded, std::cref(tasks[i])));
    }
    for (std::size_t i = 0; i < wave.size(); ++i) out[start + i] = wave[i].get();
  }
  return out;
}

inline std::string status_of(bool ok) { return ok ? "pass" : "fail"; }

inline std::string task_id(const std::string& body, double p) { return body + "@" + p_tag(p); }

inline TreeOptions tree_options(const ExperimentConfig& c, int dim) {
  TreeOptions t;
  t.tolerance = c.tolerance;
  t.overrides = c.tolerance_overrides;
  t.capacity = c.capacity_options(dim);
  t.has_capacity_options = true;
  return t;
}

inline const std::vector<std::string>& tree_header() {
  static const std::vector<std::string> h{"body", "p", "check", "lhs", "rhs", "slack", "tolerance", "pass"};
  return h;
}

inline TaskOutcome tree_task(const ExperimentConfig& c, const std::string& id, const Body& body, double p, bool plot) {
  const int n = dimension(body);
  const RadiusReport r = verify_tree(body, p, tree_options(c, n));
  TaskOutcome o;
  o.record = {{"id", id}, {"body", body_to_json(body)}, {"report", to_json(r)}};
  for (const auto& ch : r.checks) {
    if (!ch.applicable) continue;
    o.rows.push_back({id, fmt(p), ch.name, fmt(ch.lhs), fmt(ch.rhs), fmt(ch.slack), fmt(ch.tolerance), ch.pass ? "true" : "false"});
  }
  if (plot) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto v = [&](const Radius& x) { return x.present() ? *x : nan; };
    o.files.emplace_back("tree_" + slug(id) + ".svg",
                         svg::bar_chart("radius tree: " + id, {"volume", "surface", "capacity", "imc", "mean", "semidiameter"},
                                        {v(r.volume_radius), v(r.surface_radius), v(r.capacity_radius), v(r.imc_radius),
                                         v(r.mean_radius), v(r.semidiameter)}));
  }
  std::string failed;
  for (const auto& ch : r.checks) {
    if (ch.applicable && !ch.pass) failed += (failed.empty() ? "" : ", ") + ch.name;
  }
  o.status = {id, status_of(r.all_pass()), failed.empty() ? "" : "failed: " + failed};
  return o;
}

inline Objective objective_of(const ExperimentConfig& c, double p) {
  if (c.objective == "surface") return Objective::surface();
  if (c.objective == "volume") return Objective::volume();
  return Objective::pcap(p);
}

inline std::vector<double> default_adm_radii(const GraphFunction& f) {
  std::vector<double> r;
  for (double s : {10.0, 20.0, 40.0, 80.0, 160.0}) r.push_back(s * f.inner_radius());
  return r;
}

inline std::vector<Task> build_tasks(const ExperimentConfig& c, std::vector<std::string>& header) {
  std::vector<Task> tasks;
  const std::string& k = c.experiment;
  if (k == "capacity") {
    header = {"body", "p", "dimension", "energy_route", "flux_route", "extrapolated", "estimate"};
    for (const auto& b : c.bodies) {
      for (double p : c.p) {
        const std::string id = task_id(b.id, p);
        tasks.emplace_back(id, [&c, &b, p, id] {
          const int n = dimension(b.body);
          const CapacityResult cr = capacity(b.body, p, c.capacity_options(n));
          TaskOutcome o;
          o.record = {{"id", id}, {"p", p}, {"dimension", n}, {"body", body_to_json(b.body)}, {"capacity", to_json(cr)},
                      {"value", cr.value()}, {"capacity_radius", capacity_radius_of(n, p, cr.value())}};
          bool ok = true;
          if (const auto* pb = std::get_if<ParamBody3>(&b.body); pb && pb->kind == ParamBody3::Kind::Ball) {
            const double exact = ball_capacity(n, p, pb->radius());
            const double err = std::abs(cr.value() - exact) / exact;
            o.record["ball_formula"] = exact;
            o.record["relative_error"] = err;
            ok = err <= 0.01;
          }
          o.rows.push_back({id, fmt(p), std::to_string(n), fmt(cr.energy_route), fmt(cr.flux_route), fmt(cr.extrapolated), fmt(cr.estimate)});
          o.status = {id, status_of(ok), ok ? "" : "ball formula mismatch above 1%"};
          return o;
        });
      }
    }
  } else if (k == "verify-tree") {
    header = tree_header();
    for (const auto& b : c.bodies) {
      for (double p : c.p) {
        const std::string id = task_id(b.id, p);
        tasks.emplace_back(id, [&c, &b, p, id] { return tree_task(c, id, b.body, p, true); });
      }
    }
  } else if (k == "sweep") {
    header = tree_header();
    for (int i = 0; i < c.sweep_count; ++i) {
      const std::uint64_t s = c.seed + static_cast<std::uint64_t>(i);
      for (double p : c.p) {
        const std::string id = task_id("random-" + std::to_string(s), p);
        tasks.emplace_back(id, [&c, s, p, id] { return tree_task(c, id, random_support_body(s, c.sweep_r0), p, false); });
      }
    }
  } else if (k == "sandwich") {
    header = {"body", "p", "alpha", "beta", "lower", "surface", "upper", "pass", "extrapolated"};
    for (const auto& b : c.bodies) {
      for (double p : c.p) {
        const std::string id = task_id(b.id, p);
        tasks.emplace_back(id, [&c, &b, p, id] {
          const int n = dimension(b.body);
          const auto [kmin, hmax] = curvature_bounds(b.body);
          const double alpha = c.alpha.value_or(kmin), beta = c.beta.value_or(hmax);
          const double pcap = capacity(b.body, p, c.capacity_options(n)).value();
          const SandwichRecord s = sandwich_check(b.body, p, alpha, beta, pcap, c.tolerance);
          TaskOutcome o;
          o.record = {{"id", id}, {"p", p}, {"body", body_to_json(b.body)}, {"capacity", pcap}, {"sandwich", to_json(s)}};
          o.rows.push_back({id, fmt(p), fmt(alpha), fmt(beta), fmt(s.lower), fmt(s.surface_value), fmt(s.upper),
                            s.pass() ? "true" : "false", s.extrapolated ? "true" : "false"});
          o.status = {id, status_of(s.pass()), s.pass() ? "" : "sandwich violated"};
          return o;
        });
      }
    }
  } else if (k == "maximize") {
    header = {"task", "start", "iterations", "objective", "el_residual", "collapsed", "converged", "stop_reason"};
    const std::vector<double> ps = c.objective == "pcap" ? c.p : std::vector<double>{0.0};
    for (double p : ps) {
      const std::string id = c.objective == "pcap" ? task_id("pcap", p) : c.objective;
      tasks.emplace_back(id, [&c, p, id] {
        AttainmentOptions ao;
        ao.starts = c.starts;
        ao.maximize.max_iterations = c.max_iterations;
        const AttainmentResult res = attainment_check(*c.density, objective_of(c, p), ao);
        TaskOutcome o;
        Json starts = Json::array();
        std::vector<svg::Series> series;
        for (std::size_t j = 0; j < res.traces.size(); ++j) {
          const OptimTrace& t = res.traces[j];
          std::string lines;
          svg::Series sr{"start " + std::to_string(j), {}};
          for (const auto& st : t.states) {
            lines += to_json(st).dump() + "\n";
            sr.y.push_back(st.objective);
          }
          series.push_back(sr);
          const std::string tf = "trace_" + slug(id) + "_start" + std::to_string(j) + ".jsonl";
          o.files.emplace_back(tf, lines);
          starts.push_back({{"start", j},
                            {"initial", body_to_json(attainment_starts(*c.density, ao)[j])},
                            {"objective", t.objective},
                            {"el_residual", t.el_residual},
                            {"collapsed", t.collapsed},
                            {"converged", t.converged},
                            {"accepted_steps", t.accepted_steps},
                            {"stop_reason", t.stop_reason},
                            {"trace", tf}});
          o.rows.push_back({id, std::to_string(j), std::to_string(t.states.size()), fmt(t.objective), fmt(t.el_residual),
                            t.collapsed ? "true" : "false", t.converged ? "true" : "false", t.stop_reason});
        }
        o.files.emplace_back("trace_" + slug(id) + ".svg", svg::line_chart("F along the ascent: " + id, series));
        o.record = {{"id", id},
                    {"objective", objective_of(c, p).name()},
                    {"marker", res.marker},
                    {"attained", res.attained},
                    {"best_objective", res.best_objective},
                    {"best_start", res.best_start},
                    {"starts", starts}};
        if (res.witness) {
          const Json w = body_to_json(*res.witness);
          o.record["witness"] = w;
          o.record["witness_mean_radius"] = mean_radius(*res.witness);
          o.record["witness_volume_radius"] = volume_radius(*res.witness);
          o.files.emplace_back("witness_" + slug(id) + ".json", w.dump(2) + "\n");
        }
        o.status = {id, "pass", res.marker};
        return o;
      });
    }
  } else if (k == "adm") {
    header = {"profile", "adm_boundary", "lam", "two_mass", "identity_residual", "decay_admissible", "penrose_capacity_slack",
              "penrose_surface_slack"};
    for (const auto& pr : c.profiles) {
      tasks.emplace_back(pr.id, [&c, &pr] {
        const GraphFunction& f = pr.profile;
        TaskOutcome o;
        o.record = {{"id", pr.id}, {"profile", f.name()}};
        const DecayReport d = validate_decay(f);
        o.record["decay"] = {{"declared_gamma", d.declared_gamma}, {"fitted_gamma", d.fitted_gamma},
                             {"fitted_slope", d.fitted_slope},     {"admissible", d.admissible},
                             {"reason", d.reason}};
        if (!d.admissible) {
          o.status = {pr.id, "fail", "decay: " + d.reason};
          o.rows.push_back({pr.id, "", "", "", "", "false", "", ""});
          return o;
        }
        const AdmResult a = adm_boundary(f, c.adm_radii.empty() ? default_adm_radii(f) : c.adm_radii);
        o.record["adm_boundary"] = to_json(a);
        o.record["m"] = a.mass;
        o.record["two_m"] = a.two_mass;
        bool ok = true;
        std::string lam_s, res_s, pc_s, ps_s;
        try {
          const ParamBody3 A = ParamBody3::ball(f.inner_radius());
          const LamResult l = lam_mass(f, A);
          const double residual = std::abs(l.mass - a.mass) / std::abs(a.mass);
          o.record["lam"] = to_json(l);
          o.record["identity_residual"] = residual;
          const PenroseRecord pen = penrose_check(A, l.mass, capacity(Body(A), 2.0, c.capacity_options(3)).value(), 0.01);
          o.record["penrose"] = to_json(pen);
          ok = residual <= 0.01 && pen.capacity_pass && pen.surface_pass;
          lam_s = fmt(l.mass);
          res_s = fmt(residual);
          pc_s = fmt(pen.capacity_slack);
          ps_s = fmt(pen.surface_slack);
        } catch (const PreconditionError& e) {
          o.record["lam"] = {{"not_applicable", e.what()}};
        }
        o.rows.push_back({pr.id, fmt(a.mass), lam_s, fmt(a.two_mass), res_s, "true", pc_s, ps_s});
        o.status = {pr.id, status_of(ok), ok ? "" : "mass identity or Penrose bound outside tolerance"};
        return o;
      });
    }
  }
  return tasks;
}

/// Figures that summarize a whole batch.
inline std::vector<std::pair<std::string, std::string>> batch_plots(const ExperimentConfig& c, const std::vector<TaskOutcome>& outs) {
  std::vector<std::pair<std::string, std::string>> files;
  if (outs.empty()) return files;
  if (c.experiment == "sweep") {
    svg::Series s{"min slack", {}};
    for (const auto& o : outs) {
      double m = std::numeric_limits<double>::quiet_NaN();
      if (o.record.contains("report")) {
        for (const auto& ch : o.record["report"]["checks"]) {
          if (ch["applicable"].get<bool>()) m = std::isnan(m) ? ch["slack"].get<double>() : std::min(m, ch["slack"].get<double>());
        }
      }
      s.y.push_back(m);
    }
    files.emplace_back("sweep_slack.svg", svg::line_chart("smallest slack per random body", {s}));
  } else if (c.experiment == "adm") {
    std::vector<std::string> labels;
    std::vector<double> v;
    for (const auto& o : outs) {
      labels.push_back(o.status.id);
      v.push_back(o.record.contains("identity_residual") ? o.record["identity_residual"].get<double>()
                                                         : std::numeric_limits<double>::quiet_NaN());
    }
    files.emplace_back("adm_residuals.svg", svg::bar_chart("mass identity residual |m_lam - m_adm| / m_adm", labels, v));
  }
  return files;
}

}  // namespace detail

/// Executes every task of the configuration and writes results under `out_dir`.
inline RunManifest run(const ExperimentConfig& c, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  // Drop files a previous run listed, so the manifest stays complete.
  if (fs::exists(dir / "manifest.json")) {
    try {
      const Json old = read_json_file((dir / "manifest.json").string());
      for (const auto& f : old.value("files", Json::array())) {
        const fs::path victim = dir / f.get<std::string>();
        if (victim.parent_path() == dir) fs::remove(victim);
      }
    } catch (const std::exception&) {
    }
  }

  RunManifest m;
  m.experiment = c.experiment;
  m.config_hash = c.hash;
  m.versions = module_versions();

  std::vector<std::string> header;
  const auto tasks = detail::build_tasks(c, header);
  const auto outs = detail::execute(tasks, c.jobs);

  std::map<std::string, std::string> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    if (files.count(name)) throw Error("two tasks wrote the same output file " + name);
    files[name] = text;
  };
  if (!outs.empty()) {
    Json records = Json::array();
    std::vector<std::vector<std::string>> rows{header};
    for (const auto& o : outs) {
      m.tasks.push_back(o.status);
      Json r = o.record;
      r["status"] = o.status.status;
      records.push_back(r);
      rows.insert(rows.end(), o.rows.begin(), o.rows.end());
      for (const auto& [name, text] : o.files) emit(name, text);
    }
    emit("results.json", Json{{"experiment", c.experiment}, {"config_hash", c.hash}, {"seed", c.seed}, {"results", records}}.dump(2) + "\n");
    emit("results.csv", detail::csv(rows));
    for (const auto& [name, text] : detail::batch_plots(c, outs)) emit(name, text);
  }
  for (const auto& [name, text] : files) {
    write_text_file((dir / name).string(), text);
    m.files.push_back(name);
  }
  m.files.push_back("manifest.json");
  std::sort(m.files.begin(), m.files.end());
  write_text_file((dir / "manifest.json").string(), m.to_json().dump(2) + "\n");
  return m;
}

inline RunManifest run(const ExperimentConfig& c) { return run(c, c.output.empty() ? std::string("out") : c.output); }

/// Markdown summary of a finished run; also written to report.md and added to the manifest.
inline std::string report(const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  Json man = read_json_file((dir / "manifest.json").string());
  std::string md = "# Run report\n\n";
  md += "experiment: " + man.value("experiment", std::string()) + "\n\n";
  md += "config hash: " + man.value("config_hash", std::string()) + "\n\n";
  md += "| task | status | note |\n|---|---|---|\n";
  int pass = 0, total = 0;
  for (const auto& t : man["tasks"]) {
    ++total;
    if (t["status"] == "pass") ++pass;
    md += "| " + t["id"].get<std::string>() + " | " + t["status"].get<std::string>() + " | " + t.value("message", std::string()) + " |\n";
  }
  md += "\n" + std::to_string(pass) + " of " + std::to_string(total) + " tasks passed.\n";
  std::vector<std::string> svgs;
  for (const auto& f : man["files"]) {
    const std::string name = f.get<std::string>();
    if (name.size() > 4 && name.substr(name.size() - 4) == ".svg") svgs.push_back(name);
  }
  if (!svgs.empty()) {
    md += "\n## Figures\n\n";
    for (const auto& s : svgs) md += "![" + s + "](" + s + ")\n";
  }
  write_text_file((dir / "report.md").string(), md);
  auto files = man["files"].get<std::vector<std::string>>();
  if (std::find(files.begin(), files.end(), "report.md") == files.end()) {
    files.push_back("report.md");
    std::sort(files.begin(), files.end());
    man["files"] = files;
    write_text_file((dir / "manifest.json").string(), man.dump(2) + "\n");
  }
  return md;
}

}  // namespace convcap
