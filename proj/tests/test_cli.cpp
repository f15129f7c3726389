#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "convcap/experiment.hpp"

using namespace convcap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("convcap_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool mentions(const std::vector<Diagnostic>& d, const std::string& needle) {
  for (const auto& x : d) {
    if (x.str().find(needle) != std::string::npos) return true;
  }
  return false;
}

const Json kFastGrid = {{"angular_cells", 96}, {"radial_cells", 40}};

}  // namespace

TEST(Validate, AcceptsGoodConfig) {
  const Json cfg = {{"experiment", "capacity"},
                    {"bodies", Json::array({{{"id", "disk"}, {"body", {{"kind", "support2"}, {"disk", {{"radius", 1.0}}}}}},
                                            {{"id", "ball"}, {"kind", "ball"}, {"radius", 2.0}}})},
                    {"p", {1.5}}};
  const auto d = validate(cfg);
  EXPECT_TRUE(d.empty()) << d.front().str();
}

TEST(Validate, RejectsExponentAtDimension) {
  const Json cfg = {{"experiment", "capacity"}, {"bodies", Json::array({{{"id", "b"}, {"kind", "ball"}, {"radius", 1.0}}})}, {"p", 3}};
  const auto d = validate(cfg);
  ASSERT_FALSE(d.empty());
  EXPECT_TRUE(mentions(d, "p must lie in (1,n)"));
  EXPECT_TRUE(mentions(d, "'b'"));
}

TEST(Validate, MissingBodyFileNamesThePath) {
  const fs::path dir = scratch("missing");
  const Json cfg = {{"experiment", "capacity"}, {"bodies", Json::array({{{"id", "x"}, {"file", "nowhere/body.json"}}})}, {"p", 1.5}};
  const auto d = validate(cfg, dir.string());
  ASSERT_FALSE(d.empty());
  EXPECT_TRUE(mentions(d, "nowhere/body.json"));
}

TEST(Validate, ReportsEveryProblem) {
  const Json cfg = {{"experiment", "capacity"},
                    {"colour", "blue"},
                    {"grid", {{"angular_cels", 10}}},
                    {"bodies", Json::array({{{"id", "e"}, {"kind", "ellipsoid"}, {"semi_axes", {1.0, -1.0, 1.0}}}})},
                    {"p", 2.0}};
  const auto d = validate(cfg);
  EXPECT_GE(d.size(), 3u);
  EXPECT_TRUE(mentions(d, "colour"));
  EXPECT_TRUE(mentions(d, "angular_cels"));
  EXPECT_THROW(load_config(cfg), InputError);
  EXPECT_FALSE(validate({{"experiment", "dance"}}).empty());
}

TEST(Validate, FileRoute) {
  const fs::path dir = scratch("file_route");
  write_text_file((dir / "body.json").string(), R"({"kind": "support2", "ellipse": {"a": 1.5, "b": 1.0}})");
  write_text_file((dir / "cfg.json").string(),
                  R"({"experiment": "capacity", "bodies": [{"id": "e", "file": "body.json"}], "p": [1.5]})");
  EXPECT_TRUE(validate_file((dir / "cfg.json").string()).empty());
  write_text_file((dir / "broken.json").string(), "{ not json");
  EXPECT_FALSE(validate_file((dir / "broken.json").string()).empty());
}

TEST(BodyJson, RoundTrip) {
  const std::vector<Body> bodies{SupportBody2::ellipse(1.5, 1.0, Vec2(0.2, -0.1), 0.3), random_support_body(3),
                                 ParamBody3::ball(0.7, Vec3(1, 2, 3)), ParamBody3::ellipsoid(2.0, 1.5, 1.0),
                                 ParamBody3::box(0.5, 0.25, 1.0)};
  for (const auto& b : bodies) {
    const Json j = body_to_json(b);
    const Body back = body_from_json(Json::parse(j.dump()));
    EXPECT_EQ(body_to_json(back).dump(), j.dump());
    EXPECT_NEAR(volume(back), volume(b), 1e-12 * volume(b));
  }
}

TEST(Run, EmptyTaskList) {
  const fs::path dir = scratch("empty");
  const auto m = run(load_config({{"experiment", "capacity"}, {"bodies", Json::array()}, {"p", {1.5}}}), dir.string());
  EXPECT_TRUE(m.tasks.empty());
  EXPECT_EQ(m.files, std::vector<std::string>{"manifest.json"});
  EXPECT_TRUE(m.all_pass());
  EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator()), 1);
}

TEST(Run, DeterministicAndComplete) {
  const Json cfg = {{"experiment", "verify-tree"},
                    {"bodies", Json::array({{{"id", "ellipse"}, {"kind", "support2"}, {"ellipse", {{"a", 1.5}, {"b", 1.0}}}},
                                            {{"id", "blob"}, {"kind", "support2"}, {"random", {{"seed", 9}}}}})},
                    {"p", {1.5}},
                    {"grid", kFastGrid},
                    {"seed", 4}};
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const auto ma = run(load_config(cfg), a.string());
  const auto mb = run(load_config(cfg), b.string());
  EXPECT_TRUE(ma.all_pass());
  ASSERT_EQ(ma.files, mb.files);
  for (const auto& f : ma.files) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;

  std::vector<std::string> listed;
  for (const auto& e : fs::directory_iterator(a)) listed.push_back(e.path().filename().string());
  std::sort(listed.begin(), listed.end());
  EXPECT_EQ(listed, ma.files);

  // a rerun into the same directory replaces stale outputs
  Json smaller = cfg;
  smaller["bodies"].erase(1);
  const auto mc = run(load_config(smaller), a.string());
  listed.clear();
  for (const auto& e : fs::directory_iterator(a)) listed.push_back(e.path().filename().string());
  std::sort(listed.begin(), listed.end());
  EXPECT_EQ(listed, mc.files);
  EXPECT_FALSE(fs::exists(a / "tree_blob_p1_5.svg") && std::find(mc.files.begin(), mc.files.end(), "tree_blob_p1_5.svg") == mc.files.end());
}

TEST(Run, HashIgnoresOutputAndJobs) {
  Json cfg = {{"experiment", "adm"}, {"profiles", Json::array({{{"kind", "schwarzschild"}, {"m", 0.5}}})}};
  const std::string h = load_config(cfg).hash;
  cfg["output"] = "elsewhere";
  cfg["jobs"] = 3;
  EXPECT_EQ(load_config(cfg).hash, h);
  cfg["seed"] = 5;
  EXPECT_NE(load_config(cfg).hash, h);
  EXPECT_EQ(h.size(), 16u);
}

TEST(Run, SweepRows) {
  const fs::path dir = scratch("sweep");
  const auto m = run(load_config({{"experiment", "sweep"}, {"sweep", {{"count", 3}}}, {"p", 1.5}, {"seed", 11}, {"grid", kFastGrid}}),
                     dir.string());
  ASSERT_EQ(m.tasks.size(), 3u);
  EXPECT_TRUE(m.all_pass());
  const std::string csv = slurp(dir / "results.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 7);
  EXPECT_EQ(m.tasks[0].id, "random-11@p1_5");
}

TEST(Run, BallCapacity3D) {
  const fs::path dir = scratch("ball");
  const auto m = run(load_config({{"experiment", "capacity"},
                                  {"bodies", Json::array({{{"id", "ball"}, {"kind", "ball"}, {"radius", 1.0}}})},
                                  {"p", 2.0},
                                  {"grid", {{"angular_cells", 6}, {"radial_cells", 20}}}}),
                     dir.string());
  ASSERT_EQ(m.tasks.size(), 1u);
  EXPECT_EQ(m.tasks[0].status, "pass");
  const Json r = read_json_file((dir / "results.json").string());
  const double v = r["results"][0]["capacity"]["extrapolated"].get<double>();
  EXPECT_NEAR(v / (4.0 * pi), 1.0, 0.01);
}

TEST(Run, AdmStatuses) {
  const fs::path dir = scratch("adm");
  const auto m = run(load_config({{"experiment", "adm"},
                                  {"profiles", Json::array({{{"id", "s"}, {"kind", "schwarzschild"}, {"m", 0.5}},
                                                            {{"id", "slow"}, {"kind", "power"}, {"c", 1.0}, {"e", 0.75}}})}}),
                     dir.string());
  ASSERT_EQ(m.tasks.size(), 2u);
  EXPECT_EQ(m.tasks[0].status, "pass");
  EXPECT_EQ(m.tasks[1].status, "fail");
  EXPECT_FALSE(m.all_pass());
  const std::string md = report(dir.string());
  EXPECT_NE(md.find("1 of 2 tasks passed"), std::string::npos);
  const Json man = read_json_file((dir / "manifest.json").string());
  const auto files = man["files"].get<std::vector<std::string>>();
  EXPECT_NE(std::find(files.begin(), files.end(), "report.md"), files.end());
}
