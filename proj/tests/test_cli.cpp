#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fishnav/cli.hpp"
#include "fishnav/json_io.hpp"

using namespace fishnav;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = dispatch(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("fishnav_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

json last_json_line(const std::string& text) {
  const auto pos = text.rfind("{\"error\"");
  REQUIRE(pos != std::string::npos);
  return json::parse(text.substr(pos));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("fields command") {
  const auto d = scratch_dir("fields");
  const auto o = run({"--out", d.string(), "fields", "--field", "shear_sin", "--x", "1.5707963267948966,0"});
  REQUIRE(o.code == 0);
  const json j = json::parse(o.out);
  REQUIRE(j.contains("points"));
  CHECK(fs::exists(d / "fields.json"));
  const json m = read_json_file(d / "manifest.json");
  CHECK(m["command"] == "fields");
  CHECK(m["exit_code"] == 0);
  CHECK_FALSE(m["config"].contains("version"));
}

TEST_CASE("usage errors exit with 2") {
  const auto missing = run({"fields", "--x", "0,0"});
  CHECK(missing.code == 2);
  CHECK(last_json_line(missing.err)["error"]["exit_code"] == 2);
  CHECK(run({"fields", "--field", "shear_sin", "--x", "0,0", "--bogus"}).code == 2);
  CHECK(run({"fields", "--field", "no_such_field", "--x", "0,0"}).code == 2);
  CHECK(run({"fields", "--field", "shear_sin", "--x", "0,zero"}).code == 2);
  CHECK(run({}).code == 2);
}

TEST_CASE("domain errors exit with 1") {
  const auto d = scratch_dir("domain");
  const auto o = run({"--out", d.string(), "corrector", "eval", "--field", "shear_sin", "--alpha", "1", "--x", "1,0",
                      "--window", "0.5"});
  CHECK(o.code == 1);
  CHECK(last_json_line(o.err)["error"]["type"] == "ConfigError");
}

TEST_CASE("help and version") {
  const auto h = run({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("corrector") != std::string::npos);
  const auto v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(kVersion) != std::string::npos);
}

TEST_CASE("discrete recurrence") {
  const auto d = scratch_dir("recur");
  const auto o = run({"--out", d.string(), "recur", "discrete", "--perm", "cycle:12", "--U", "0", "--horizon", "30"});
  REQUIRE(o.code == 0);
  const json j = json::parse(o.out);
  CHECK(j["returns"] == json::array({12, 24}));
  CHECK(fs::exists(d / "returns.csv"));
}

TEST_CASE("manifest replays the run") {
  const auto a = scratch_dir("replay_a");
  const auto b = scratch_dir("replay_b");
  const auto first = run({"--out", a.string(), "--seed", "7", "drift", "--field", "taylor_green", "--scales", "1,4",
                          "--random", "3"});
  REQUIRE(first.code == 0);
  const auto second = run({"--config", (a / "manifest.json").string(), "--out", b.string()});
  REQUIRE(second.code == 0);
  CHECK(first.out == second.out);
  std::ifstream ca(a / "drift.csv"), cb(b / "drift.csv");
  std::stringstream sa, sb;
  sa << ca.rdbuf();
  sb << cb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(read_json_file(b / "manifest.json")["seed"] == 7);
}

TEST_CASE("config files and explicit flags") {
  const auto d = scratch_dir("config");
  const fs::path cfg = d / "cfg.json";
  write_json_file(cfg, {{"field", "shear_sin"}, {"x0", "1.5707963267948966,0"}, {"t", 1.0}});
  const auto o = run({"--out", d.string(), "--config", cfg.string(), "flow", "--t", "2"});
  REQUIRE(o.code == 0);
  // The explicit --t wins over the file.
  CHECK(o.out.find("2,1.5707963267948966,2") != std::string::npos);
}

TEST_CASE("control plan and verify") {
  const auto d = scratch_dir("control");
  const fs::path spec = d / "spec.json";
  write_json_file(spec, {{"field", "zero"}, {"x0", {0.0, 0.0}}, {"y0", {1.0, 0.0}}, {"delta", 0.3}});
  const auto plan = run({"--out", d.string(), "control", "plan", "--spec", spec.string()});
  REQUIRE(plan.code == 0);
  const json result = read_json_file(d / "result.json");
  CHECK(result["result"]["status"] == "REACHED");
  CHECK(fs::exists(d / "trajectory.csv"));
  const auto verify = run({"--out", d.string(), "control", "verify", "--result", (d / "result.json").string()});
  CHECK(verify.code == 0);
  CHECK(json::parse(verify.out)["pass"] == true);

  json bad = result;
  bad["result"]["schedule"]["values"][0][1] = 0.1;
  write_json_file(d / "bad.json", bad);
  CHECK(run({"--out", d.string(), "control", "verify", "--result", (d / "bad.json").string()}).code == 1);

  write_json_file(spec, {{"field", "zero"}, {"x0", {0.0, 0.0}}, {"y0", {1.0, 0.0}}, {"speed", 1}});
  CHECK(run({"--out", d.string(), "control", "plan", "--spec", spec.string()}).code == 2);
}

}  // TEST_SUITE
