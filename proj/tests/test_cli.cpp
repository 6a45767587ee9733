// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using gaze::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "gazeprompt");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gazeprompt_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("anchors reports the grid size") {
  Result r = invoke({"anchors"});
  CHECK(r.code == 0);
  CHECK(r.err.find("N=91") != std::string::npos);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.is_object());

  r = invoke({"anchors", "--yaw-step", "90", "--pitch-step", "90"});
  CHECK(r.code == 0);
  CHECK(r.err.find("N=15") != std::string::npos);

  const fs::path dir = scratch("anchors");
  r = invoke({"anchors", "--out", (dir / "a.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("N=91") != std::string::npos);
  CHECK(fs::exists(dir / "a.json"));

  CHECK(invoke({"anchors", "--yaw-step", "7"}).code == 2);
}

TEST_CASE("interp prints weights and reconstruction error") {
  Result r = invoke({"interp", "--yaw", "30", "--pitch", "30"});
  CHECK(r.code == 0);
  CHECK(r.out.find("anchor=59 yaw=30 pitch=30 weight=1\n") != std::string::npos);
  CHECK(r.out.find("reconstruction_error_deg=0\n") != std::string::npos);

  r = invoke({"interp", "--yaw", "15", "--pitch", "15"});
  CHECK(r.code == 0);
  const auto pos = r.out.find("reconstruction_error_deg=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(r.out.substr(pos + 25)) < 1.0);

  r = invoke({"interp", "--yaw", "15", "--pitch", "15", "--scheme", "planar"});
  CHECK(r.out.find("weight_sum=1\n") != std::string::npos);
}

TEST_CASE("interp error exits") {
  CHECK(invoke({"interp", "--yaw", "90", "--pitch", "0", "--scheme", "global"}).code == 3);
  CHECK(invoke({"interp", "--yaw", "200", "--pitch", "0"}).code == 2);
  CHECK(invoke({"interp", "--yaw", "0", "--pitch", "0", "--scheme", "cubic"}).code == 2);
  CHECK(invoke({"interp", "--yaw", "0"}).code == 2);
  CHECK(invoke({"no-such-command"}).code == 2);
}

TEST_CASE("train writes manifest, metrics and checkpoint") {
  const fs::path dir = scratch("train");
  const Result r = invoke({"train", "--config", GAZE_DEFAULT_CONFIG, "--out-dir", dir.string(),
                           "--n-source", "256", "--n-target", "128", "--negatives", "16"});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "metrics.csv");
  CHECK(count_lines(csv) == 31);
  CHECK(csv.rfind("epoch,", 0) == 0);

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["config"]["n_source"] == 256);
  CHECK(manifest["config"]["negatives"] == 16);
  CHECK(manifest["seeds"]["seed"] == 0);
  CHECK(manifest["seeds"]["GAZEPROMPT_SEED"].is_null());
  CHECK(manifest["outputs"]["checkpoint"] == (dir / "checkpoint.json").string());

  const Result e = invoke({"eval", "--ckpt", (dir / "checkpoint.json").string(), "--n", "200"});
  CHECK(e.code == 0);
  CHECK(e.out.find("mean_angular_error_deg=") != std::string::npos);
}

TEST_CASE("seed precedence: file, then environment, then flag") {
  const fs::path dir = scratch("seed");
  {
    std::ofstream f(dir / "c.json");
    f << R"({"seed": 3})";
  }
  const std::string cfg = (dir / "c.json").string();
  auto seed_of = [](const Result& r) { return nlohmann::json::parse(r.out)["seed"]; };

  unsetenv("GAZEPROMPT_SEED");
  CHECK(seed_of(invoke({"config", "--config", cfg})) == 3);
  setenv("GAZEPROMPT_SEED", "9", 1);
  CHECK(seed_of(invoke({"config", "--config", cfg})) == 9);
  CHECK(seed_of(invoke({"config", "--config", cfg, "--seed", "5"})) == 5);

  const Result t = invoke({"train", "--config", cfg, "--out-dir", (dir / "run").string(),
                           "--epochs", "1", "--warmup-epochs", "0", "--n-source", "128",
                           "--n-target", "64", "--negatives", "0"});
  CHECK(t.code == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  CHECK(manifest["seeds"]["GAZEPROMPT_SEED"] == 9);
  CHECK(manifest["seeds"]["seed"] == 9);

  setenv("GAZEPROMPT_SEED", "nine", 1);
  CHECK(invoke({"config"}).code == 2);
  unsetenv("GAZEPROMPT_SEED");
}

TEST_CASE("malformed configs exit 2 and name the key") {
  const fs::path dir = scratch("badcfg");
  auto check_bad = [&](const std::string& body, const std::string& key) {
    std::ofstream(dir / "c.json") << body;
    const Result r = invoke({"config", "--config", (dir / "c.json").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find(key) != std::string::npos);
  };
  check_bad(R"({"lr": "x"})", "/lr");
  check_bad(R"({"source_domain": {"foo": 1}})", "/source_domain/foo");
  check_bad(R"({"lr": )", "error");
  CHECK(invoke({"config", "--config", (dir / "missing.json").string()}).code == 2);
}

TEST_CASE("gradcheck exits 0 when every check passes") {
  const Result r = invoke({"gradcheck", "--configs", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("full_objective") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(invoke({"gradcheck", "--target", "nothing"}).code == 2);
}

TEST_CASE("ablate writes one row per variant") {
  const fs::path dir = scratch("ablate");
  const Result r = invoke({"ablate", "--axis", "K", "--k", "0", "8", "--seeds", "2", "--epochs",
                           "1", "--warmup-epochs", "0", "--n-source", "128", "--n-target", "64",
                           "--out", (dir / "k.csv").string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "k.csv");
  CHECK(count_lines(csv) == 3);
  CHECK(csv.find("\nK=0,") != std::string::npos);
  CHECK(csv.find("\nK=8,") != std::string::npos);
}

TEST_CASE("negatives prints a CSV of unit directions") {
  const Result r = invoke({"negatives", "--k", "4"});
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 5);
  CHECK(r.out.rfind("index,x,y,z,yaw_deg,pitch_deg\n", 0) == 0);
}
