#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "certcal/cli.hpp"
#include "certcal/json_io.hpp"
#include "certcal/report.hpp"
#include "support.hpp"

using namespace certcal;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"certcal"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

// Fresh scratch directory per test case, removed on exit.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("certcal_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

Run simulate(const Scratch& s, const std::string& sub, std::initializer_list<std::string> extra = {}) {
  std::vector<std::string> args{"simulate", "--seed", "4", "--n-motions", "40", "--output-dir", s / sub};
  args.insert(args.end(), extra.begin(), extra.end());
  std::vector<const char*> argv{"certcal"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.err = err.str();
  return r;
}

}  // namespace

TEST_CASE("simulate then calibrate recovers the emitted ground truth") {
  Scratch s("roundtrip");
  REQUIRE(simulate(s, "data").code == 0);
  CHECK(fs::exists(s / "data/measurements.jsonl"));
  CHECK(fs::exists(s / "data/path.csv"));
  const json truth = read_json(s / "data/ground_truth.json");
  CHECK(truth.at("observable").get<bool>());
  CHECK(truth.at("schema_version") == kSchemaVersion);

  const Run cal = run({"calibrate", "--input", s / "data/measurements.jsonl", "--output", s / "report.json",
                       "--sdp-trace", s / "trace.csv"});
  CHECK(cal.code == cli::kCertified);
  const json report = read_json(s / "report.json");
  CHECK(report.at("certificate").at("verdict") == "CertifiedGlobal");
  CHECK(report.at("constraint_set") == "r+c+h");
  const Transform got = transform_from_json(report.at("theta"));
  const Transform want = transform_from_json(truth.at("theta"));
  CHECK(rotation_distance_frobenius(got.rotation, want.rotation) < 1e-6);
  CHECK((got.translation - want.translation).norm() < 1e-6);
  CHECK(slurp(s / "trace.csv").rfind("iter,primal_obj,dual_obj", 0) == 0);

  SUBCASE("certify accepts the calibrated answer and the ground truth") {
    const Run self = run({"certify", "--input", s / "data/measurements.jsonl", "--theta", s / "report.json"});
    CHECK(self.code == cli::kCertified);
    const Run gt = run({"certify", "--input", s / "data/measurements.jsonl", "--theta", s / "data/ground_truth.json"});
    CHECK(gt.code == cli::kCertified);
    CHECK(std::abs(json::parse(gt.out).at("gap").get<double>()) < 1e-8);
  }
  SUBCASE("certify rejects a candidate 0.5 rad away") {
    Transform off = want;
    off.rotation = off.rotation * exp_so3(Vec3(0.0, 0.5, 0.0));
    std::ofstream(s / "off.json") << transform_to_json(off).dump();
    const Run bad = run({"certify", "--input", s / "data/measurements.jsonl", "--theta", s / "off.json"});
    CHECK(bad.code == cli::kNotCertified);
    const json j = json::parse(bad.out);
    CHECK(j.at("gap").get<double>() > 0.0);
    CHECK_FALSE(j.at("globally_optimal").get<bool>());
  }
  SUBCASE("trajectory input gives the same answer") {
    REQUIRE(simulate(s, "traj", {"--trajectories"}).code == 0);
    const Run t = run({"calibrate", "--poses-a", s / "traj/poses_a.jsonl", "--poses-b", s / "traj/poses_b.jsonl"});
    CHECK(t.code == cli::kCertified);
    const Transform from_traj = transform_from_json(json::parse(t.out).at("theta"));
    CHECK(rotation_distance_frobenius(from_traj.rotation, want.rotation) < 1e-6);
  }
}

TEST_CASE("simulate is byte-for-byte reproducible") {
  Scratch s("repro");
  REQUIRE(simulate(s, "a", {"--sigma-r", "0.01", "--sigma-t", "0.02"}).code == 0);
  REQUIRE(simulate(s, "b", {"--sigma-r", "0.01", "--sigma-t", "0.02"}).code == 0);
  for (const char* f : {"measurements.jsonl", "ground_truth.json", "path.csv"}) {
    CHECK(slurp(s / (std::string("a/") + f)) == slurp(s / (std::string("b/") + f)));
  }
}

TEST_CASE("flat terrain: flagged unobservable, strict calibration refuses") {
  Scratch s("flat");
  REQUIRE(simulate(s, "flat", {"--amplitude", "0"}).code == 0);
  CHECK_FALSE(read_json(s / "flat/ground_truth.json").at("observable").get<bool>());
  const Run strict = run({"calibrate", "--input", s / "flat/measurements.jsonl", "--strict-observability"});
  CHECK(strict.code == cli::kError);
  CHECK(strict.err.find("at least two") != std::string::npos);
  const Run lax = run({"calibrate", "--input", s / "flat/measurements.jsonl"});
  CHECK(lax.code == cli::kError);
  CHECK(lax.err.find("not observable") != std::string::npos);
}

TEST_CASE("input and flag errors exit with 1") {
  Scratch s("errors");
  std::ofstream(s / "bad.jsonl") << "{\"t\": 0}\nnot json\n";
  const Run bad = run({"calibrate", "--input", s / "bad.jsonl"});
  CHECK(bad.code == cli::kError);
  CHECK(bad.err.find("line 1") != std::string::npos);
  std::ofstream(s / "bad2.jsonl")
      << R"({"t": 0, "a": {"R": [[1,0,0],[0,1,0],[0,0,1]], "t": [0,0,0]}, "b": {"R": [[1,0,0],[0,1,0],[0,0,1]], "t": [0,0,0]}})"
      << "\n{oops\n";
  const Run bad2 = run({"calibrate", "--input", s / "bad2.jsonl"});
  CHECK(bad2.code == cli::kError);
  CHECK(bad2.err.find("line 2") != std::string::npos);

  CHECK(run({"calibrate", "--input", s / "missing.jsonl"}).code == cli::kError);
  CHECK(run({"calibrate"}).code == cli::kError);
  CHECK(run({"simulate", "--output-dir", s / "x"}).code == cli::kError);  // no seed
  CHECK(run({"experiment", "runtime"}).code == cli::kError);               // no seed
  CHECK(run({"experiment", "bogus", "--seed", "1"}).code == cli::kError);
  CHECK(run({"frobnicate"}).code == cli::kError);
  REQUIRE(simulate(s, "d").code == 0);
  CHECK(run({"calibrate", "--input", s / "d/measurements.jsonl", "--constraint-set", "r+x"}).code == cli::kError);
  CHECK(run({"calibrate", "--input", s / "d/measurements.jsonl", "--tol-gap", "-1"}).code == cli::kError);
  CHECK(run({"simulate", "--seed", "1", "--n-motions", "1", "--output-dir", s / "y"}).code == cli::kError);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("experiment: ablation at magnitude 0 certifies everywhere") {
  Scratch s("ablation");
  const Run r = run({"experiment", "ablation", "--seed", "1", "--magnitudes", "0", "--n-axes", "10",
                     "--rotation-only", "--output-dir", s / "out"});
  REQUIRE(r.code == 0);
  const json summary = read_json(s / "out/ablation_summary.json");
  REQUIRE(summary.at("cells").size() == 4);
  for (const auto& c : summary.at("cells")) CHECK(c.at("percent").get<double>() == 100.0);
  CHECK(slurp(s / "out/ablation.csv").rfind("variant,constraint_set", 0) == 0);
}

TEST_CASE("experiment: noise sweep summary carries per-method quantiles and is reproducible") {
  Scratch s("sweep");
  const auto sweep = [&](const std::string& dir, const std::string& jobs) {
    return run({"experiment", "noise-sweep", "--seed", "2", "--sigmas", "0.05", "--n-trials", "4", "--n-motions",
                "30", "--jobs", jobs, "--no-timing", "--output-dir", s / dir});
  };
  REQUIRE(sweep("a", "1").code == 0);
  REQUIRE(sweep("b", "2").code == 0);
  CHECK(slurp(s / "a/noise-sweep_summary.json") == slurp(s / "b/noise-sweep_summary.json"));
  CHECK(slurp(s / "a/noise_sweep.csv") == slurp(s / "b/noise_sweep.csv"));
  const json cell = read_json(s / "a/noise-sweep_summary.json").at("cells").at(0);
  CHECK(cell.at("sigma_r") == 0.05);
  CHECK(cell.at("dominance_violations") == 0);
  for (const char* method : {"convex", "local"}) {
    for (const char* key : {"min", "q1", "median", "q3", "max", "mean"}) {
      CHECK(cell.at(method).at("rotation_error").contains(key));
    }
  }
}

TEST_CASE("experiment: heatmap and runtime write their files") {
  Scratch s("misc");
  REQUIRE(run({"experiment", "heatmap", "--seed", "3", "--angles", "0,3", "--distances", "0", "--n-inits", "4",
               "--n-motions", "30", "--output-dir", s / "h"})
              .code == 0);
  CHECK(read_json(s / "h/heatmap_summary.json").at("cells").size() == 2);
  REQUIRE(run({"experiment", "runtime", "--seed", "3", "--n-list", "10,50", "--runs", "2", "--output-dir", s / "r"})
              .code == 0);
  const json rows = read_json(s / "r/runtime_summary.json").at("rows");
  REQUIRE(rows.size() == 2);
  CHECK(rows.at(1).at("convex_seconds").at("mean").get<double>() > 0.0);
}
