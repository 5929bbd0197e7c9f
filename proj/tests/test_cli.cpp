#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using hopflax::cli::main_entry;

namespace {

fs::path tmp_root() {
  const char* env = std::getenv("HOPFLAX_TEST_TMP");
  const fs::path root = env && *env ? fs::path(env) : fs::temp_directory_path() / "hopflax_cli_test";
  fs::create_directories(root);
  return root;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "hopflax");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

nlohmann::json json_of(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("gen is byte deterministic and writes a manifest") {
  const auto dir = tmp_root() / "gen";
  const auto file = (dir / "s.json").string();
  fs::create_directories(dir);
  const auto a = run({"gen", "--kind", "circle", "--n", "256", "--length", "6.2832", "--out", file,
                      "--out-dir", dir.string()});
  REQUIRE(a.code == 0);
  const std::string first = slurp(file);
  const auto b = run({"gen", "--kind", "circle", "--n", "256", "--length", "6.2832", "--out", file,
                      "--out-dir", dir.string()});
  CHECK(b.code == 0);
  CHECK(slurp(file) == first);
  const auto manifest = json_of(dir / "run.json");
  CHECK(manifest["config"]["command"] == "gen");
  CHECK(manifest["seed"] == 7);
  CHECK(manifest.contains("wall_time_seconds"));
  CHECK(manifest.contains("version"));
  CHECK(manifest["exit_code"] == 0);
}

TEST_CASE("semigroup on a saved space passes its exact checks") {
  const auto dir = tmp_root() / "semigroup";
  fs::create_directories(dir);
  const auto file = (dir / "s.json").string();
  REQUIRE(run({"gen", "--space", "circle:256:6.2832", "--out", file, "--out-dir", dir.string()}).code == 0);
  const auto r = run({"semigroup", "--space", file, "--field", "cos", "--times", "geo:0.001:1:16", "--steps",
                      "0.1,0.05,0.025", "--out-dir", dir.string()});
  CHECK(r.code == 0);
  const auto trace = json_of(dir / "trace.json");
  CHECK(trace["times"].size() == 16);
  CHECK(trace["checks"]["pass"] == true);
  CHECK(trace["checks"]["pruned_matches_exhaustive"] == true);
  CHECK(trace["residual_vs_s"].size() == 48);
  CHECK(run({"plot", "--report", (dir / "trace.json").string(), "--kind", "residual_vs_s", "--out-dir",
             dir.string()})
            .code == 0);
  CHECK(slurp(dir / "residual_vs_s.csv").starts_with("t,s,mean_abs\n"));
}

TEST_CASE("defect_vs_mesh plot data decreases") {
  const auto dir = tmp_root() / "mesh";
  const auto r = run({"semigroup", "--space", "circle:128:6.283185307179586", "--times", "0.5", "--mesh-levels",
                      "3", "--out-dir", dir.string()});
  REQUIRE(r.code == 0);
  const auto rows = json_of(dir / "trace.json")["defect_vs_mesh"];
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["n"] == 128);
  CHECK(rows[2]["n"] == 512);
  CHECK(rows[1]["defect"].get<double>() < rows[0]["defect"].get<double>());
  CHECK(rows[2]["defect"].get<double>() < rows[1]["defect"].get<double>());
  CHECK(run({"plot", "--report", (dir / "trace.json").string(), "--kind", "defect_vs_mesh", "--out-dir",
             dir.string()})
            .code == 0);
}

TEST_CASE("chain exit codes and reproducible reports") {
  const auto dir = tmp_root() / "chain";
  const auto r = run({"chain", "--space", "gauss:201:1:4", "--K", "0.9", "--tau", "0.05", "--seed", "7",
                      "--out-dir", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("chain consistent") != std::string::npos);
  const std::string first = slurp(dir / "report.json");
  REQUIRE(run({"chain", "--space", "gauss:201:1:4", "--K", "0.9", "--tau", "0.05", "--seed", "7", "--out-dir",
               dir.string()})
              .code == 0);
  CHECK(slurp(dir / "report.json") == first);
  const auto report = json_of(dir / "report.json");
  CHECK(report["verdict"] == "consistent");
  CHECK(report["traces"]["psi"].size() == 4);

  const auto adversarial = run({"chain", "--space", "gauss:201:1:4", "--K", "1.5", "--out-dir", (dir / "k15").string()});
  CHECK(adversarial.code == 0);
  CHECK(adversarial.out.find("hypothesis LSI(K) fails") != std::string::npos);

  REQUIRE(run({"plot", "--report", (dir / "report.json").string(), "--kind", "psi", "--out-dir", dir.string()})
              .code == 0);
  CHECK(slurp(dir / "psi.csv").starts_with("series,t,psi\n"));
  CHECK(run({"plot", "--report", (dir / "report.json").string(), "--kind", "defect_vs_mesh", "--out-dir",
             dir.string()})
            .code == 2);
}

TEST_CASE("a chain counterexample exits 1") {
  // On two points a small tilt moves mass linearly in its size while the
  // entropy grows quadratically, so the Talagrand stage fails where LSI holds.
  const auto dir = tmp_root() / "fail";
  const auto r = run({"chain", "--space", "path:2", "--K", "1", "--tau", "0.05", "--out-dir", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.out.find("counterexample to LSI(K) => T(K)") != std::string::npos);
  CHECK(json_of(dir / "report.json")["verdict"] == "lsi_to_t_counterexample");
  CHECK(json_of(dir / "run.json")["exit_code"] == 1);

  const auto t = run({"transport", "--space", "path:11", "--from", "tilt:1", "--out-dir", dir.string()});
  CHECK(t.code == 0);
  CHECK(json_of(dir / "plan.json").contains("coupling"));
}

TEST_CASE("constants writes witnesses that reproduce the report") {
  const auto dir = tmp_root() / "constants";
  const auto r = run({"constants", "--space", "gauss:61:1:4", "--which", "lsi,poincare", "--budget", "50",
                      "--out-dir", dir.string()});
  REQUIRE(r.code == 0);
  const auto report = json_of(dir / "report.json");
  CHECK(report["K_estimates"].contains("lsi"));
  CHECK(report["K_estimates"].contains("poincare"));
  CHECK_FALSE(report["K_estimates"].contains("talagrand"));
  CHECK(fs::exists(dir / "witness_lsi.csv"));
  CHECK(json_of(dir / "run.json")["findings"]["reproducible"] == true);
}

TEST_CASE("usage errors exit 2") {
  const auto dir = tmp_root() / "usage";
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"chain", "--space", "gauss:201:1:4", "--out-dir", dir.string()}).code == 2);
  CHECK(run({"semigroup", "--space", (dir / "missing.json").string(), "--out-dir", dir.string()}).code == 2);
  CHECK(run({"semigroup", "--space", "circle:16:1", "--times", "geo:1:0.1:4", "--out-dir", dir.string()}).code == 2);
  CHECK(run({"semigroup", "--space", "circle:16:1", "--times", "0,1", "--out-dir", dir.string()}).code == 2);
  CHECK(run({"gen", "--kind", "circle", "--out-dir", dir.string()}).code == 2);
  CHECK(run({"gen", "--kind", "circle", "--n", "8", "--space", "path:3", "--out-dir", dir.string()}).code == 2);
  CHECK(run({"gen", "--space", "gauss:11:1:2", "--out-dir", dir.string()}).code == 2);
  CHECK(run({"plot", "--report", (dir / "none.json").string(), "--kind", "psi", "--out-dir", dir.string()}).code == 2);
  const auto bad = dir / "bad.json";
  fs::create_directories(dir);
  std::ofstream(bad) << "{\"n\": 2, \"edges\": [[0, 0, 1]], \"measure\": [1, 1]}";
  const auto r = run({"doubling", "--space", bad.string(), "--out-dir", dir.string()});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  CHECK(json_of(dir / "run.json")["exit_code"] == 2);
  CHECK(run({"gen", "--space", "path:3", "--out", "/proc/hopflax/forbidden.json", "--out-dir", dir.string()}).code == 2);
}

TEST_CASE("output directory from the environment") {
  const auto dir = tmp_root() / "from_env";
  fs::remove_all(dir);
  ::setenv("HOPFLAX_OUT_DIR", dir.string().c_str(), 1);
  const auto r = run({"doubling", "--space", "circle:64:1"});
  ::unsetenv("HOPFLAX_OUT_DIR");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "doubling.json"));
  CHECK(fs::exists(dir / "run.json"));
}
