#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "saddle_cli/commands.hpp"
#include "saddle_cli/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using saddle::cli::run_command;

namespace {

fs::path scratch(const std::string& name) {
  const char* base = std::getenv("SADDLE_TEST_TMP");
  fs::path dir = base != nullptr ? fs::path(base) : fs::temp_directory_path() / "saddle_cli_tests";
  dir /= name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Keeps SADDLE_SEED from the caller's environment out of these tests.
struct SeedEnv {
  explicit SeedEnv(const char* value) {
    if (value != nullptr) {
      setenv("SADDLE_SEED", value, 1);
    } else {
      unsetenv("SADDLE_SEED");
    }
  }
  ~SeedEnv() { unsetenv("SADDLE_SEED"); }
};

}  // namespace

TEST_CASE("unknown config keys are rejected with their path") {
  SeedEnv env(nullptr);
  const fs::path dir = scratch("bad_key");
  const auto cfg = write_file(dir / "c.json", R"({"sd": {"tau": 0.01, "bogus": 1}})");
  const Outcome o = run({"sd", "--config", cfg.string()});
  CHECK(o.code == 3);
  CHECK(o.err.find("sd.bogus") != std::string::npos);

  CHECK(run({"sd", "--config", write_file(dir / "s.json", R"({"solver": {}})").string()}).code == 3);
  const Outcome typed = run({"sd", "--config", write_file(dir / "t.json", R"({"gpsd": {"n_new": "many"}})").string()});
  CHECK(typed.code == 3);
  CHECK(typed.err.find("gpsd.n_new") != std::string::npos);
  CHECK(run({"sd", "--config", write_file(dir / "n.json", R"({"sd": {"tau": -1}})").string()}).code == 3);
  CHECK(run({"sd", "--config", write_file(dir / "j.json", "{not json").string()}).code == 3);
  CHECK(run({"sd", "--config", (dir / "missing.json").string()}).code == 3);
}

TEST_CASE("flag and benchmark errors exit with the config code") {
  SeedEnv env(nullptr);
  CHECK(run({"sd", "--no-such-flag"}).code == 3);
  CHECK(run({"frobnicate"}).code == 3);
  CHECK(run({}).code == 3);
  CHECK(run({"sd", "--benchmark", "lorenz"}).code == 3);
  CHECK(run({"sd", "--benchmark", "codesign", "--case", "vii"}).code == 3);
  CHECK(run({"sd", "--x0", "1,2"}).code == 3);
  CHECK(run({"sd", "--seed", "-4"}).code == 3);
  CHECK(run({"sd", "--k", "9"}).code == 3);
  CHECK(run({"bench", "--table", "nope"}).code == 3);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("sd writes a result document") {
  SeedEnv env(nullptr);
  const fs::path dir = scratch("sd");
  const Outcome o = run({"sd", "--benchmark", "rosenbrock", "--case", "ii", "--output-dir", dir.string(), "--trajectory"});
  REQUIRE(o.code == 0);
  const json doc = json::parse(slurp(dir / "sd_rosenbrock_ii_0.json"));
  CHECK(doc == json::parse(o.out));
  CHECK(doc["status"] == "converged");
  CHECK(doc["index"] == 2);
  CHECK(doc["degenerate_count"] == 0);
  CHECK(doc["x_final"].size() == 4);
  CHECK(doc["eigenvalues"].size() == 4);
  CHECK(doc["N_f"].get<int>() == 5 * doc["n_steps"].get<int>());
  CHECK(doc["residual_infnorm"].get<double>() < 1e-3);
  CHECK_FALSE(doc.contains("N_s"));
  CHECK(fs::exists(dir / "sd_rosenbrock_ii_0_trajectory.csv"));
}

TEST_CASE("gpsd output is byte-identical for identical config and seed") {
  SeedEnv env(nullptr);
  const fs::path a = scratch("gpsd_a");
  const fs::path b = scratch("gpsd_b");
  const Outcome oa = run({"gpsd", "--benchmark", "rosenbrock", "--case", "ii", "--seed", "7", "--output-dir", a.string()});
  const Outcome ob = run({"gpsd", "--benchmark", "rosenbrock", "--case", "ii", "--seed", "7", "--output-dir", b.string()});
  REQUIRE(oa.code == 0);
  CHECK(ob.code == 0);
  const std::string name = "gpsd_rosenbrock_ii_7";
  CHECK(slurp(a / (name + ".json")) == slurp(b / (name + ".json")));
  CHECK(slurp(a / (name + "_subproblems.jsonl")) == slurp(b / (name + "_subproblems.jsonl")));
  const json doc = json::parse(oa.out);
  CHECK(doc["index"] == 2);
  CHECK(doc["seed"] == 7);
  CHECK(doc["N_f"].get<int>() == 100 + 100 * doc["region_updates"].get<int>());
}

TEST_CASE("seed precedence: flag over SADDLE_SEED over config") {
  const fs::path dir = scratch("seed");
  const auto cfg = write_file(dir / "c.json", R"({"run": {"seed": 1, "output_dir": ")" + dir.string() + R"("},
                                                 "benchmark": {"name": "rosenbrock", "case": "i"}})");
  {
    SeedEnv env(nullptr);
    CHECK(json::parse(run({"sd", "--config", cfg.string()}).out)["seed"] == 1);
  }
  {
    SeedEnv env("5");
    CHECK(json::parse(run({"sd", "--config", cfg.string()}).out)["seed"] == 5);
    CHECK(json::parse(run({"sd", "--config", cfg.string(), "--seed", "9"}).out)["seed"] == 9);
    CHECK(fs::exists(dir / "sd_rosenbrock_i_9.json"));
  }
  {
    SeedEnv env("abc");
    CHECK(run({"sd", "--config", cfg.string()}).code == 3);
  }
}

TEST_CASE("non-convergence exits with code 2 and still writes the result") {
  SeedEnv env(nullptr);
  const fs::path dir = scratch("budget");
  const auto cfg = write_file(dir / "c.json", R"({"sd": {"max_steps": 5}})");
  const Outcome o = run({"sd", "--config", cfg.string(), "--output-dir", dir.string()});
  CHECK(o.code == 2);
  CHECK(json::parse(slurp(dir / "sd_rosenbrock_ii_0.json"))["status"] == "max_steps");
}

TEST_CASE("verify-index reports the tabulated index") {
  SeedEnv env(nullptr);
  const Outcome o = run({"verify-index", "--benchmark", "rosenbrock", "--case", "iv", "--x", "1,1,1,1"});
  REQUIRE(o.code == 0);
  const json doc = json::parse(o.out);
  CHECK(doc["index"] == 4);
  CHECK(doc["degenerate_count"] == 0);
  CHECK(doc["residual_infnorm"] == 0.0);

  const fs::path dir = scratch("verify");
  const auto point = write_file(dir / "p.json", R"({"x_final": [1, 1, 1, 1]})");
  CHECK(json::parse(run({"verify-index", "--case", "i", "--point", point.string()}).out)["index"] == 1);
  CHECK(run({"verify-index", "--case", "i"}).code == 3);
  CHECK(run({"verify-index", "--case", "i", "--x", "1,1"}).code == 3);
}

TEST_CASE("codesign results carry the simulation count") {
  SeedEnv env(nullptr);
  const fs::path dir = scratch("codesign");
  const Outcome o = run({"sd", "--benchmark", "codesign", "--case", "iii", "--output-dir", dir.string()});
  REQUIRE(o.code == 0);
  const json doc = json::parse(o.out);
  CHECK(doc["N_s"] == doc["N_f"]);
  CHECK(doc["index"] == 1);
}

TEST_CASE("landscape writes graph files for a custom model") {
  SeedEnv env(nullptr);
  const fs::path dir = scratch("landscape");
  const auto model = write_file(dir / "dw.json", R"({"matrix": [[-1, 0], [0, 1]], "quartic": [1, 0]})");
  for (const std::string engine : {"sd", "gpsd"}) {
    const Outcome o = run({"landscape", "--benchmark", "custom-file", "--file", model.string(), "--engine", engine,
                           "--jobs", "2", "--output-dir", dir.string()});
    REQUIRE(o.code == 0);
    const json graph = json::parse(slurp(dir / ("landscape_custom-file_" + engine + "_0.json")));
    CHECK(graph["nodes"].size() == 3);
    CHECK(graph["edges"].size() == 2);
    CHECK(fs::exists(dir / ("landscape_custom-file_" + engine + "_0.dot")));
  }
  CHECK(run({"landscape", "--benchmark", "custom-file", "--engine", "magic", "--file", model.string()}).code == 3);
  CHECK(run({"landscape", "--benchmark", "custom-file"}).code == 3);
}

TEST_CASE("bench prints one row per compared quantity") {
  SeedEnv env(nullptr);
  const fs::path dir = scratch("bench");
  const Outcome o = run({"bench", "--table", "rosenbrock-index", "--json", (dir / "b.json").string()});
  CHECK(o.code == 0);
  const json rows = json::parse(slurp(dir / "b.json"));
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.contains("reference_value"));
    CHECK(r.contains("reproduced_value"));
    CHECK(r["pass"] == true);
  }
  CHECK(o.out.find("rosenbrock-index") != std::string::npos);
}

TEST_CASE("config overlay sets nested parameters") {
  saddle::cli::RunConfig cfg = saddle::cli::default_config(saddle::cli::BenchmarkKind::phasefield, "ii", "sd");
  CHECK(cfg.benchmark.phasefield.inv_eta_sq == 80.0);
  CHECK(*cfg.benchmark.k == 2);
  CHECK(cfg.sd.schedule.kind == saddle::DimerDecay::exponential);
  CHECK(saddle::cli::default_config(saddle::cli::BenchmarkKind::phasefield, "iii", "landscape").sd.tau == 0.0005);
  saddle::cli::apply_config(cfg, json::parse(R"({"sd": {"decay": "polynomial", "l0": 0.3}, "gpsd": {"delta": 0.5},
                                               "landscape": {"engine": "gpsd", "jobs": 3}})"));
  CHECK(cfg.sd.schedule.kind == saddle::DimerDecay::polynomial);
  CHECK(cfg.gpsd.sd.schedule.l0 == 0.3);
  CHECK(cfg.gpsd.initial_region.half_width == 0.5);
  CHECK(cfg.landscape.engine == saddle::SearchEngine::gpsd);
  CHECK(cfg.landscape.jobs == 3);
  CHECK_THROWS_AS(saddle::cli::apply_config(cfg, json::parse(R"({"landscape": {"depth": 2}})")), saddle::cli::ConfigError);
}
