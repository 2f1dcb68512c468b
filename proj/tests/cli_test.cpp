// End-to-end checks of the command-line tool: exit codes, file outputs, and
// reproducibility. Each test shells out to the built binary.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "influence/io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string cli = INFLUENCE_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("influence_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  std::string cmd = cli + " " + args + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kBridgedTriangles =
    "a,b\nb,c\nc,a\nd,e\ne,f\nf,d\na,d\n";

const char* kFitConfig =
    "[prior]\n"
    "a_omega = 1\nb_omega = 1\na_sigma = 1\nb_sigma = 1\n"
    "[sampler]\n"
    "samples = 10\nwarmup = 20\nthin = 1\np = 2\nseed = 5\n";

}  // namespace

TEST_CASE("stats: output, determinism, and error exits") {
  TempDir dir;
  write_file(dir.file("net.csv"), kBridgedTriangles);

  REQUIRE(run("stats --network " + dir.file("net.csv") + " --out " +
              dir.file("stats.json")) == 0);
  auto j = nlohmann::json::parse(read_file(dir.file("stats.json")));
  CHECK(j["n"] == 6);
  CHECK(j["edges"] == 7);
  // two triangles joined by one bridge: the split recovers the triangles,
  // Q = 2 (3/7 - 1/4) = 5/14
  CHECK(j["communities"]["k"] == 2);
  CHECK(std::fabs(j["clustering_modularity"].get<double>() - 5.0 / 14.0) < 1e-9);

  // byte-identical rerun
  REQUIRE(run("stats --network " + dir.file("net.csv") + " --out " +
              dir.file("stats2.json")) == 0);
  CHECK(read_file(dir.file("stats.json")) == read_file(dir.file("stats2.json")));

  // missing input file and empty network
  CHECK(run("stats --network " + dir.file("nope.csv") + " --out " +
            dir.file("x.json")) == 2);
  write_file(dir.file("empty.csv"), "");
  CHECK(run("stats --network " + dir.file("empty.csv") + " --out " +
            dir.file("x.json")) == 2);

  // usage errors
  CHECK(run("stats --out only.json") == 2);
  CHECK(run("unknown-subcommand") == 2);
}

TEST_CASE("fit: draws, manifest, reproducibility, and config errors") {
  TempDir dir;
  write_file(dir.file("net.csv"), kBridgedTriangles);
  write_file(dir.file("config.ini"), kFitConfig);

  REQUIRE(run("fit --network " + dir.file("net.csv") + " --config " +
              dir.file("config.ini") + " --out " + dir.file("run1")) == 0);

  // ten kept draws: schema line + header + 10 rows
  std::istringstream draws(read_file(dir.file("run1.draws.csv")));
  int lines = 0;
  std::string line;
  while (std::getline(draws, line)) ++lines;
  CHECK(lines == 12);

  auto manifest = nlohmann::json::parse(read_file(dir.file("run1.manifest.json")));
  CHECK(manifest["config"]["a_omega"] == 1.0);
  CHECK(manifest["seed"] == 5);
  CHECK(manifest["n"] == 6);
  CHECK(manifest["dic"].contains("p_d"));
  CHECK(manifest["vertex_ids"].size() == 6);
  CHECK(manifest["correlation_OI"].contains("contains_zero"));
  CHECK(manifest["correlation_OI"]["lower"].get<double>() <=
        manifest["correlation_OI"]["upper"].get<double>());

  REQUIRE(run("fit --network " + dir.file("net.csv") + " --config " +
              dir.file("config.ini") + " --out " + dir.file("run2")) == 0);
  CHECK(read_file(dir.file("run1.draws.csv")) ==
        read_file(dir.file("run2.draws.csv")));
  CHECK(read_file(dir.file("run1.manifest.json")) ==
        read_file(dir.file("run2.manifest.json")));

  // a different seed changes the draws
  REQUIRE(run("fit --network " + dir.file("net.csv") + " --config " +
              dir.file("config.ini") + " --seed 77 --out " + dir.file("run3")) ==
          0);
  CHECK(read_file(dir.file("run1.draws.csv")) !=
        read_file(dir.file("run3.draws.csv")));

  // missing config key
  write_file(dir.file("broken.ini"),
             "[prior]\na_omega = 1\nb_omega = 1\na_sigma = 1\nb_sigma = 1\n"
             "[sampler]\nsamples = 10\nwarmup = 5\nthin = 1\n");
  CHECK(run("fit --network " + dir.file("net.csv") + " --config " +
            dir.file("broken.ini") + " --out " + dir.file("bad")) == 2);

  // non-positive hyperparameter
  write_file(dir.file("neg.ini"),
             "[prior]\na_omega = -1\nb_omega = 1\na_sigma = 1\nb_sigma = 1\n"
             "[sampler]\nsamples = 10\nwarmup = 5\nthin = 1\np = 2\n");
  CHECK(run("fit --network " + dir.file("net.csv") + " --config " +
            dir.file("neg.ini") + " --out " + dir.file("bad")) == 2);
}

TEST_CASE("ppc consumes fit draws") {
  TempDir dir;
  write_file(dir.file("net.csv"), kBridgedTriangles);
  write_file(dir.file("config.ini"), kFitConfig);
  REQUIRE(run("fit --network " + dir.file("net.csv") + " --config " +
              dir.file("config.ini") + " --out " + dir.file("run")) == 0);

  REQUIRE(run("ppc --network " + dir.file("net.csv") + " --draws " +
              dir.file("run.draws.csv") + " --seed 3 --out " + dir.file("ppc")) ==
          0);
  auto summary = nlohmann::json::parse(read_file(dir.file("ppc.summary.json")));
  CHECK(summary["statistics"].size() == 4);
  CHECK(summary["statistics"].contains("density"));
  CHECK(summary["statistics"]["density"]["replicates"] == 10);

  // csv rows: schema + header + 4 stats x 10 replicates
  std::istringstream csv(read_file(dir.file("ppc.ppc.csv")));
  int lines = 0;
  std::string line;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 42);

  // schema mismatch: a state file is not a draws file
  CHECK(run("ppc --network " + dir.file("net.csv") + " --draws " +
            dir.file("run.mean_state.csv") + " --out " + dir.file("bad")) == 2);
}

TEST_CASE("diffuse on the two-vertex fixture reaches everyone") {
  TempDir dir;
  write_file(dir.file("net.csv"), "a,b\n");
  write_file(dir.file("state.csv"),
             "# influence-state 1.0\nid,o,u_1,u_2\na,0.5,1,0\nb,0.5,0.8,0\n");
  write_file(dir.file("state.json"),
             "{\"schema\":{\"name\":\"influence-state-meta\",\"version\":\"1.0\"},"
             "\"omega2\":1,\"sigma2\":1,\"p\":2}");

  REQUIRE(run("diffuse --network " + dir.file("net.csv") + " --state " +
              dir.file("state.csv") + " --state-meta " + dir.file("state.json") +
              " --support a --seed 9 --out " + dir.file("cascade")) == 0);
  auto summary =
      nlohmann::json::parse(read_file(dir.file("cascade.summary.json")));
  CHECK(summary["reach"].get<double>() == 1.0);
  CHECK(summary["n_jumps"] == 2);
  CHECK(summary["stop_reason"] == "exhausted");

  // unknown seed id
  CHECK(run("diffuse --network " + dir.file("net.csv") + " --state " +
            dir.file("state.csv") + " --state-meta " + dir.file("state.json") +
            " --support zz --out " + dir.file("bad")) == 2);
}

TEST_CASE("grid and anova run end to end at a smoke scale") {
  TempDir dir;
  REQUIRE(run("grid --n 80 --replicates 4 --seed 11 --threads 2 --out " +
              dir.file("grid.csv")) == 0);
  std::istringstream csv(read_file(dir.file("grid.csv")));
  int lines = 0;
  std::string line;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 50);  // schema + header + 48 records

  REQUIRE(run("anova --grid " + dir.file("grid.csv") + " --response time --out " +
              dir.file("anova.json")) == 0);
  auto report = nlohmann::json::parse(read_file(dir.file("anova.json")));
  CHECK(report["factors"].size() == 4);
  CHECK(report["response"] == "log_total_time");
  CHECK(report["diagnostics"].contains("levene_p"));

  REQUIRE(run("anova --grid " + dir.file("grid.csv") +
              " --response reach --out " + dir.file("anova2.json")) == 0);
  auto reach_report = nlohmann::json::parse(read_file(dir.file("anova2.json")));
  CHECK(reach_report["response"] == "log_reach");
}

TEST_CASE("anova tolerates cells emptied by zero-time exclusions") {
  TempDir dir;
  // build a grid where one scenario's replicates all have zero diffusion
  // time: they drop from the log-time fit and the emptied cell must not
  // break the diagnostics
  influence::GridConfig config;
  config.n = 50;
  auto specs = influence::enumerate_scenarios(config);
  influence::Rng rng(77);
  std::vector<influence::ExperimentRecord> records;
  int sid = 0;
  for (const auto& spec : specs) {
    for (int r = 0; r < 4; ++r) {
      influence::ExperimentRecord rec;
      rec.spec_id = sid;
      rec.replicate = r;
      rec.o_dist = spec.o_dist;
      rec.i_dist = spec.i_dist;
      rec.modularity_regime = spec.modularity_regime;
      rec.initiator_rule = spec.initiator_rule;
      rec.total_time = sid == 4 ? 0.0 : rng.gamma(2.0, 5.0);
      rec.reach = rng.uniform(0.01, 1.0);
      rec.realized_modularity = 0.0;
      rec.realized_avg_degree = 10.0;
      records.push_back(rec);
    }
    ++sid;
  }
  {
    std::ofstream out(dir.file("grid.csv"));
    influence::write_grid_csv(out, records);
  }
  REQUIRE(run("anova --grid " + dir.file("grid.csv") + " --response time --out " +
              dir.file("report.json")) == 0);
  auto report = nlohmann::json::parse(read_file(dir.file("report.json")));
  CHECK(report["excluded_records"] == 4);
  CHECK(report["factors"].size() == 4);
  CHECK_FALSE(report["diagnostics"]["levene_p"].is_null());
}
