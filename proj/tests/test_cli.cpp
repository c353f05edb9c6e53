#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <string>

#include "regimelab/config.hpp"
#include "regimelab/report.hpp"
#include "test_util.hpp"

using namespace relab;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(REGIMELAB_CLI_PATH) + " " + args +
                          " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

const char* kToyCsv =
    "context_id,action_id,score\n"
    "c0,a0,0.1\nc0,a1,0.7\nc0,a2,0.4\n"
    "c1,a0,0.2\nc1,a1,0.9\nc1,a2,0.5\n";

std::string run_config_json(const std::string& csv_path) {
  return std::string("{\n") +
         "  \"mode\": \"run\",\n"
         "  \"master_seed\": 7,\n"
         "  \"oracle\": {\"type\": \"replay\", \"path\": \"" +
         csv_path +
         "\", \"obs_noise_sd\": 0.1},\n"
         "  \"planners\": [{\"kind\": \"greedy\"}, {\"kind\": \"ucb\"}],\n"
         "  \"episode\": {\"budget\": 2, \"warm_start\": 2, \"seeds\": 4,\n"
         "               \"prior_family\": \"ema\"}\n"
         "}\n";
}

}  // namespace

TEST_CASE("config parsing round-trips idempotently") {
  testutil::TempDir tmp("cfg");
  testutil::write_text(tmp.path("toy.csv"), kToyCsv);
  const std::string text = run_config_json(tmp.path("toy.csv"));
  const ExperimentConfig cfg = ExperimentConfig::from_json_text(text);
  const std::string once = cfg.to_json_text();
  const std::string twice =
      ExperimentConfig::from_json_text(once).to_json_text();
  CHECK(once == twice);

  CHECK_THROWS_AS(ExperimentConfig::from_json_text("{not json"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                      "{\"mode\":\"run\",\"planners\":[{\"kind\":\"bogus\"}]}"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text("{\"mode\":\"run\"}"),
                  ConfigError);
}

TEST_CASE("grid csv round-trips through the parser") {
  ConditionRow row;
  row.benchmark_id = "synthetic";
  row.n_actions = 50;
  row.budget = 10;
  row.b_ratio = 0.2;
  row.tau2 = 0.5;
  row.sigma2 = 0.1;
  row.rho = 0.66;
  row.prs = 0.068;
  PlannerStats g;
  g.hit1_mean = 0.71;
  g.hit1_sem = 0.02;
  g.auc_mean = 0.55;
  g.auc_sem = 0.01;
  row.per_planner["greedy"] = g;
  PlannerStats u = g;
  u.hit1_mean = 0.69;
  row.per_planner["ucb"] = u;

  const std::string csv = grid_csv({row}, {"greedy", "ucb"});
  const auto parsed = parse_grid_csv(csv);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].per_planner.at("greedy").hit1_mean == doctest::Approx(0.71));
  CHECK(parsed[0].per_planner.at("ucb").hit1_mean == doctest::Approx(0.69));
  CHECK(parsed[0].prs == doctest::Approx(0.068));
}

TEST_CASE("cli run produces records and reruns byte-identically") {
  testutil::TempDir tmp("cli");
  testutil::write_text(tmp.path("toy.csv"), kToyCsv);
  testutil::write_text(tmp.path("run.json"),
                       run_config_json(tmp.path("toy.csv")));

  REQUIRE(run_cli("run --config " + tmp.path("run.json") + " --out " +
                  tmp.path("o1")) == 0);
  REQUIRE(run_cli("run --config " + tmp.path("run.json") + " --out " +
                  tmp.path("o2") + " --workers 4") == 0);
  CHECK(testutil::slurp(tmp.path("o1/records.jsonl")) ==
        testutil::slurp(tmp.path("o2/records.jsonl")));
  CHECK(testutil::slurp(tmp.path("o1/summary.csv")) ==
        testutil::slurp(tmp.path("o2/summary.csv")));
  CHECK_FALSE(testutil::slurp(tmp.path("o1/records.jsonl")).empty());

  // 2 planners x 4 seeds x 2 contexts = 16 record lines.
  const std::string records = testutil::slurp(tmp.path("o1/records.jsonl"));
  CHECK(std::count(records.begin(), records.end(), '\n') == 16);
}

TEST_CASE("cli exit codes") {
  testutil::TempDir tmp("cli_err");
  testutil::write_text(tmp.path("toy.csv"), kToyCsv);

  // Unknown planner: config error.
  std::string bad = run_config_json(tmp.path("toy.csv"));
  bad.replace(bad.find("greedy"), 6, "bandit");
  testutil::write_text(tmp.path("bad.json"), bad);
  CHECK(run_cli("run --config " + tmp.path("bad.json")) == 2);

  // Missing oracle file: io error.
  std::string gone = run_config_json(tmp.path("nope.csv"));
  testutil::write_text(tmp.path("gone.json"), gone);
  CHECK(run_cli("run --config " + tmp.path("gone.json")) == 3);

  // Missing config file.
  CHECK(run_cli("run --config " + tmp.path("absent.json")) == 3);

  // Validation failure path.
  CHECK(run_cli("validate --inject-error") == 1);
  CHECK(run_cli("mixture --cate-low 0.01 --cate-high 0.05 --target 0.02") ==
        2);
}

TEST_CASE("cli validate emits one line per registered check") {
  testutil::TempDir tmp("cli_val");
  REQUIRE(run_cli("validate --seed 20240901 --out " +
                  tmp.path("report.jsonl")) == 0);
  const std::string report = testutil::slurp(tmp.path("report.jsonl"));
  CHECK(std::count(report.begin(), report.end(), '\n') == 17);
}

TEST_CASE("cli report-protocol emits the regime block") {
  testutil::TempDir tmp("cli_proto");
  testutil::write_text(tmp.path("toy.csv"), kToyCsv);
  testutil::write_text(tmp.path("run.json"),
                       run_config_json(tmp.path("toy.csv")));
  REQUIRE(run_cli("run --config " + tmp.path("run.json") + " --out " +
                  tmp.path("out")) == 0);
  REQUIRE(run_cli("report-protocol --summary " + tmp.path("out/summary.csv") +
                  " --out " + tmp.path("block.jsonl")) == 0);
  const std::string block = testutil::slurp(tmp.path("block.jsonl"));
  CHECK(block.find("\"budget_ratio\"") != std::string::npos);
  CHECK(block.find("\"context_count\"") != std::string::npos);
  CHECK(block.find("\"prs\"") != std::string::npos);
  CHECK(block.find("\"classification\"") != std::string::npos);
  CHECK(block.find("\"metric\"") != std::string::npos);
}

TEST_CASE("protocol block flags an unmeasured correlation") {
  ProtocolEntry e;
  e.benchmark_id = "x";
  e.prior_condition = "flat";
  e.rho_measured = false;
  e.rho = 0.0;
  e.prs = 0.2;
  e.predicted = "explore";
  const std::string line = protocol_jsonl({e});
  CHECK(line.find("\"rho\":\"unmeasured\"") != std::string::npos);

  e.rho_measured = true;
  e.rho = 0.41;
  const std::string measured = protocol_jsonl({e});
  CHECK(measured.find("\"rho\":0.41") != std::string::npos);
}

TEST_CASE("cli grid + analyze pipeline") {
  testutil::TempDir tmp("cli_grid");
  testutil::write_text(
      tmp.path("grid.json"),
      "{\n"
      "  \"mode\": \"grid\", \"master_seed\": 3,\n"
      "  \"grid\": {\"n_actions\": [30], \"budget_ratios\": [0.1, 0.4],\n"
      "            \"tau2\": [0.5, 2.0], \"sigma2\": [0.1],\n"
      "            \"seeds_per_condition\": 20},\n"
      "  \"planners\": [{\"kind\": \"greedy\"}, {\"kind\": \"ucb\"},\n"
      "                 {\"kind\": \"rank_greedy\"}, {\"kind\": \"random\"}]\n"
      "}\n");
  REQUIRE(run_cli("grid --config " + tmp.path("grid.json") + " --out " +
                  tmp.path("g1")) == 0);
  const std::string csv = testutil::slurp(tmp.path("g1/grid.csv"));
  // 4 conditions x 4 planners + header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);

  // Workers=1 vs workers=8 byte-identical.
  REQUIRE(run_cli("grid --config " + tmp.path("grid.json") + " --workers 1 " +
                  "--out " + tmp.path("gw1")) == 0);
  REQUIRE(run_cli("grid --config " + tmp.path("grid.json") + " --workers 8 " +
                  "--out " + tmp.path("gw8")) == 0);
  CHECK(testutil::slurp(tmp.path("gw1/grid.csv")) ==
        testutil::slurp(tmp.path("gw8/grid.csv")));

  REQUIRE(run_cli("analyze --grid-csv " + tmp.path("g1/grid.csv") +
                  " --explore-planner random --greedy-planner greedy --out " +
                  tmp.path("a1")) == 0);
  const std::string map_csv = testutil::slurp(tmp.path("a1/regime_map.csv"));
  CHECK(std::count(map_csv.begin(), map_csv.end(), '\n') == 5);
  CHECK(map_csv.rfind("benchmark_id,b_ratio,rho,prs,advantage,predicted,"
                      "empirical,in_boundary_zone",
                      0) == 0);
}
