#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "proxkit/experiment.hpp"

using namespace proxkit;
using nlohmann::json;

namespace {

json small_config() {
  return json::parse(R"({
    "name": "unit",
    "seed": 42,
    "metric": {"shells": 8, "mesh_step": 0.02},
    "experiments": [
      {"kind": "metric_table", "name": "table", "verify_axioms": true,
       "functions": [
         {"type": "zero", "dim": 1},
         {"type": "quadratic", "dim": 1, "q": 1.0},
         {"type": "abs_sum", "dim": 1, "weight": 1.0}
       ]},
      {"kind": "perturbation_sweep", "sup_samples": 200,
       "function": {"type": "abs_sum", "dim": 1, "weight": 1.0},
       "sigmas": [0.25], "eps": [0.5]},
      {"kind": "dynamics", "radius": 3.0, "starts": 8, "expect": ["positive"],
       "functions": [{"type": "quadratic", "dim": 1, "q": 1.0, "b": -2.0}]},
      {"kind": "checks", "samples": 500, "cycles": 100, "include_counterexample": true,
       "functions": [{"type": "abs_sum", "dim": 1, "weight": 1.0}]},
      {"kind": "stability", "sigma": 0.005, "radius": 2.0, "eps": 0.05,
       "starts": 8, "max_n0": 200,
       "function": {"type": "quadratic", "dim": 1, "q": 1.0, "b": -2.0}}
    ]
  })");
}

std::string dump_records(const RunOutcome& out) {
  std::ostringstream os;
  for (const json& r : out.records) write_jsonl_line(os, r);
  return os.str();
}

}  // namespace

TEST_CASE("a full run covers every experiment kind and passes") {
  const RunOutcome out = run_experiments(small_config());
  CHECK(out.failures == 0);
  CHECK(out.all_passed());
  REQUIRE_FALSE(out.records.empty());
  CHECK(out.records.front().at("record") == "meta");
  CHECK(out.records.back().at("record") == "summary");
  CHECK(out.records.back().at("failures") == 0);
  CHECK(out.records.back().at("experiments") == 5);
  // 3 metric pairs + axioms + sigma + eps + dynamics + operator_check
  // + resolvent_check + counterexample + stability, plus meta and summary.
  CHECK(out.records.size() == 13);
  CHECK(out.experiments.size() == 5);
  CHECK(out.experiments[0].at("label") == "table");
  CHECK(out.experiments[1].at("label") == "perturbation_sweep#1");

  for (const json& r : out.records) {
    if (r.at("record") == "meta" || r.at("record") == "summary") continue;
    CHECK(r.contains("experiment"));
    CHECK(r.at("pass").get<bool>());
  }

  // The structural prox identity makes the closed-form gap exactly zero.
  for (const json& r : out.records) {
    if (r.at("record") == "perturbation") CHECK(r.at("sup_gap_closed").get<double>() == 0.0);
    if (r.at("record") == "dynamics") {
      CHECK(r.at("verdict") == "positive");
      CHECK(r.at("minimizer_gap").get<double>() <= 1e-8);
    }
    if (r.at("record") == "stability") {
      CHECK(r.at("verdict") == "positive");
      CHECK(r.at("n0").get<int>() <= 200);
    }
    if (r.at("record") == "counterexample") {
      CHECK(r.at("cycle_min_margin").get<double>() < -1e-3);
      CHECK(r.at("witness_cycle").is_array());
    }
  }
}

TEST_CASE("identical seeds give byte-identical records") {
  const json cfg = small_config();
  const std::string a = dump_records(run_experiments(cfg));
  const std::string b = dump_records(run_experiments(cfg));
  CHECK(a == b);

  std::ostringstream csv_a, csv_b;
  write_csv_summary(csv_a, run_experiments(cfg).records);
  write_csv_summary(csv_b, run_experiments(cfg).records);
  CHECK(csv_a.str() == csv_b.str());
  CHECK(csv_a.str().rfind("experiment,record,pass,detail\n", 0) == 0);
}

TEST_CASE("a seed override lands in the meta record") {
  RunOptions opts;
  opts.has_seed_override = true;
  opts.seed = 7;
  const RunOutcome out = run_experiments(small_config(), opts);
  CHECK(out.records.front().at("seed").get<std::uint64_t>() == 7);
  CHECK(out.failures == 0);
}

TEST_CASE("verdict expectations are enforced") {
  json cfg = json::parse(R"({
    "experiments": [
      {"kind": "dynamics", "radius": 3.0, "starts": 8, "expect": ["negative"],
       "functions": [{"type": "quadratic", "dim": 1, "q": 1.0, "b": -2.0}]}
    ]
  })");
  const RunOutcome out = run_experiments(cfg);
  CHECK(out.failures == 1);
  CHECK_FALSE(out.all_passed());
}

TEST_CASE("stability with a flat base reports the missing target") {
  json cfg = json::parse(R"({
    "experiments": [
      {"kind": "stability", "sigma": 0.1, "radius": 1.0, "eps": 0.01, "starts": 8,
       "function": {"type": "zero", "dim": 1}}
    ]
  })");
  const RunOutcome out = run_experiments(cfg);
  CHECK(out.failures == 1);
  bool found = false;
  for (const json& r : out.records) {
    if (r.at("record") == "stability") {
      found = true;
      CHECK(r.at("base_verdict") == "negative");
      CHECK_FALSE(r.at("pass").get<bool>());
    }
  }
  CHECK(found);
}

TEST_CASE("validation accepts the sample config without executing") {
  json cfg = small_config();
  // Make execution prohibitively slow; validation must still return fast.
  cfg["experiments"][2]["starts"] = 100000000;
  CHECK_NOTHROW(validate_config(cfg));

  const auto labels = list_experiments(cfg);
  REQUIRE(labels.size() == 5);
  CHECK(labels[0].at("label") == "table");
  CHECK(labels[0].at("kind") == "metric_table");
  CHECK(labels[4].at("label") == "stability#4");
}

TEST_CASE("validation rejects malformed configs") {
  const char* bad[] = {
      R"({"experiments": []})",
      R"({"experiments": [{"kind": "nope"}]})",
      R"({"experiments": [{"kind": "dynamics"}]})",
      R"({"experiments": [{"kind": "dynamics", "functions": [{"type": "zero", "dim": 1}],
          "expect": ["positive", "negative"]}]})",
      R"({"experiments": [{"kind": "dynamics", "functions": [{"type": "zero", "dim": 1}],
          "surprise": 1}]})",
      R"({"experiments": [{"kind": "perturbation_sweep",
          "function": {"type": "zero", "dim": 1}, "sigmas": [1.5]}]})",
      R"({"experiments": [{"kind": "stability", "sigma": 0.1,
          "function": {"type": "zero", "dim": 1}, "eps": -1}]})",
      R"({"seed": "abc", "experiments": [{"kind": "checks",
          "functions": [{"type": "zero", "dim": 1}]}]})",
      R"({"metric": {"mesh_step": 0}, "experiments": [{"kind": "checks",
          "functions": [{"type": "zero", "dim": 1}]}]})",
      R"({"metric": {"shells": 8}, "experiments": [{"kind": "metric_table",
          "functions": [{"type": "zero", "dim": 1}, {"type": "zero", "dim": 2}]}]})",
      R"({"bogus_top_level": 1, "experiments": [{"kind": "checks",
          "functions": [{"type": "zero", "dim": 1}]}]})",
  };
  for (const char* text : bad) {
    INFO(text);
    CHECK_THROWS_AS(validate_config(json::parse(text)), ConfigError);
  }
}

TEST_CASE("csv summary escapes delimiters and quotes") {
  std::vector<json> records;
  records.push_back(json{{"experiment", "e,1"},
                         {"record", "r\"x"},
                         {"pass", true},
                         {"note", "v w"}});
  std::ostringstream os;
  write_csv_summary(os, records);
  CHECK(os.str() ==
        "experiment,record,pass,detail\n"
        "\"e,1\",\"r\"\"x\",true,note=v w\n");
}
