#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fedgen/config.hpp"
#include "fedgen/errors.hpp"

using namespace fedgen;

TEST_CASE("defaults survive an empty config") {
  ExperimentConfig cfg = parse_config("{}");
  CHECK(cfg.seed == 0);
  CHECK(cfg.model.context_len == 2);
  CHECK(cfg.fl.metric == "sample_ratio");
  CHECK(cfg.merge.method == "weighted_average");
  CHECK(cfg.trueput.latency == "batched");
  CHECK_FALSE(cfg.echo.empty());
}

TEST_CASE("a full config round-trips") {
  ExperimentConfig cfg = parse_config(R"json({
    "seed": 42,
    "dataset": {"train": "t.tsv", "eval": "e.tsv", "vocab": "v.txt"},
    "model": {"context_len": 3, "init": "gaussian", "init_sigma": 0.2,
              "train_epochs": 5, "train_lr": 0.3},
    "grammar": {"max_depth": 6, "pairs": [["(", ")"], ["[", "]"]]},
    "partition": {"alpha": 0.5, "n_clients": 40, "n_groups": 4, "n_isolated": 4},
    "fl": {"rounds": 10, "participation": 0.1, "epochs_per_round": 2, "lr": 0.4,
           "metric": "syntax_accuracy", "zero_score_fallback": "uniform",
           "metric_n_samples": 64},
    "merge": {"method": "dare", "drop_rate": 0.3},
    "eval": {"n_samples": 100, "max_len": 24,
             "strategy": {"kind": "top_k", "top_k": 2, "temperature": 0.9}},
    "trueput": {"p": 0.25, "latency": "linear", "t0": 1.5, "per_sample": 0.1,
                "k_max": 16, "capacity_grid": [1, 2], "normalization": "per_design",
                "grid": [{"kind": "greedy"}, {"kind": "temperature", "n_candidates": 8}],
                "budget_samples": 16},
    "decode": {"tree_sizes": [1, 2, 4], "ceiling": 16, "heads_depth": 3,
               "learn_steps": 100, "learn_lr": 0.05, "max_len": 20, "n_prompts": 8}
  })json");
  CHECK(cfg.seed == 42);
  CHECK(cfg.model.init == "gaussian");
  CHECK(cfg.grammar.pairs.size() == 2);
  CHECK(cfg.partition.n_clients == 40);
  CHECK(cfg.fl.metric == "syntax_accuracy");
  CHECK(cfg.fl.zero_score_fallback == "uniform");
  CHECK(cfg.merge.drop_rate == 0.3);
  CHECK(cfg.eval.strategy.kind == SamplingKind::top_k);
  CHECK(cfg.eval.strategy.top_k == 2);
  CHECK(cfg.trueput.normalization == "per_design");
  REQUIRE(cfg.trueput.grid.size() == 2);
  CHECK(cfg.trueput.grid[1].n_candidates == 8);
  CHECK(cfg.decode.tree_sizes == std::vector<int>{1, 2, 4});
}

TEST_CASE("unknown keys are rejected everywhere") {
  CHECK_THROWS_AS(parse_config(R"({"sed": 1})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"model": {"contextlen": 2}})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"fl": {"round": 3}})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"eval": {"strategy": {"kind": "greedy", "beam": 2}}})"),
                  config_error);
  CHECK_THROWS_AS(parse_config(R"({"trueput": {"grid": [{"kind": "greedy", "tmp": 1}]}})"),
                  config_error);
}

TEST_CASE("bad values are rejected") {
  CHECK_THROWS_AS(parse_config("not json"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"seed": "forty-two"})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"model": {"init": "xavier"}})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"fl": {"metric": "loss"}})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"fl": {"zero_score_fallback": "retry"}})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"merge": {"method": "ties"}})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"trueput": {"latency": "quadratic"}})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"trueput": {"normalization": "mean"}})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"eval": {"strategy": {"temperature": 1.0}}})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"eval": {"strategy": {"kind": "warm"}}})"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"grammar": {"pairs": [["("]]}})"), config_error);
}

TEST_CASE("missing config file is a config error") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), config_error);
}
