#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fedgen/sampling.hpp"

namespace fedgen {

struct DatasetConfig {
  std::string train;
  std::string eval;
  std::string vocab;
};

struct ModelConfig {
  int context_len = 2;
  std::string init = "zero";  // "zero" (uniform conditionals) or "gaussian"
  double init_sigma = 0.1;
  int train_epochs = 20;  // pooled pre-training for trueput/decode commands
  double train_lr = 0.5;
};

struct GrammarConfig {
  int max_depth = 8;
  // (open, close) symbol pairs; empty = consecutive vocab symbols pair up
  std::vector<std::pair<std::string, std::string>> pairs;
};

struct PartitionConfig {
  double alpha = 1.0;
  int n_clients = 4;
  int n_groups = 1;
  int n_isolated = 0;
};

struct FlSection {
  int rounds = 1;
  double participation = 1.0;
  int epochs_per_round = 1;
  double lr = 0.5;
  std::string metric = "sample_ratio";
  std::string zero_score_fallback = "error";
  int metric_n_samples = 100;
};

struct MergeSection {
  std::string method = "weighted_average";
  double drop_rate = 0.5;
};

struct EvalSection {
  int n_samples = 200;
  int max_len = 32;
  SamplingStrategy strategy;
};

struct TrueputSection {
  double p = 0.3;
  std::string latency = "batched";
  double t0 = 1.0;
  double per_sample = 0.0;
  int k_max = 32;
  std::vector<int> capacity_grid = {1, 2, 4, 8};
  std::string normalization = "batch";
  std::vector<SamplingStrategy> grid;
  int budget_samples = 8;
};

struct DecodeSection {
  std::vector<int> tree_sizes;
  int ceiling = 32;
  int heads_depth = 4;
  int learn_steps = 500;
  double learn_lr = 0.1;
  int max_len = 32;
  int n_prompts = 32;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  DatasetConfig dataset;
  ModelConfig model;
  GrammarConfig grammar;
  PartitionConfig partition;
  FlSection fl;
  MergeSection merge;
  EvalSection eval;
  TrueputSection trueput;
  DecodeSection decode;
  std::string echo;  // normalized config text, written before any work
};

// Strict parse: unknown keys anywhere reject the whole config.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace fedgen
