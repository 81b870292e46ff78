#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fedgen/eval.hpp"
#include "fedgen/ledger.hpp"
#include "fedgen/model.hpp"

namespace fedgen {

enum class MetricKind { sample_ratio, syntax_accuracy, semantic_accuracy, custom };

struct EvalConfig {
  ClientDataset validation;
  GrammarSpec grammar;
  int n_samples = 100;
  SamplingStrategy strategy;
  int max_len = 64;
  std::uint64_t seed = 0;
};

// The pluggable scoring function g(.) that sets aggregation weights.
struct AggregationMetric {
  MetricKind kind = MetricKind::sample_ratio;
  std::optional<EvalConfig> eval_config;  // required for the accuracy kinds
  std::function<double(const ToyModel&, std::size_t)> custom_fn;
};

double score(const AggregationMetric& metric, const ToyModel& model, std::size_t data_size);

// Scores scaled to sum to 1. Throws numeric_error on negative, non-finite, or
// all-zero inputs.
std::vector<double> normalize_scores(const std::vector<double>& scores);

// Normalized score-weighted average of the models' parameters.
ToyModel aggregate(const std::vector<ToyModel>& models, const std::vector<double>& scores);

enum class ZeroScoreFallback { error, uniform };

struct FLConfig {
  int rounds = 1;
  double participation = 1.0;  // fraction in (0, 1]
  int epochs_per_round = 1;
  double lr = 0.5;
  AggregationMetric metric;
  std::uint64_t seed = 0;
  ZeroScoreFallback zero_score_fallback = ZeroScoreFallback::error;
};

struct RoundRecord {
  int round = 0;
  std::vector<int> participants;
  std::vector<double> raw_scores;
  std::vector<double> weights;
  std::optional<EvalReport> post_agg_eval;
};

struct FLResult {
  ToyModel model;
  std::vector<RoundRecord> records;
};

// One federated group: per-round seeded client sampling without replacement,
// local training, scoring, weighted aggregation. Every participant upload is
// charged to the ledger on `channel`.
FLResult run_fl(const std::vector<ClientDataset>& group, const ToyModel& init, const FLConfig& cfg,
                CommLedger& ledger, TransferChannel channel = TransferChannel::group);

}  // namespace fedgen
