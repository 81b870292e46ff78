#include "fedgen/fed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedgen/rng.hpp"

namespace fedgen {

double score(const AggregationMetric& metric, const ToyModel& model, std::size_t data_size) {
  switch (metric.kind) {
    case MetricKind::sample_ratio:
      return static_cast<double>(data_size);
    case MetricKind::syntax_accuracy:
    case MetricKind::semantic_accuracy: {
      if (!metric.eval_config)
        throw config_error("accuracy metric requires an eval_config");
      const EvalConfig& ec = *metric.eval_config;
      EvalReport r = evaluate(model, ec.validation, ec.grammar, ec.n_samples, ec.strategy, ec.seed,
                              ec.max_len);
      return metric.kind == MetricKind::syntax_accuracy ? r.syntax_accuracy : r.semantic_accuracy;
    }
    case MetricKind::custom:
      if (!metric.custom_fn) throw config_error("custom metric requires a scoring function");
      return metric.custom_fn(model, data_size);
  }
  throw config_error("unknown metric kind");
}

std::vector<double> normalize_scores(const std::vector<double>& scores) {
  double sum = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s) || s < 0.0) throw numeric_error("scores must be finite and nonnegative");
    sum += s;
  }
  if (sum <= 0.0) throw numeric_error("all aggregation scores are zero");
  std::vector<double> w(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) w[i] = scores[i] / sum;
  return w;
}

ToyModel aggregate(const std::vector<ToyModel>& models, const std::vector<double>& scores) {
  if (models.empty() || models.size() != scores.size())
    throw structural_error("aggregate: models and scores must be same nonzero length");
  for (const ToyModel& m : models)
    if (!(m.params.layout == models.front().params.layout) || !(m.vocab == models.front().vocab))
      throw structural_error("aggregate: model layouts differ");

  std::vector<double> w = normalize_scores(scores);
  ToyModel out = models.front();
  std::fill(out.params.values.begin(), out.params.values.end(), 0.0);
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (w[m] == 0.0) continue;  // zero weight excludes the client entirely
    const auto& pv = models[m].params.values;
    for (std::size_t i = 0; i < pv.size(); ++i) out.params.values[i] += w[m] * pv[i];
  }
  return out;
}

FLResult run_fl(const std::vector<ClientDataset>& group, const ToyModel& init, const FLConfig& cfg,
                CommLedger& ledger, TransferChannel channel) {
  if (group.empty()) throw config_error("run_fl: empty group");
  if (!(cfg.participation > 0.0 && cfg.participation <= 1.0))
    throw config_error("participation must be in (0, 1]");
  if (cfg.rounds < 0) throw config_error("rounds must be nonnegative");

  const int n = static_cast<int>(group.size());
  const int per_round = static_cast<int>(std::ceil(cfg.participation * n));
  ledger.bytes_per_transfer = init.params.values.size() * sizeof(double);

  FLResult result{init, {}};
  for (int round = 0; round < cfg.rounds; ++round) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng(cfg.seed).derive(0xF1, static_cast<std::uint64_t>(round));
    rng.shuffle(order);
    order.resize(static_cast<std::size_t>(per_round));

    // Clients are independent; collect updates in participant order so
    // aggregation sees a fixed sequence regardless of scheduling.
    std::vector<ToyModel> updates(order.size(), result.model);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(order.size()); ++i) {
      const int client = order[static_cast<std::size_t>(i)];
      updates[static_cast<std::size_t>(i)] =
          train_local(result.model, group[static_cast<std::size_t>(client)], cfg.epochs_per_round,
                      cfg.lr, derive_seed(cfg.seed, static_cast<std::uint64_t>(client)));
    }

    std::vector<double> raw(order.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      raw[i] = score(cfg.metric, updates[i], group[static_cast<std::size_t>(order[i])].samples.size());

    std::vector<double> weights;
    try {
      weights = normalize_scores(raw);
    } catch (const numeric_error&) {
      if (cfg.zero_score_fallback != ZeroScoreFallback::uniform) throw;
      weights.assign(raw.size(), 1.0 / static_cast<double>(raw.size()));
    }

    result.model = aggregate(updates, weights);

    auto& txfr = channel == TransferChannel::group ? ledger.group_transfers : ledger.central_transfers;
    txfr += static_cast<std::uint64_t>(order.size());

    RoundRecord rec;
    rec.round = round;
    rec.participants = order;
    rec.raw_scores = raw;
    rec.weights = weights;
    if (cfg.metric.eval_config) {
      const EvalConfig& ec = *cfg.metric.eval_config;
      rec.post_agg_eval =
          evaluate(result.model, ec.validation, ec.grammar, ec.n_samples, ec.strategy, ec.seed, ec.max_len);
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace fedgen
