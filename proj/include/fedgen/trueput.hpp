#pragma once

#include <string>
#include <vector>

#include "fedgen/eval.hpp"
#include "fedgen/model.hpp"
#include "fedgen/sampling.hpp"

namespace fedgen {

struct LatencyModel {
  enum class Kind { constant, linear, batched };
  Kind kind = Kind::constant;
  double t0 = 1.0;          // base seconds per batch step
  double per_sample = 0.0;  // marginal seconds per sample
  int batch_capacity = 1;   // batched only

  void validate() const;
  // Total time to produce the k-sample batch.
  double operator()(int k) const;
};

struct TrueputProfile {
  double p = 0.0;  // functionality pass probability
  LatencyModel latency;
  int k_max = 1;
};

struct PassStats {
  long long n = 0;  // samples drawn
  long long c = 0;  // samples passing
};

// 1 - (1 - p)^k in a form that stays accurate for small p.
double pass_at_k_analytic(double p, int k);

// 1 - C(n-c, k) / C(n, k) via the running-product form; exact 0 when c = 0
// and exact 1 when n - c < k.
double pass_at_k_unbiased(const PassStats& stats, int k);

enum class LatencyNormalization { batch, per_design };

// Expected correct designs per second of generation wall-clock.
double trueput(const TrueputProfile& profile, int k,
               LatencyNormalization norm = LatencyNormalization::batch);

struct OptimalK {
  int k = 1;            // smallest argmax
  double value = 0.0;   // trueput at k
  std::vector<double> curve;  // curve[i] = trueput at k = i + 1
};

OptimalK optimal_k(const TrueputProfile& profile,
                   LatencyNormalization norm = LatencyNormalization::batch);

struct GridEntry {
  SamplingStrategy strategy;
  double syntax_accuracy = 0.0;
  bool valid = true;
  std::string diagnostic;
};

// Evaluates each strategy at a fixed budget of generations per prompt and
// ranks by syntax accuracy (declaration order breaks ties). A strategy with
// n_candidates > 1 is scored best-of-n against the grammar oracle. Invalid
// hyperparameters are reported per entry; the rest of the grid still runs.
std::vector<GridEntry> strategy_grid_search(const ToyModel& model, const ClientDataset& eval_set,
                                            const GrammarSpec& grammar,
                                            const std::vector<SamplingStrategy>& grid,
                                            int budget_samples, std::uint64_t seed,
                                            int max_len = 64);

}  // namespace fedgen
