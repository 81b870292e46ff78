#include "fedgen/trueput.hpp"

#include <algorithm>
#include <cmath>

#include "fedgen/rng.hpp"

namespace fedgen {

void LatencyModel::validate() const {
  if (t0 < 0.0) throw config_error("latency t0 must be >= 0");
  if (per_sample < 0.0) throw config_error("latency per_sample must be >= 0");
  if (kind == Kind::batched && batch_capacity < 1)
    throw config_error("batch capacity must be >= 1");
  if (!((*this)(1) > 0.0)) throw config_error("latency must be positive for k >= 1");
}

double LatencyModel::operator()(int k) const {
  switch (kind) {
    case Kind::constant:
      return t0;
    case Kind::linear:
      return t0 + per_sample * k;
    case Kind::batched:
      return t0 * std::ceil(static_cast<double>(k) / batch_capacity) + per_sample * k;
  }
  return t0;
}

double pass_at_k_analytic(double p, int k) {
  if (!(p >= 0.0 && p <= 1.0)) throw config_error("pass probability must be in [0, 1]");
  if (k < 1) throw config_error("k must be >= 1");
  if (p == 1.0) return 1.0;
  return -std::expm1(static_cast<double>(k) * std::log1p(-p));
}

double pass_at_k_unbiased(const PassStats& stats, int k) {
  if (stats.n < 0 || stats.c < 0 || stats.c > stats.n)
    throw config_error("pass stats require 0 <= c <= n");
  if (k < 1 || k > stats.n) throw config_error("pass@k needs 1 <= k <= n");
  if (stats.c == 0) return 0.0;
  if (stats.n - stats.c < k) return 1.0;
  // C(n-c, k) / C(n, k) = prod_{i=0..k-1} (n-c-i) / (n-i)
  double ratio = 1.0;
  for (long long i = 0; i < k; ++i)
    ratio *= static_cast<double>(stats.n - stats.c - i) / static_cast<double>(stats.n - i);
  return 1.0 - ratio;
}

double trueput(const TrueputProfile& profile, int k, LatencyNormalization norm) {
  profile.latency.validate();
  const double pass = pass_at_k_analytic(profile.p, k);
  const double t = profile.latency(k);
  return norm == LatencyNormalization::batch ? pass / t : pass * k / t;
}

OptimalK optimal_k(const TrueputProfile& profile, LatencyNormalization norm) {
  if (profile.k_max < 1) throw config_error("k_max must be >= 1");
  OptimalK result;
  result.curve.reserve(static_cast<std::size_t>(profile.k_max));
  for (int k = 1; k <= profile.k_max; ++k) {
    const double v = trueput(profile, k, norm);
    result.curve.push_back(v);
    if (k == 1 || v > result.value) {
      result.k = k;
      result.value = v;
    }
  }
  return result;
}

std::vector<GridEntry> strategy_grid_search(const ToyModel& model, const ClientDataset& eval_set,
                                            const GrammarSpec& grammar,
                                            const std::vector<SamplingStrategy>& grid,
                                            int budget_samples, std::uint64_t seed, int max_len) {
  if (grid.empty()) throw config_error("grid_search: empty grid");
  if (budget_samples < 1) throw config_error("grid_search: budget must be >= 1");
  if (eval_set.samples.empty()) throw data_error("grid_search: empty eval set");

  std::vector<GridEntry> entries(grid.size());
#pragma omp parallel for schedule(dynamic)
  for (long long s = 0; s < static_cast<long long>(grid.size()); ++s) {
    GridEntry& entry = entries[static_cast<std::size_t>(s)];
    entry.strategy = grid[static_cast<std::size_t>(s)];
    try {
      entry.strategy.validate(model.vocab.size());
    } catch (const config_error& e) {
      entry.valid = false;
      entry.diagnostic = e.what();
      entry.syntax_accuracy = -1.0;
      continue;
    }

    // Best-of-n selection units under a fixed per-prompt draw budget: every
    // group of n_candidates draws yields one output, chosen by the grammar
    // oracle (first valid draw, else the first draw).
    const int per_unit = std::min(entry.strategy.n_candidates, budget_samples);
    const int units = std::max(1, budget_samples / per_unit);
    long long pass = 0, total = 0;
    for (std::size_t pi = 0; pi < eval_set.samples.size(); ++pi) {
      const Sample& sample = eval_set.samples[pi];
      for (int u = 0; u < units; ++u) {
        bool unit_pass = false;
        for (int d = 0; d < per_unit; ++d) {
          const std::uint64_t gseed = Rng(seed)
                                          .derive(static_cast<std::uint64_t>(s), pi)
                                          .derive(static_cast<std::uint64_t>(u),
                                                  static_cast<std::uint64_t>(d))
                                          .next_u64();
          TokenSeq gen = generate(model, sample.prompt, entry.strategy, max_len, gseed);
          TokenSeq full = sample.prompt;
          full.insert(full.end(), gen.begin(), gen.end());
          if (check_syntax(full, grammar)) {
            unit_pass = true;
            break;
          }
        }
        pass += unit_pass ? 1 : 0;
        ++total;
      }
    }
    entry.syntax_accuracy = static_cast<double>(pass) / static_cast<double>(total);
  }

  std::stable_sort(entries.begin(), entries.end(), [](const GridEntry& a, const GridEntry& b) {
    return a.syntax_accuracy > b.syntax_accuracy;  // stable: declaration order breaks ties
  });
  return entries;
}

}  // namespace fedgen
