#include "fedgen/merge.hpp"

#include <cmath>

#include "fedgen/rng.hpp"

namespace fedgen {

ToyModel merge_weighted(const std::vector<ToyModel>& models, const std::vector<double>& scores,
                        std::vector<MergeRow>* report) {
  ToyModel out = aggregate(models, scores);
  if (report) {
    std::vector<double> w = normalize_scores(scores);
    report->clear();
    for (std::size_t m = 0; m < models.size(); ++m)
      report->push_back(MergeRow{static_cast<int>(m), scores[m], w[m], 0.0, 0.0});
  }
  return out;
}

ToyModel merge_dare(const std::vector<ToyModel>& models, const std::vector<double>& scores,
                    const MergeConfig& cfg, std::vector<MergeRow>* report) {
  if (!(cfg.drop_rate >= 0.0 && cfg.drop_rate < 1.0))
    throw config_error("dare drop_rate must be in [0, 1)");
  if (!cfg.base) throw config_error("dare requires a base model");
  if (models.empty() || models.size() != scores.size())
    throw structural_error("merge_dare: models and scores must be same nonzero length");

  const ToyModel& base = *cfg.base;
  for (const ToyModel& m : models)
    if (!(m.params.layout == base.params.layout))
      throw structural_error("merge_dare: layout mismatch with base");

  const std::vector<double> w = normalize_scores(scores);
  const double rescale = 1.0 / (1.0 - cfg.drop_rate);
  const std::size_t len = base.params.values.size();

  ToyModel out = base;
  if (report) report->clear();
  for (std::size_t m = 0; m < models.size(); ++m) {
    const Rng rng = Rng(cfg.seed).derive(0xDA2E, m);
    const auto& pv = models[m].params.values;

#pragma omp parallel for schedule(static)
    for (long long e = 0; e < static_cast<long long>(len); ++e) {
      const std::size_t i = static_cast<std::size_t>(e);
      if (rng.double_at(i) < cfg.drop_rate) continue;
      out.params.values[i] += w[m] * (pv[i] - base.params.values[i]) * rescale;
    }

    if (report) {
      // serial pass so the norms are independent of thread count
      double delta_sq = 0.0, kept_sq = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        const double delta = pv[i] - base.params.values[i];
        delta_sq += delta * delta;
        if (rng.double_at(i) >= cfg.drop_rate) kept_sq += delta * rescale * delta * rescale;
      }
      report->push_back(
          MergeRow{static_cast<int>(m), scores[m], w[m], std::sqrt(delta_sq), std::sqrt(kept_sq)});
    }
  }
  return out;
}

}  // namespace fedgen
