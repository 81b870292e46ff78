#pragma once

#include <optional>
#include <vector>

#include "fedgen/fed.hpp"
#include "fedgen/model.hpp"

namespace fedgen {

enum class MergeMethod { weighted_average, dare };

struct MergeConfig {
  MergeMethod method = MergeMethod::weighted_average;
  double drop_rate = 0.5;         // dare only, in [0, 1)
  std::optional<ToyModel> base;   // dare only: the shared pre-merge reference
  AggregationMetric metric;
  std::uint64_t seed = 0;
};

struct MergeRow {
  int model_id = 0;
  double raw_score = 0.0;
  double weight = 0.0;
  double delta_l2 = 0.0;
  double post_drop_l2 = 0.0;
};

// Same contract as fed-engine aggregate; applied to cross-group models.
ToyModel merge_weighted(const std::vector<ToyModel>& models, const std::vector<double>& scores,
                        std::vector<MergeRow>* report = nullptr);

// Drop-and-rescale on parameter deltas: delta_i = params_i - base, each
// element zeroed with probability drop_rate (draw indexed by
// (seed, model, element)) and survivors scaled by 1/(1 - drop_rate); the
// score-weighted sum of processed deltas lands back on the base.
ToyModel merge_dare(const std::vector<ToyModel>& models, const std::vector<double>& scores,
                    const MergeConfig& cfg, std::vector<MergeRow>* report = nullptr);

}  // namespace fedgen
