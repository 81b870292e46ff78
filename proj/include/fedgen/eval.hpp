#pragma once

#include <cstdint>

#include "fedgen/grammar.hpp"
#include "fedgen/model.hpp"
#include "fedgen/sampling.hpp"

namespace fedgen {

struct EvalReport {
  double syntax_accuracy = 0.0;
  double semantic_accuracy = 0.0;
  int n_generated = 0;
  std::uint64_t seed = 0;
};

// Draws n_samples generations (prompts cycled from eval_set). Syntax accuracy
// checks prompt + generation against the grammar; semantic accuracy is exact
// match with the sample's canonical completion. Each generation derives its
// RNG stream from (seed, sample index), so results are schedule-independent.
EvalReport evaluate(const ToyModel& model, const ClientDataset& eval_set,
                    const GrammarSpec& grammar, int n_samples, const SamplingStrategy& strategy,
                    std::uint64_t seed, int max_len = 64);

namespace serial {
EvalReport evaluate(const ToyModel& model, const ClientDataset& eval_set,
                    const GrammarSpec& grammar, int n_samples, const SamplingStrategy& strategy,
                    std::uint64_t seed, int max_len = 64);
}  // namespace serial

}  // namespace fedgen
