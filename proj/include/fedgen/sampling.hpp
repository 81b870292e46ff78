#pragma once

#include <cstdint>
#include <string>

#include "fedgen/model.hpp"

namespace fedgen {

enum class SamplingKind { greedy, temperature, top_k, nucleus, beam };

struct SamplingStrategy {
  SamplingKind kind = SamplingKind::greedy;
  double temperature = 1.0;  // applied before any truncation
  int top_k = 1;
  double top_p = 1.0;
  int beam_width = 1;
  // Draws per selection unit for best-of-n style evaluation; the selection
  // itself happens in the caller that owns the validity oracle.
  int n_candidates = 1;

  void validate(int vocab_size) const;
  std::string name() const;
  std::string hyperparams() const;
};

// Decodes up to max_len tokens after `prompt`, stopping at <eos>. Sampling
// strategies are deterministic given `seed`; greedy and beam ignore it.
TokenSeq generate(const ToyModel& model, const TokenSeq& prompt, const SamplingStrategy& strategy,
                  int max_len, std::uint64_t seed);

}  // namespace fedgen
