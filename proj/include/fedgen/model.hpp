#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedgen/errors.hpp"

namespace fedgen {

using Token = int;
using TokenSeq = std::vector<Token>;

inline constexpr const char* kEosSymbol = "<eos>";

struct Vocab {
  std::vector<std::string> symbols;
  Token eos = -1;

  static Vocab from_symbols(std::vector<std::string> syms);

  int size() const { return static_cast<int>(symbols.size()); }
  Token id_of(const std::string& sym) const;
  const std::string& symbol(Token t) const { return symbols.at(static_cast<std::size_t>(t)); }
  bool operator==(const Vocab&) const = default;
};

// Maps (context index, next-token index) to a flat offset. Contexts are the
// last `context_len` tokens encoded base-vocab_size, most recent token in the
// lowest digit.
struct ParamLayout {
  int vocab_size = 0;
  int context_len = 0;

  std::size_t n_contexts() const {
    std::size_t n = 1;
    for (int i = 0; i < context_len; ++i) n *= static_cast<std::size_t>(vocab_size);
    return n;
  }
  std::size_t size() const { return n_contexts() * static_cast<std::size_t>(vocab_size); }
  std::size_t offset(std::size_t ctx, Token t) const {
    return ctx * static_cast<std::size_t>(vocab_size) + static_cast<std::size_t>(t);
  }
  bool operator==(const ParamLayout&) const = default;
};

struct ParamVector {
  ParamLayout layout;
  std::vector<double> values;

  static ParamVector zeros(ParamLayout layout) {
    return ParamVector{layout, std::vector<double>(layout.size(), 0.0)};
  }
  void check_finite(const char* who) const;
};

struct Sample {
  TokenSeq prompt;
  TokenSeq completion;  // always ends with <eos>
};

struct ClientDataset {
  std::vector<Sample> samples;
  std::string group_tag;
};

// Context-window softmax table standing in for an LLM: one logit row per
// context of the previous `context_len` tokens (left-padded with <eos>).
struct ToyModel {
  Vocab vocab;
  int context_len = 2;
  ParamVector params;

  static ToyModel uniform(Vocab vocab, int context_len);
  static ToyModel gaussian_init(Vocab vocab, int context_len, double sigma, std::uint64_t seed);

  std::size_t context_id(std::span<const Token> history) const;
  std::span<const double> logits(std::size_t ctx) const;
  std::vector<double> probs(std::size_t ctx) const;
  Token greedy_next(std::span<const Token> history) const;
};

std::vector<double> softmax(std::span<const double> logits);

// Mean cross-entropy (natural log, probabilities clamped at 1e-12) of
// completion tokens given their contexts, over the whole dataset.
double cross_entropy(const ToyModel& model, const ClientDataset& data);

// Gradient of cross_entropy w.r.t. the logit table. Samples are reduced in
// fixed-size blocks so the summation order is independent of thread count.
ParamVector ce_gradient(const ToyModel& model, const ClientDataset& data);

namespace serial {
// Straight-line single-threaded reference, kept for tests and benchmarks.
ParamVector ce_gradient(const ToyModel& model, const ClientDataset& data);
}  // namespace serial

// Full-batch gradient descent on cross-entropy; returns a new model.
ToyModel train_local(const ToyModel& model, const ClientDataset& data, int epochs, double lr,
                     std::uint64_t seed);

}  // namespace fedgen
