#include "fedgen/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "fedgen/rng.hpp"

namespace fedgen {

Vocab Vocab::from_symbols(std::vector<std::string> syms) {
  if (syms.size() < 2) throw data_error("vocab needs at least 2 symbols");
  std::unordered_set<std::string> seen;
  Vocab v;
  v.symbols = std::move(syms);
  for (std::size_t i = 0; i < v.symbols.size(); ++i) {
    if (!seen.insert(v.symbols[i]).second)
      throw data_error("duplicate vocab symbol: " + v.symbols[i]);
    if (v.symbols[i] == kEosSymbol) v.eos = static_cast<Token>(i);
  }
  if (v.eos < 0) throw data_error("vocab is missing the <eos> symbol");
  return v;
}

Token Vocab::id_of(const std::string& sym) const {
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] == sym) return static_cast<Token>(i);
  throw data_error("symbol not in vocab: " + sym);
}

void ParamVector::check_finite(const char* who) const {
  for (double v : values)
    if (!std::isfinite(v)) throw numeric_error(std::string(who) + ": non-finite parameter value");
}

ToyModel ToyModel::uniform(Vocab vocab, int context_len) {
  if (context_len < 1) throw config_error("context_len must be positive");
  ParamLayout layout{vocab.size(), context_len};
  return ToyModel{std::move(vocab), context_len, ParamVector::zeros(layout)};
}

ToyModel ToyModel::gaussian_init(Vocab vocab, int context_len, double sigma, std::uint64_t seed) {
  ToyModel m = uniform(std::move(vocab), context_len);
  Rng rng = Rng(seed).derive(0x1417);
  for (double& v : m.params.values) v = sigma * rng.next_normal();
  return m;
}

std::size_t ToyModel::context_id(std::span<const Token> history) const {
  const std::size_t v = static_cast<std::size_t>(vocab.size());
  std::size_t id = 0;
  for (int i = 0; i < context_len; ++i) {
    // i = 0 is the oldest slot; missing history is padded with <eos>.
    const int back = context_len - i;
    Token t = back <= static_cast<int>(history.size())
                  ? history[history.size() - static_cast<std::size_t>(back)]
                  : vocab.eos;
    id = id * v + static_cast<std::size_t>(t);
  }
  return id;
}

std::span<const double> ToyModel::logits(std::size_t ctx) const {
  return std::span<const double>(params.values).subspan(params.layout.offset(ctx, 0),
                                                        static_cast<std::size_t>(vocab.size()));
}

std::vector<double> softmax(std::span<const double> logits) {
  double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - max);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::vector<double> ToyModel::probs(std::size_t ctx) const { return softmax(logits(ctx)); }

Token ToyModel::greedy_next(std::span<const Token> history) const {
  auto row = logits(context_id(history));
  Token best = 0;
  for (int t = 1; t < vocab.size(); ++t)
    if (row[static_cast<std::size_t>(t)] > row[static_cast<std::size_t>(best)]) best = t;
  return best;  // ties resolve to the lowest token index
}

namespace {

constexpr double kProbFloor = 1e-12;

void check_tokens(const ToyModel& model, const ClientDataset& data) {
  const int v = model.vocab.size();
  for (const Sample& s : data.samples) {
    for (Token t : s.prompt)
      if (t < 0 || t >= v) throw data_error("prompt token out of vocab in " + data.group_tag);
    for (Token t : s.completion)
      if (t < 0 || t >= v) throw data_error("completion token out of vocab in " + data.group_tag);
  }
}

// Accumulates unnormalized (softmax - onehot) terms for one sample.
// Returns the number of prediction events.
std::size_t accumulate_sample(const ToyModel& model, const Sample& s, std::vector<double>& grad) {
  TokenSeq hist = s.prompt;
  for (Token target : s.completion) {
    const std::size_t ctx = model.context_id(hist);
    std::vector<double> p = model.probs(ctx);
    const std::size_t base = model.params.layout.offset(ctx, 0);
    for (int t = 0; t < model.vocab.size(); ++t) grad[base + static_cast<std::size_t>(t)] += p[static_cast<std::size_t>(t)];
    grad[model.params.layout.offset(ctx, target)] -= 1.0;
    hist.push_back(target);
  }
  return s.completion.size();
}

void finalize_gradient(const ToyModel& model, std::vector<double>& grad, std::size_t events) {
  if (events == 0) return;
  const double inv = 1.0 / static_cast<double>(events);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] *= inv;
    if (!std::isfinite(grad[i])) {
      const std::size_t ctx = i / static_cast<std::size_t>(model.vocab.size());
      throw numeric_error("non-finite gradient at context " + std::to_string(ctx));
    }
  }
}

}  // namespace

double cross_entropy(const ToyModel& model, const ClientDataset& data) {
  check_tokens(model, data);
  double loss = 0.0;
  std::size_t events = 0;
  for (const Sample& s : data.samples) {
    TokenSeq hist = s.prompt;
    for (Token target : s.completion) {
      std::vector<double> p = model.probs(model.context_id(hist));
      loss -= std::log(std::max(p[static_cast<std::size_t>(target)], kProbFloor));
      hist.push_back(target);
      ++events;
    }
  }
  return events ? loss / static_cast<double>(events) : 0.0;
}

namespace serial {

ParamVector ce_gradient(const ToyModel& model, const ClientDataset& data) {
  check_tokens(model, data);
  ParamVector g = ParamVector::zeros(model.params.layout);
  std::size_t events = 0;
  for (const Sample& s : data.samples) events += accumulate_sample(model, s, g.values);
  finalize_gradient(model, g.values, events);
  return g;
}

}  // namespace serial

ParamVector ce_gradient(const ToyModel& model, const ClientDataset& data) {
  check_tokens(model, data);

  // Fixed-size sample blocks: partial sums are produced in parallel but
  // reduced in block order, so the result is identical for any thread count.
  constexpr std::size_t kBlock = 32;
  const std::size_t n = data.samples.size();
  const std::size_t n_blocks = (n + kBlock - 1) / kBlock;

  std::vector<std::vector<double>> partial(n_blocks);
  std::vector<std::size_t> block_events(n_blocks, 0);

#pragma omp parallel for schedule(dynamic)
  for (long long b = 0; b < static_cast<long long>(n_blocks); ++b) {
    auto& grad = partial[static_cast<std::size_t>(b)];
    grad.assign(model.params.layout.size(), 0.0);
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(lo + kBlock, n);
    std::size_t events = 0;
    for (std::size_t i = lo; i < hi; ++i) events += accumulate_sample(model, data.samples[i], grad);
    block_events[static_cast<std::size_t>(b)] = events;
  }

  ParamVector g = ParamVector::zeros(model.params.layout);
  std::size_t events = 0;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] += partial[b][i];
    events += block_events[b];
  }
  finalize_gradient(model, g.values, events);
  return g;
}

ToyModel train_local(const ToyModel& model, const ClientDataset& data, int epochs, double lr,
                     std::uint64_t /*seed*/) {
  if (epochs < 0) throw config_error("epochs must be nonnegative");
  if (lr < 0.0) throw config_error("learning rate must be nonnegative");
  check_tokens(model, data);

  ToyModel out = model;
  for (int e = 0; e < epochs; ++e) {
    ParamVector g = ce_gradient(out, data);
    for (std::size_t i = 0; i < out.params.values.size(); ++i) out.params.values[i] -= lr * g.values[i];
  }
  out.params.check_finite("train_local");
  return out;
}

}  // namespace fedgen
