#include "fedgen/eval.hpp"

#include "fedgen/rng.hpp"

namespace fedgen {

namespace {

struct Counts {
  long long syntax = 0;
  long long semantic = 0;
};

Counts judge_one(const ToyModel& model, const ClientDataset& eval_set, const GrammarSpec& grammar,
                 const SamplingStrategy& strategy, std::uint64_t seed, int max_len, long long i) {
  const Sample& s = eval_set.samples[static_cast<std::size_t>(i) % eval_set.samples.size()];
  TokenSeq gen = generate(model, s.prompt, strategy, max_len,
                          derive_seed(seed, static_cast<std::uint64_t>(i)));
  TokenSeq full = s.prompt;
  full.insert(full.end(), gen.begin(), gen.end());
  Counts c;
  c.syntax = check_syntax(full, grammar) ? 1 : 0;
  c.semantic = (gen == s.completion) ? 1 : 0;
  return c;
}

}  // namespace

EvalReport evaluate(const ToyModel& model, const ClientDataset& eval_set,
                    const GrammarSpec& grammar, int n_samples, const SamplingStrategy& strategy,
                    std::uint64_t seed, int max_len) {
  if (eval_set.samples.empty()) throw data_error("evaluate: empty eval set");
  if (n_samples < 1) throw config_error("evaluate: n_samples must be >= 1");

  long long syntax = 0, semantic = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : syntax, semantic)
  for (long long i = 0; i < n_samples; ++i) {
    Counts c = judge_one(model, eval_set, grammar, strategy, seed, max_len, i);
    syntax += c.syntax;
    semantic += c.semantic;
  }

  EvalReport r;
  r.syntax_accuracy = static_cast<double>(syntax) / n_samples;
  r.semantic_accuracy = static_cast<double>(semantic) / n_samples;
  r.n_generated = n_samples;
  r.seed = seed;
  return r;
}

namespace serial {

EvalReport evaluate(const ToyModel& model, const ClientDataset& eval_set,
                    const GrammarSpec& grammar, int n_samples, const SamplingStrategy& strategy,
                    std::uint64_t seed, int max_len) {
  if (eval_set.samples.empty()) throw data_error("evaluate: empty eval set");
  if (n_samples < 1) throw config_error("evaluate: n_samples must be >= 1");
  long long syntax = 0, semantic = 0;
  for (long long i = 0; i < n_samples; ++i) {
    Counts c = judge_one(model, eval_set, grammar, strategy, seed, max_len, i);
    syntax += c.syntax;
    semantic += c.semantic;
  }
  EvalReport r;
  r.syntax_accuracy = static_cast<double>(syntax) / n_samples;
  r.semantic_accuracy = static_cast<double>(semantic) / n_samples;
  r.n_generated = n_samples;
  r.seed = seed;
  return r;
}

}  // namespace serial

}  // namespace fedgen
