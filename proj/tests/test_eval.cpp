#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fedgen/eval.hpp"
#include "test_util.hpp"

using namespace fedgen;
using namespace testutil;

namespace {

ClientDataset canonical_set() {
  Sample s;
  s.prompt = {};
  s.completion = {0, 1, 2};  // "( ) <eos>"
  return dataset_of({s});
}

// Probability mass of syntactically valid generations from the uniform model
// over 3 tokens with the given length cap, by exhaustive enumeration. A
// generation stops at <eos> or at max_len tokens.
double enumerated_valid_mass(const GrammarSpec& g, int max_len) {
  double mass = 0.0;
  for (int len = 1; len <= max_len; ++len) {
    long long total = 1;
    for (int i = 0; i < len; ++i) total *= 3;
    for (long long code = 0; code < total; ++code) {
      TokenSeq seq(static_cast<std::size_t>(len));
      long long rest = code;
      for (int i = 0; i < len; ++i) {
        seq[static_cast<std::size_t>(i)] = static_cast<Token>(rest % 3);
        rest /= 3;
      }
      // reachable as a complete generation only if <eos> appears exactly at
      // the end, or not at all at the length cap
      bool interior_eos = false;
      for (int i = 0; i + 1 < len; ++i) interior_eos |= seq[static_cast<std::size_t>(i)] == 2;
      if (interior_eos) continue;
      const bool terminated = seq.back() == 2;
      if (!terminated && len < max_len) continue;
      if (check_syntax(seq, g)) mass += std::pow(1.0 / 3.0, len);
    }
  }
  return mass;
}

}  // namespace

TEST_CASE("canonical model scores 1.0 on both metrics") {
  ToyModel m = ToyModel::uniform(bracket_vocab(), 2);
  force_next(m, {}, 0);
  force_next(m, {0}, 1);
  force_next(m, {0, 1}, 2);
  GrammarSpec g = bracket_grammar(m.vocab);
  EvalReport r = evaluate(m, canonical_set(), g, 50, SamplingStrategy{}, 0);
  CHECK(r.syntax_accuracy == 1.0);
  CHECK(r.semantic_accuracy == 1.0);
}

TEST_CASE("unterminated generations score 0.0 syntax") {
  ToyModel m = ToyModel::uniform(bracket_vocab(), 2);
  const std::size_t n = m.params.layout.n_contexts();
  for (std::size_t ctx = 0; ctx < n; ++ctx)
    m.params.values[m.params.layout.offset(ctx, 0)] = 50.0;  // always emit "("
  GrammarSpec g = bracket_grammar(m.vocab);
  EvalReport r = evaluate(m, canonical_set(), g, 50, SamplingStrategy{}, 0, 16);
  CHECK(r.syntax_accuracy == 0.0);
  CHECK(r.semantic_accuracy == 0.0);
}

TEST_CASE("uniform model syntax accuracy matches the enumerated valid mass") {
  ToyModel m = ToyModel::uniform(bracket_vocab(), 2);
  GrammarSpec g = bracket_grammar(m.vocab);
  const double mass = enumerated_valid_mass(g, 6);
  SamplingStrategy temp;
  temp.kind = SamplingKind::temperature;
  EvalReport r = evaluate(m, canonical_set(), g, 10000, temp, 12345, 6);
  CHECK(std::fabs(r.syntax_accuracy - mass) < 0.02);
}

TEST_CASE("empty eval set is an error") {
  ToyModel m = ToyModel::uniform(bracket_vocab(), 2);
  GrammarSpec g = bracket_grammar(m.vocab);
  CHECK_THROWS_AS(evaluate(m, ClientDataset{}, g, 10, SamplingStrategy{}, 0), data_error);
  CHECK_THROWS_AS(evaluate(m, canonical_set(), g, 0, SamplingStrategy{}, 0), config_error);
}

TEST_CASE("parallel and serial evaluation agree exactly") {
  ToyModel m = random_model(bracket_vocab(), 2, 31);
  GrammarSpec g = bracket_grammar(m.vocab);
  ClientDataset eval_set = random_bracket_data(13, 32);
  SamplingStrategy temp;
  temp.kind = SamplingKind::temperature;
  EvalReport a = evaluate(m, eval_set, g, 500, temp, 7, 16);
  EvalReport b = serial::evaluate(m, eval_set, g, 500, temp, 7, 16);
  CHECK(a.syntax_accuracy == b.syntax_accuracy);
  CHECK(a.semantic_accuracy == b.semantic_accuracy);
}

TEST_CASE("evaluation is deterministic in the seed") {
  ToyModel m = random_model(bracket_vocab(), 2, 33);
  GrammarSpec g = bracket_grammar(m.vocab);
  ClientDataset eval_set = random_bracket_data(7, 34);
  SamplingStrategy temp;
  temp.kind = SamplingKind::temperature;
  EvalReport a = evaluate(m, eval_set, g, 300, temp, 99, 16);
  EvalReport b = evaluate(m, eval_set, g, 300, temp, 99, 16);
  CHECK(a.syntax_accuracy == b.syntax_accuracy);
  CHECK(a.semantic_accuracy == b.semantic_accuracy);
}
