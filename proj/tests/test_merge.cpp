#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fedgen/merge.hpp"
#include "test_util.hpp"

using namespace fedgen;
using namespace testutil;

namespace {

MergeConfig dare_cfg(const ToyModel& base, double drop, std::uint64_t seed) {
  MergeConfig cfg;
  cfg.method = MergeMethod::dare;
  cfg.drop_rate = drop;
  cfg.base = base;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("merging one model returns it") {
  ToyModel m = random_model(bracket_vocab(), 2, 1);
  ToyModel out = merge_weighted({m}, {3.0});
  CHECK(out.params.values == m.params.values);
}

TEST_CASE("equal scores give the elementwise mean") {
  ToyModel a = random_model(bracket_vocab(), 2, 2);
  ToyModel b = random_model(bracket_vocab(), 2, 3);
  ToyModel out = merge_weighted({a, b}, {1.0, 1.0});
  for (std::size_t i = 0; i < out.params.values.size(); ++i)
    CHECK(out.params.values[i] ==
          doctest::Approx(0.5 * (a.params.values[i] + b.params.values[i])).epsilon(1e-14));
}

TEST_CASE("score [1, 0] selects the first model exactly") {
  ToyModel a = random_model(bracket_vocab(), 2, 4);
  ToyModel b = random_model(bracket_vocab(), 2, 5);
  std::vector<MergeRow> report;
  ToyModel out = merge_weighted({a, b}, {1.0, 0.0}, &report);
  CHECK(out.params.values == a.params.values);
  REQUIRE(report.size() == 2);
  CHECK(report[0].weight == 1.0);
  CHECK(report[1].weight == 0.0);
}

TEST_CASE("drop_rate 0 reduces DARE to the weighted average") {
  ToyModel base = random_model(bracket_vocab(), 2, 6);
  ToyModel a = random_model(bracket_vocab(), 2, 7);
  ToyModel b = random_model(bracket_vocab(), 2, 8);
  ToyModel plain = merge_weighted({a, b}, {2.0, 5.0});
  ToyModel dare = merge_dare({a, b}, {2.0, 5.0}, dare_cfg(base, 0.0, 99));
  CHECK(max_abs_diff(plain.params.values, dare.params.values) <= 1e-12);
}

TEST_CASE("models equal to the base give back the base at any drop rate") {
  ToyModel base = random_model(bracket_vocab(), 2, 9);
  for (double drop : {0.1, 0.5, 0.9}) {
    ToyModel out = merge_dare({base, base}, {1.0, 3.0}, dare_cfg(base, drop, 5));
    CHECK(out.params.values == base.params.values);
  }
}

TEST_CASE("drop-and-rescale is unbiased on a large all-ones delta") {
  // 10^5-element model: vocab 10, context_len 4 -> 10^5 parameters
  std::vector<std::string> syms;
  for (int i = 0; i < 9; ++i) syms.push_back(std::string(1, static_cast<char>('a' + i)));
  syms.push_back(kEosSymbol);
  Vocab v = Vocab::from_symbols(syms);
  ToyModel base = ToyModel::uniform(v, 4);
  ToyModel delta_one = base;
  std::fill(delta_one.params.values.begin(), delta_one.params.values.end(), 1.0);

  ToyModel out = merge_dare({delta_one}, {1.0}, dare_cfg(base, 0.5, 4242));
  double mean = 0.0;
  for (double x : out.params.values) mean += x / static_cast<double>(out.params.values.size());
  CHECK(std::fabs(mean - 1.0) < 0.02);
}

TEST_CASE("DARE mean over seeds approaches the weighted merge") {
  ToyModel base = random_model(bracket_vocab(), 2, 10);
  ToyModel a = random_model(bracket_vocab(), 2, 11);
  ToyModel b = random_model(bracket_vocab(), 2, 12);
  const std::vector<double> scores{1.0, 2.0};
  ToyModel plain = merge_weighted({a, b}, scores);

  const int n_seeds = 200;
  const std::size_t len = plain.params.values.size();
  std::vector<double> mean(len, 0.0), sq(len, 0.0);
  for (int s = 0; s < n_seeds; ++s) {
    ToyModel out = merge_dare({a, b}, scores, dare_cfg(base, 0.5, static_cast<std::uint64_t>(s)));
    for (std::size_t i = 0; i < len; ++i) {
      mean[i] += out.params.values[i] / n_seeds;
      sq[i] += out.params.values[i] * out.params.values[i] / n_seeds;
    }
  }
  for (std::size_t i = 0; i < len; ++i) {
    const double var = std::max(sq[i] - mean[i] * mean[i], 0.0);
    const double se = std::sqrt(var / n_seeds);
    CHECK(std::fabs(mean[i] - plain.params.values[i]) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("DARE report carries delta and post-drop norms") {
  ToyModel base = ToyModel::uniform(bracket_vocab(), 1);
  ToyModel m = base;
  std::fill(m.params.values.begin(), m.params.values.end(), 1.0);
  std::vector<MergeRow> report;
  merge_dare({m}, {1.0}, dare_cfg(base, 0.5, 7), &report);
  REQUIRE(report.size() == 1);
  CHECK(report[0].delta_l2 ==
        doctest::Approx(std::sqrt(static_cast<double>(m.params.values.size()))));
  CHECK(report[0].post_drop_l2 > 0.0);
}

TEST_CASE("DARE validates its configuration") {
  ToyModel base = ToyModel::uniform(bracket_vocab(), 2);
  CHECK_THROWS_AS(merge_dare({base}, {1.0}, dare_cfg(base, 1.0, 0)), config_error);
  CHECK_THROWS_AS(merge_dare({base}, {1.0}, dare_cfg(base, -0.1, 0)), config_error);
  MergeConfig no_base = dare_cfg(base, 0.5, 0);
  no_base.base.reset();
  CHECK_THROWS_AS(merge_dare({base}, {1.0}, no_base), config_error);
  ToyModel other = ToyModel::uniform(bracket_vocab(), 1);
  CHECK_THROWS_AS(merge_dare({other}, {1.0}, dare_cfg(base, 0.5, 0)), structural_error);
}

TEST_CASE("DARE is deterministic in the seed") {
  ToyModel base = random_model(bracket_vocab(), 2, 13);
  ToyModel a = random_model(bracket_vocab(), 2, 14);
  ToyModel x = merge_dare({a}, {1.0}, dare_cfg(base, 0.5, 21));
  ToyModel y = merge_dare({a}, {1.0}, dare_cfg(base, 0.5, 21));
  ToyModel z = merge_dare({a}, {1.0}, dare_cfg(base, 0.5, 22));
  CHECK(x.params.values == y.params.values);
  CHECK(x.params.values != z.params.values);
}
