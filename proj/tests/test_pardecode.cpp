#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fedgen/pardecode.hpp"
#include "fedgen/sampling.hpp"
#include "test_util.hpp"

using namespace fedgen;
using namespace testutil;

namespace {

// vocab {a, b, c, <eos>} for the hand-traced verification cases
Vocab abc_vocab() { return Vocab::from_symbols({"a", "b", "c", kEosSymbol}); }

TokenSeq plain_greedy(const ToyModel& m, const TokenSeq& prompt, int max_len) {
  SamplingStrategy greedy;
  return generate(m, prompt, greedy, max_len, 0);
}

}  // namespace

TEST_CASE("size 1 tree holds the draft's single best child") {
  DraftHeads heads = DraftHeads::uniform(bracket_vocab(), 1, 2);
  TokenTree tree = build_tree(heads, {0}, 1);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].parent == -1);
  CHECK(tree.nodes[0].depth == 1);
  CHECK(tree.nodes[0].token == 0);  // uniform ties resolve to the lowest token
}

TEST_CASE("one-hot draft heads expand a single path") {
  ToyModel target = cyclic_bracket_model(1);
  DraftHeads heads = DraftHeads::distilled_from(target, 4);
  TokenTree tree = build_tree(heads, {0}, 4);  // context "(" -> path ") ( ) ("
  REQUIRE(tree.nodes.size() == 4);
  const TokenSeq want{1, 0, 1, 0};
  for (int i = 0; i < 4; ++i) {
    CHECK(tree.nodes[static_cast<std::size_t>(i)].token == want[static_cast<std::size_t>(i)]);
    CHECK(tree.nodes[static_cast<std::size_t>(i)].parent == i - 1);
    CHECK(tree.nodes[static_cast<std::size_t>(i)].depth == i + 1);
  }
}

TEST_CASE("size 7 uniform tree over 3 tokens, depth 2, is breadth-first") {
  DraftHeads heads = DraftHeads::uniform(bracket_vocab(), 1, 2);
  TokenTree tree = build_tree(heads, {0}, 7);
  REQUIRE(tree.nodes.size() == 7);
  // three depth-1 children first (prob 1/3 each), lowest token first
  for (int i = 0; i < 3; ++i) {
    CHECK(tree.nodes[static_cast<std::size_t>(i)].depth == 1);
    CHECK(tree.nodes[static_cast<std::size_t>(i)].token == i);
    CHECK(tree.nodes[static_cast<std::size_t>(i)].parent == -1);
  }
  // then depth-2 children (prob 1/9), lowest parent id then lowest token;
  // node 2 is <eos> and gets no children
  const std::vector<std::pair<int, Token>> want{{0, 0}, {0, 1}, {0, 2}, {1, 0}};
  for (int i = 3; i < 7; ++i) {
    CHECK(tree.nodes[static_cast<std::size_t>(i)].depth == 2);
    CHECK(tree.nodes[static_cast<std::size_t>(i)].parent == want[static_cast<std::size_t>(i - 3)].first);
    CHECK(tree.nodes[static_cast<std::size_t>(i)].token == want[static_cast<std::size_t>(i - 3)].second);
  }
}

TEST_CASE("verify walks the greedy path and appends one correction") {
  Vocab v = abc_vocab();
  ToyModel target = ToyModel::uniform(v, 1);
  // target greedy continuation from context "a" is "b", then from "b" is "a"
  force_next(target, {0}, 1);
  force_next(target, {1}, 0);
  force_next(target, {2}, 0);
  force_next(target, {3}, 0);

  SUBCASE("tree path 'a c' against greedy 'a b' commits 'a b'") {
    TokenTree tree;
    tree.nodes.push_back(TreeNode{0, -1, 1, 0.9});  // "a"
    tree.nodes.push_back(TreeNode{2, 0, 2, 0.5});   // "c" under "a"
    // context "b": greedy next is "a" (in tree), then from "a" greedy is "b"
    // which is not among node 0's children {c}, so "b" is the correction
    TokenSeq committed = verify(target, tree, {1});
    CHECK(committed == TokenSeq{0, 1});
  }

  SUBCASE("orthogonal draft commits exactly the correction token") {
    TokenTree tree;
    tree.nodes.push_back(TreeNode{2, -1, 1, 1.0});  // draft says "c", target says "a"
    TokenSeq committed = verify(target, tree, {1});
    CHECK(committed == TokenSeq{0});
  }

  SUBCASE("draft equal to target accepts the whole drafted path") {
    DraftHeads heads = DraftHeads::distilled_from(target, 3);
    TokenTree tree = build_tree(heads, {1}, 3);
    TokenSeq committed = verify(target, tree, {1});
    // 3 accepted drafted tokens + 1 correction
    CHECK(committed.size() == 4);
    CHECK(committed == TokenSeq{0, 1, 0, 1});
  }
}

TEST_CASE("verification stops at <eos>") {
  Vocab v = abc_vocab();
  ToyModel target = ToyModel::uniform(v, 1);
  force_next(target, {0}, 3);  // after "a" the target ends the sequence
  DraftHeads heads = DraftHeads::distilled_from(target, 3);
  TokenTree tree = build_tree(heads, {0}, 6);
  TokenSeq committed = verify(target, tree, {0});
  REQUIRE_FALSE(committed.empty());
  CHECK(committed.back() == v.eos);
  CHECK(committed.size() == 1);
}

TEST_CASE("tree size 1 bounds the per-step commit rate") {
  ToyModel target = random_model(bracket_vocab(), 2, 1);
  DraftHeads heads = DraftHeads::uniform(target.vocab, 2, 3);
  DecodeStats stats = simulate_decode(target, heads, {{0}, {0, 0}}, 1, 32, 24);
  CHECK(stats.speedup >= 1.0);
  CHECK(stats.speedup <= 2.0);
  CHECK(stats.relative_cost == 1.0);
}

TEST_CASE("a distilled path of length L speeds decoding up by about L+1") {
  ToyModel target = cyclic_bracket_model(1);  // never terminates
  DraftHeads heads = DraftHeads::distilled_from(target, 4);
  DecodeStats stats = simulate_decode(target, heads, {{0}}, 4, 32, 30);
  // every step accepts the 4-token path plus a correction: 5 tokens per step
  CHECK(stats.mean_accepted_per_step == doctest::Approx(5.0));
  CHECK(stats.speedup == doctest::Approx(5.0));
}

TEST_CASE("relative cost kicks in above the ceiling") {
  ToyModel target = random_model(bracket_vocab(), 2, 2);
  DraftHeads heads = DraftHeads::uniform(target.vocab, 2, 4);
  DecodeStats below = simulate_decode(target, heads, {{0}}, 16, 32, 16);
  DecodeStats above = simulate_decode(target, heads, {{0}}, 64, 32, 16);
  CHECK(below.relative_cost == 1.0);
  CHECK(above.relative_cost == doctest::Approx(2.0));
}

TEST_CASE("mean accepted tokens per step is nondecreasing in tree size") {
  const std::vector<int> sizes{1, 2, 4, 8, 16};
  std::vector<double> mean(sizes.size(), 0.0);
  const int n_reps = 10;
  for (int rep = 0; rep < n_reps; ++rep) {
    ToyModel target = random_model(bracket_vocab(), 2, 100 + static_cast<std::uint64_t>(rep), 0.5);
    DraftHeads heads = DraftHeads::distilled_from(target, 4);
    std::vector<TokenSeq> prompts{{0}, {0, 0}, {0, 1}};
    for (std::size_t i = 0; i < sizes.size(); ++i)
      mean[i] += simulate_decode(target, heads, prompts, sizes[i], 64, 24).mean_accepted_per_step /
                 n_reps;
  }
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) CHECK(mean[i] <= mean[i + 1] + 1e-9);
}

TEST_CASE("parallel greedy decoding is token-identical to plain greedy") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ToyModel target = random_model(bracket_vocab(), 2, seed, 0.7);
    DraftHeads heads = DraftHeads::uniform(target.vocab, 2, 3);
    const TokenSeq prompt{static_cast<Token>(seed % 2)};
    CHECK(parallel_greedy_decode(target, heads, prompt, 8, 32) ==
          plain_greedy(target, prompt, 32));
  }
}

TEST_CASE("heads equal to the target give zero KL and a zero gradient") {
  ToyModel target = random_model(bracket_vocab(), 2, 5, 0.5);
  DraftHeads heads = DraftHeads::distilled_from(target, 3);
  const TokenSeq ctx{0, 1};
  CHECK(draft_kl(heads, target, ctx) == doctest::Approx(0.0).epsilon(1e-12));
  KlUpdateResult r = online_kl_update(heads, target, ctx, 0.1);
  CHECK(r.kl == doctest::Approx(0.0).epsilon(1e-12));
  for (int d = 0; d < heads.depth; ++d) {
    const auto before = heads.probs(d, heads.context_id(ctx));
    const auto after = r.heads.probs(d, heads.context_id(ctx));
    CHECK(max_abs_diff(before, after) < 1e-12);
  }
}

TEST_CASE("uniform heads against a one-hot target pay the clamping penalty") {
  Vocab v = abc_vocab();
  ToyModel target = ToyModel::uniform(v, 1);
  force_next(target, {0}, 1, 100.0);
  force_next(target, {1}, 0, 100.0);
  force_next(target, {2}, 0, 100.0);
  force_next(target, {3}, 0, 100.0);
  DraftHeads heads = DraftHeads::uniform(v, 1, 2);
  // forward KL(uniform || one-hot) with target probabilities clamped at
  // 1e-12: one quarter lands on the hot token, the rest on the floor
  const double per_depth = 0.25 * std::log(0.25) + 0.75 * (std::log(0.25) - std::log(1e-12));
  CHECK(draft_kl(heads, target, {0}) == doctest::Approx(2.0 * per_depth).epsilon(1e-6));
}

TEST_CASE("KL gradient matches finite differences") {
  ToyModel target = random_model(bracket_vocab(), 1, 8, 0.8);
  DraftHeads heads = DraftHeads::uniform(bracket_vocab(), 1, 2);
  Rng rng(9);
  for (auto& table : heads.tables)
    for (double& x : table.values) x = 0.5 * rng.next_normal();

  const TokenSeq ctx{1};
  const double lr = 1.0;  // analytic gradient = (before - after) / lr
  KlUpdateResult updated = online_kl_update(heads, target, ctx, lr);

  const std::size_t cid = heads.context_id(ctx);
  const double h = 1e-5;
  for (int d = 0; d < heads.depth; ++d) {
    const std::size_t base = heads.tables[static_cast<std::size_t>(d)].layout.offset(cid, 0);
    for (int t = 0; t < heads.vocab.size(); ++t) {
      const std::size_t i = base + static_cast<std::size_t>(t);
      DraftHeads probe = heads;
      probe.tables[static_cast<std::size_t>(d)].values[i] += h;
      const double up = draft_kl(probe, target, ctx);
      probe.tables[static_cast<std::size_t>(d)].values[i] -= 2.0 * h;
      const double down = draft_kl(probe, target, ctx);
      const double fd = (up - down) / (2.0 * h);
      const double analytic = (heads.tables[static_cast<std::size_t>(d)].values[i] -
                               updated.heads.tables[static_cast<std::size_t>(d)].values[i]) /
                              lr;
      CHECK(std::fabs(analytic - fd) / std::max(std::fabs(fd), 1e-3) < 1e-4);
    }
  }
}

TEST_CASE("repeated updates on a stationary context drive KL down") {
  ToyModel target = random_model(bracket_vocab(), 2, 10, 0.8);
  DraftHeads heads = DraftHeads::uniform(bracket_vocab(), 2, 3);
  const TokenSeq ctx{0, 1};
  double prev = draft_kl(heads, target, ctx);
  for (int step = 0; step < 200; ++step) {
    KlUpdateResult r = online_kl_update(heads, target, ctx, 0.2);
    heads = std::move(r.heads);
  }
  CHECK(draft_kl(heads, target, ctx) < 0.01 * prev);
}

TEST_CASE("input validation") {
  ToyModel target = random_model(bracket_vocab(), 2, 11);
  DraftHeads heads = DraftHeads::uniform(bracket_vocab(), 2, 2);
  CHECK_THROWS_AS(build_tree(heads, {0}, 0), config_error);
  CHECK_THROWS_AS(simulate_decode(target, heads, {{0, 0}}, 4, 0, 8), config_error);
  CHECK_THROWS_AS(draft_kl(heads, target, {0}), data_error);  // context shorter than window
  CHECK_THROWS_AS(online_kl_update(heads, target, {0, 1}, -0.5), config_error);
  CHECK_THROWS_AS(DraftHeads::uniform(bracket_vocab(), 2, 0), config_error);
}
