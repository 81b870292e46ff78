#pragma once

#include <cstdint>
#include <vector>

#include "fedgen/model.hpp"

namespace fedgen {

// Per-depth draft distributions conditioned on the committed context
// (conditionally independent across depths given that context).
struct DraftHeads {
  Vocab vocab;
  int context_len = 2;
  int depth = 1;                    // tokens drafted ahead
  std::vector<ParamVector> tables;  // one logit table per depth

  static DraftHeads uniform(Vocab vocab, int context_len, int depth);
  // Heads whose depth-d row equals the target's distribution d steps along
  // its own greedy continuation; gives KL = 0 against that target.
  static DraftHeads distilled_from(const ToyModel& target, int depth);

  std::vector<double> probs(int d, std::size_t ctx) const;
  std::size_t context_id(std::span<const Token> history) const;
};

struct TreeNode {
  Token token = -1;
  int parent = -1;  // -1 = child of the root (last committed token)
  int depth = 1;
  double prob = 0.0;  // path probability under the draft distribution
};

struct TokenTree {
  std::vector<TreeNode> nodes;
};

// Greedy top-probability expansion to `size` nodes: repeatedly attaches the
// highest-probability unexpanded (node, token) child. Ties break on lowest
// parent id, then lowest token index, so the shape is deterministic.
TokenTree build_tree(const DraftHeads& heads, const TokenSeq& context, int size);

// Greedy verification walk: descend while the target's greedy next token is
// among the current node's children, then append that token as the
// correction, so at least one token always commits.
TokenSeq verify(const ToyModel& target, const TokenTree& tree, const TokenSeq& context);

struct DecodeStats {
  long long steps = 0;
  long long accepted_total = 0;     // tokens committed (draft hits + corrections)
  double acceptance_ratio = 0.0;    // drafted tokens accepted per verification step
  double mean_accepted_per_step = 0.0;
  double relative_cost = 1.0;       // max(1, tree_size / ceiling)
  double speedup = 0.0;             // mean committed per step / relative cost
};

// Decodes each prompt to termination with draft trees of `tree_size` nodes
// under a compute ceiling; the baseline single-token step costs 1 unit.
DecodeStats simulate_decode(const ToyModel& target, const DraftHeads& heads,
                            const std::vector<TokenSeq>& prompts, int tree_size, int ceiling,
                            int max_len);

// Parallel greedy decode of one prompt; must be token-identical to plain
// greedy decoding of the target.
TokenSeq parallel_greedy_decode(const ToyModel& target, const DraftHeads& heads,
                                const TokenSeq& prompt, int tree_size, int max_len);

struct KlUpdateResult {
  DraftHeads heads;
  double kl = 0.0;  // pre-update KL, summed over depths
};

// One exact gradient step on the per-depth KL(draft || target) at the served
// context; the deployment stream itself is the training data.
KlUpdateResult online_kl_update(const DraftHeads& heads, const ToyModel& target,
                                const TokenSeq& served_context, double lr);

// Sum over depths of KL(draft || target) at one context (target probabilities
// clamped at 1e-12).
double draft_kl(const DraftHeads& heads, const ToyModel& target, const TokenSeq& served_context);

}  // namespace fedgen
