#include "fedgen/pardecode.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace fedgen {

namespace {
constexpr double kProbFloor = 1e-12;
}

DraftHeads DraftHeads::uniform(Vocab vocab, int context_len, int depth) {
  if (depth < 1) throw config_error("draft depth must be >= 1");
  DraftHeads h;
  h.context_len = context_len;
  h.depth = depth;
  ParamLayout layout{vocab.size(), context_len};
  h.vocab = std::move(vocab);
  h.tables.assign(static_cast<std::size_t>(depth), ParamVector::zeros(layout));
  return h;
}

DraftHeads DraftHeads::distilled_from(const ToyModel& target, int depth) {
  DraftHeads h = uniform(target.vocab, target.context_len, depth);
  const std::size_t n_ctx = target.params.layout.n_contexts();
  const int v = target.vocab.size();

  for (std::size_t ctx = 0; ctx < n_ctx; ++ctx) {
    // decode the context id back into its token window
    TokenSeq window(static_cast<std::size_t>(target.context_len));
    std::size_t rest = ctx;
    for (int i = target.context_len - 1; i >= 0; --i) {
      window[static_cast<std::size_t>(i)] = static_cast<Token>(rest % static_cast<std::size_t>(v));
      rest /= static_cast<std::size_t>(v);
    }
    TokenSeq ext = window;
    for (int d = 0; d < depth; ++d) {
      const std::size_t ext_ctx = target.context_id(ext);
      auto row = target.logits(ext_ctx);
      const std::size_t base = h.tables[static_cast<std::size_t>(d)].layout.offset(ctx, 0);
      for (int t = 0; t < v; ++t)
        h.tables[static_cast<std::size_t>(d)].values[base + static_cast<std::size_t>(t)] =
            row[static_cast<std::size_t>(t)];
      ext.push_back(target.greedy_next(ext));
    }
  }
  return h;
}

std::size_t DraftHeads::context_id(std::span<const Token> history) const {
  const std::size_t v = static_cast<std::size_t>(vocab.size());
  std::size_t id = 0;
  for (int i = 0; i < context_len; ++i) {
    const int back = context_len - i;
    Token t = back <= static_cast<int>(history.size())
                  ? history[history.size() - static_cast<std::size_t>(back)]
                  : vocab.eos;
    id = id * v + static_cast<std::size_t>(t);
  }
  return id;
}

std::vector<double> DraftHeads::probs(int d, std::size_t ctx) const {
  const ParamVector& table = tables.at(static_cast<std::size_t>(d));
  auto row = std::span<const double>(table.values)
                 .subspan(table.layout.offset(ctx, 0), static_cast<std::size_t>(vocab.size()));
  return softmax(row);
}

TokenTree build_tree(const DraftHeads& heads, const TokenSeq& context, int size) {
  if (size < 1) throw config_error("tree size must be >= 1");
  const std::size_t root_ctx = heads.context_id(context);
  std::vector<std::vector<double>> dist(static_cast<std::size_t>(heads.depth));
  for (int d = 0; d < heads.depth; ++d) dist[static_cast<std::size_t>(d)] = heads.probs(d, root_ctx);

  struct Candidate {
    double prob;
    int parent;
    Token token;
    int depth;
  };
  auto worse = [](const Candidate& a, const Candidate& b) {
    if (a.prob != b.prob) return a.prob < b.prob;
    if (a.parent != b.parent) return a.parent > b.parent;
    return a.token > b.token;
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> frontier(worse);

  const int v = heads.vocab.size();
  for (Token t = 0; t < v; ++t) frontier.push(Candidate{dist[0][static_cast<std::size_t>(t)], -1, t, 1});

  TokenTree tree;
  while (static_cast<int>(tree.nodes.size()) < size && !frontier.empty()) {
    Candidate c = frontier.top();
    frontier.pop();
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{c.token, c.parent, c.depth, c.prob});
    if (c.depth < heads.depth && c.token != heads.vocab.eos) {
      const auto& next = dist[static_cast<std::size_t>(c.depth)];
      for (Token t = 0; t < v; ++t)
        frontier.push(Candidate{c.prob * next[static_cast<std::size_t>(t)], node_id, t, c.depth + 1});
    }
  }
  return tree;
}

namespace {

TokenSeq verify_impl(const ToyModel& target, const TokenTree& tree, const TokenSeq& context,
                     int* draft_hits) {
  std::vector<std::vector<int>> children(tree.nodes.size() + 1);
  auto bucket = [&](int parent) -> std::vector<int>& {
    return children[static_cast<std::size_t>(parent + 1)];
  };
  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    bucket(tree.nodes[i].parent).push_back(static_cast<int>(i));

  TokenSeq committed;
  TokenSeq hist = context;
  int hits = 0;
  int cur = -1;
  for (;;) {
    const Token g = target.greedy_next(hist);
    int next = -1;
    for (int child : bucket(cur))
      if (tree.nodes[static_cast<std::size_t>(child)].token == g) {
        next = child;
        break;
      }
    committed.push_back(g);
    hist.push_back(g);
    if (next < 0) break;  // g is the correction token
    ++hits;
    if (g == target.vocab.eos) break;
    cur = next;
  }
  if (draft_hits) *draft_hits = hits;
  return committed;
}

}  // namespace

TokenSeq verify(const ToyModel& target, const TokenTree& tree, const TokenSeq& context) {
  return verify_impl(target, tree, context, nullptr);
}

DecodeStats simulate_decode(const ToyModel& target, const DraftHeads& heads,
                            const std::vector<TokenSeq>& prompts, int tree_size, int ceiling,
                            int max_len) {
  if (ceiling < 1) throw config_error("compute ceiling must be >= 1");
  if (tree_size < 1) throw config_error("tree size must be >= 1");

  long long steps = 0, committed_total = 0, hits_total = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : steps, committed_total, hits_total)
  for (long long pi = 0; pi < static_cast<long long>(prompts.size()); ++pi) {
    TokenSeq hist = prompts[static_cast<std::size_t>(pi)];
    int generated = 0;
    bool done = false;
    while (!done && generated < max_len) {
      TokenTree tree = build_tree(heads, hist, tree_size);
      int hits = 0;
      TokenSeq committed = verify_impl(target, tree, hist, &hits);
      ++steps;
      for (Token t : committed) {
        if (generated >= max_len) break;
        hist.push_back(t);
        ++generated;
        ++committed_total;
        if (t == target.vocab.eos) {
          done = true;
          break;
        }
      }
      hits_total += hits;
    }
  }

  DecodeStats stats;
  stats.steps = steps;
  stats.accepted_total = committed_total;
  stats.relative_cost = std::max(1.0, static_cast<double>(tree_size) / ceiling);
  if (steps > 0) {
    stats.acceptance_ratio = static_cast<double>(hits_total) / static_cast<double>(steps);
    stats.mean_accepted_per_step = static_cast<double>(committed_total) / static_cast<double>(steps);
    stats.speedup = stats.mean_accepted_per_step / stats.relative_cost;
  }
  return stats;
}

TokenSeq parallel_greedy_decode(const ToyModel& target, const DraftHeads& heads,
                                const TokenSeq& prompt, int tree_size, int max_len) {
  TokenSeq hist = prompt;
  TokenSeq out;
  while (static_cast<int>(out.size()) < max_len) {
    TokenTree tree = build_tree(heads, hist, tree_size);
    TokenSeq committed = verify(target, tree, hist);
    for (Token t : committed) {
      if (static_cast<int>(out.size()) >= max_len) return out;
      out.push_back(t);
      hist.push_back(t);
      if (t == target.vocab.eos) return out;
    }
  }
  return out;
}

double draft_kl(const DraftHeads& heads, const ToyModel& target, const TokenSeq& served_context) {
  if (static_cast<int>(served_context.size()) < target.context_len)
    throw data_error("served context shorter than the model context window");

  const std::size_t ctx = heads.context_id(served_context);
  TokenSeq ext = served_context;
  double total = 0.0;
  for (int d = 0; d < heads.depth; ++d) {
    std::vector<double> a = heads.probs(d, ctx);
    std::vector<double> o = target.probs(target.context_id(ext));
    double kl = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      kl += a[i] * (std::log(a[i]) - std::log(std::max(o[i], kProbFloor)));
    if (!std::isfinite(kl))
      throw numeric_error("non-finite KL at context id " + std::to_string(ctx));
    total += kl;
    ext.push_back(target.greedy_next(ext));
  }
  return total;
}

KlUpdateResult online_kl_update(const DraftHeads& heads, const ToyModel& target,
                                const TokenSeq& served_context, double lr) {
  if (lr < 0.0) throw config_error("learning rate must be nonnegative");
  if (static_cast<int>(served_context.size()) < target.context_len)
    throw data_error("served context shorter than the model context window");

  KlUpdateResult result{heads, 0.0};
  const std::size_t ctx = heads.context_id(served_context);
  const int v = heads.vocab.size();

  TokenSeq ext = served_context;
  for (int d = 0; d < heads.depth; ++d) {
    std::vector<double> a = heads.probs(d, ctx);
    std::vector<double> o = target.probs(target.context_id(ext));

    double kl = 0.0;
    std::vector<double> log_ratio(static_cast<std::size_t>(v));
    for (int t = 0; t < v; ++t) {
      const std::size_t i = static_cast<std::size_t>(t);
      log_ratio[i] = std::log(a[i]) - std::log(std::max(o[i], kProbFloor));
      kl += a[i] * log_ratio[i];
    }
    if (!std::isfinite(kl))
      throw numeric_error("non-finite KL at context id " + std::to_string(ctx));
    result.kl += kl;

    // d KL / d logit_j = a_j * (log(a_j / o_j) - KL) for a = softmax(logits)
    ParamVector& table = result.heads.tables[static_cast<std::size_t>(d)];
    const std::size_t base = table.layout.offset(ctx, 0);
    for (int t = 0; t < v; ++t) {
      const std::size_t i = static_cast<std::size_t>(t);
      table.values[base + i] -= lr * a[i] * (log_ratio[i] - kl);
    }
    ext.push_back(target.greedy_next(ext));
  }
  return result;
}

}  // namespace fedgen
