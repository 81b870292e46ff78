#include "fedgen/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fedgen/rng.hpp"

namespace fedgen {

void SamplingStrategy::validate(int vocab_size) const {
  switch (kind) {
    case SamplingKind::greedy:
      break;
    case SamplingKind::temperature:
      if (temperature <= 0.0) throw config_error("temperature must be > 0");
      break;
    case SamplingKind::top_k:
      if (temperature <= 0.0) throw config_error("temperature must be > 0");
      if (top_k < 1 || top_k > vocab_size) throw config_error("top_k must be in [1, vocab size]");
      break;
    case SamplingKind::nucleus:
      if (temperature <= 0.0) throw config_error("temperature must be > 0");
      if (!(top_p > 0.0 && top_p <= 1.0)) throw config_error("nucleus p must be in (0, 1]");
      break;
    case SamplingKind::beam:
      if (beam_width < 1) throw config_error("beam width must be >= 1");
      break;
  }
  if (n_candidates < 1) throw config_error("n_candidates must be >= 1");
}

std::string SamplingStrategy::name() const {
  switch (kind) {
    case SamplingKind::greedy: return "greedy";
    case SamplingKind::temperature: return "temperature";
    case SamplingKind::top_k: return "top_k";
    case SamplingKind::nucleus: return "nucleus";
    case SamplingKind::beam: return "beam";
  }
  return "?";
}

std::string SamplingStrategy::hyperparams() const {
  std::ostringstream os;
  switch (kind) {
    case SamplingKind::greedy: break;
    case SamplingKind::temperature: os << "T=" << temperature; break;
    case SamplingKind::top_k: os << "k=" << top_k << " T=" << temperature; break;
    case SamplingKind::nucleus: os << "p=" << top_p << " T=" << temperature; break;
    case SamplingKind::beam: os << "width=" << beam_width; break;
  }
  if (n_candidates > 1) os << (os.tellp() > 0 ? " " : "") << "n=" << n_candidates;
  return os.str();
}

namespace {

std::vector<double> strategy_distribution(const ToyModel& model, std::span<const Token> hist,
                                          const SamplingStrategy& st) {
  auto row = model.logits(model.context_id(hist));
  std::vector<double> scaled(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) scaled[i] = row[i] / st.temperature;
  std::vector<double> p = softmax(scaled);

  if (st.kind == SamplingKind::top_k && st.top_k < static_cast<int>(p.size())) {
    std::vector<int> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return p[static_cast<std::size_t>(a)] > p[static_cast<std::size_t>(b)]; });
    std::vector<double> cut(p.size(), 0.0);
    double mass = 0.0;
    for (int i = 0; i < st.top_k; ++i) {
      cut[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
          p[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
      mass += p[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    }
    for (double& x : cut) x /= mass;
    return cut;
  }
  if (st.kind == SamplingKind::nucleus) {
    std::vector<int> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return p[static_cast<std::size_t>(a)] > p[static_cast<std::size_t>(b)]; });
    std::vector<double> cut(p.size(), 0.0);
    double mass = 0.0;
    for (int idx : order) {
      cut[static_cast<std::size_t>(idx)] = p[static_cast<std::size_t>(idx)];
      mass += p[static_cast<std::size_t>(idx)];
      if (mass >= st.top_p - 1e-15) break;
    }
    for (double& x : cut) x /= mass;
    return cut;
  }
  return p;
}

Token draw(const std::vector<double>& p, double u) {
  double cum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cum += p[i];
    if (u < cum) return static_cast<Token>(i);
  }
  return static_cast<Token>(p.size() - 1);  // guards rounding at u ~ 1
}

TokenSeq beam_search(const ToyModel& model, const TokenSeq& prompt, int width, int max_len) {
  struct Beam {
    TokenSeq seq;
    double logp = 0.0;
    bool done = false;
  };
  constexpr double kFloor = 1e-12;
  std::vector<Beam> beams{Beam{}};
  for (int step = 0; step < max_len; ++step) {
    bool any_live = false;
    std::vector<Beam> next;
    for (const Beam& b : beams) {
      if (b.done) {
        next.push_back(b);
        continue;
      }
      any_live = true;
      TokenSeq hist = prompt;
      hist.insert(hist.end(), b.seq.begin(), b.seq.end());
      std::vector<double> p = model.probs(model.context_id(hist));
      for (int t = 0; t < model.vocab.size(); ++t) {
        Beam nb = b;
        nb.seq.push_back(t);
        nb.logp += std::log(std::max(p[static_cast<std::size_t>(t)], kFloor));
        nb.done = (t == model.vocab.eos);
        next.push_back(std::move(nb));
      }
    }
    if (!any_live) break;
    std::stable_sort(next.begin(), next.end(), [](const Beam& a, const Beam& b) {
      if (a.logp != b.logp) return a.logp > b.logp;
      return a.seq < b.seq;  // deterministic tie-break
    });
    if (static_cast<int>(next.size()) > width) next.resize(static_cast<std::size_t>(width));
    beams = std::move(next);
  }
  return beams.front().seq;
}

}  // namespace

TokenSeq generate(const ToyModel& model, const TokenSeq& prompt, const SamplingStrategy& strategy,
                  int max_len, std::uint64_t seed) {
  if (max_len < 1) throw config_error("max_len must be positive");
  strategy.validate(model.vocab.size());

  if (strategy.kind == SamplingKind::beam)
    return beam_search(model, prompt, strategy.beam_width, max_len);

  Rng rng = Rng(seed).derive(0x6E5);
  TokenSeq hist = prompt;
  TokenSeq out;
  for (int step = 0; step < max_len; ++step) {
    Token t;
    if (strategy.kind == SamplingKind::greedy) {
      t = model.greedy_next(hist);
    } else {
      std::vector<double> p = strategy_distribution(model, hist, strategy);
      t = draw(p, rng.next_double());
    }
    out.push_back(t);
    hist.push_back(t);
    if (t == model.vocab.eos) break;
  }
  return out;
}

}  // namespace fedgen
