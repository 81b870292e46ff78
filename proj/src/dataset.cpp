#include "fedgen/dataset.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "fedgen/rng.hpp"

namespace fedgen {

Vocab load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open vocab file: " + path.string());
  std::vector<std::string> syms;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) syms.push_back(line);
  }
  return Vocab::from_symbols(std::move(syms));
}

void save_vocab(const Vocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write vocab file: " + path.string());
  for (const auto& s : vocab.symbols) out << s << "\n";
}

namespace {

TokenSeq parse_tokens(const std::string& field, const Vocab& vocab) {
  TokenSeq seq;
  std::istringstream is(field);
  std::string sym;
  while (is >> sym) seq.push_back(vocab.id_of(sym));
  return seq;
}

std::string format_tokens(const TokenSeq& seq, const Vocab& vocab) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += vocab.symbol(seq[i]);
  }
  return out;
}

}  // namespace

std::vector<ClientDataset> load_dataset(const std::filesystem::path& path, const Vocab& vocab) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open dataset file: " + path.string());

  std::vector<ClientDataset> pool;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw data_error("malformed dataset line " + std::to_string(lineno) + " in " + path.string());

    Sample s;
    s.prompt = parse_tokens(line.substr(t1 + 1, t2 - t1 - 1), vocab);
    s.completion = parse_tokens(line.substr(t2 + 1), vocab);
    if (s.prompt.empty() && s.completion.empty())
      throw data_error("empty sample at line " + std::to_string(lineno));
    if (s.completion.empty() || s.completion.back() != vocab.eos)
      throw data_error("completion must end with <eos> at line " + std::to_string(lineno));

    const std::string tag = line.substr(0, t1);
    auto [it, inserted] = index.try_emplace(tag, pool.size());
    if (inserted) pool.push_back(ClientDataset{{}, tag});
    pool[it->second].samples.push_back(std::move(s));
  }
  if (pool.empty()) throw data_error("dataset file has no records: " + path.string());
  return pool;
}

void save_dataset(const std::vector<ClientDataset>& pool, const Vocab& vocab,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write dataset file: " + path.string());
  for (const ClientDataset& ds : pool)
    for (const Sample& s : ds.samples)
      out << ds.group_tag << '\t' << format_tokens(s.prompt, vocab) << '\t'
          << format_tokens(s.completion, vocab) << "\n";
}

Vocab default_vocab(int n_pairs) {
  static const std::vector<std::pair<std::string, std::string>> kPairs = {
      {"(", ")"}, {"[", "]"}, {"{", "}"}, {"<", ">"}};
  if (n_pairs < 1 || n_pairs > static_cast<int>(kPairs.size()))
    throw config_error("n_pairs must be in [1, 4]");
  std::vector<std::string> syms;
  for (int i = 0; i < n_pairs; ++i) {
    syms.push_back(kPairs[static_cast<std::size_t>(i)].first);
    syms.push_back(kPairs[static_cast<std::size_t>(i)].second);
  }
  syms.push_back(kEosSymbol);
  return Vocab::from_symbols(std::move(syms));
}

GrammarSpec default_grammar(const Vocab& vocab, int max_depth) {
  GrammarSpec g;
  g.max_depth = max_depth;
  g.eos = vocab.eos;
  // default_vocab lays out pairs as consecutive (open, close) symbols
  for (int i = 0; i + 1 < vocab.size(); i += 2)
    g.pairs.emplace_back(static_cast<Token>(i), static_cast<Token>(i + 1));
  return g;
}

std::vector<ClientDataset> make_corpus(const Vocab& vocab, const GrammarSpec& grammar,
                                       const CorpusSpec& spec) {
  if (spec.n_groups < 1 || spec.samples_per_group < 1) throw config_error("corpus sizes must be positive");
  const int n_pairs = static_cast<int>(grammar.pairs.size());

  std::vector<ClientDataset> pool;
  for (int g = 0; g < spec.n_groups; ++g) {
    ClientDataset ds;
    ds.group_tag = "repo" + std::to_string(g);
    Rng rng = Rng(spec.seed).derive(0xDA7A, static_cast<std::uint64_t>(g));
    const int preferred = g % n_pairs;

    for (int s = 0; s < spec.samples_per_group; ++s) {
      TokenSeq seq;
      std::vector<int> stack;  // open pair indices
      while (static_cast<int>(seq.size()) < spec.max_len) {
        const int depth = static_cast<int>(stack.size());
        const int room = spec.max_len - static_cast<int>(seq.size());
        bool open;
        if (depth == 0) {
          if (!seq.empty() && rng.next_double() < 0.35) break;  // stop at a balanced point
          open = true;
        } else if (depth >= grammar.max_depth || room <= depth) {
          open = false;
        } else {
          open = rng.next_double() < 0.5;
        }
        if (open) {
          int pair = preferred;
          if (n_pairs > 1 && rng.next_double() >= spec.bias)
            pair = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_pairs)));
          stack.push_back(pair);
          seq.push_back(grammar.pairs[static_cast<std::size_t>(pair)].first);
        } else {
          seq.push_back(grammar.pairs[static_cast<std::size_t>(stack.back())].second);
          stack.pop_back();
        }
      }
      while (!stack.empty()) {  // close whatever the length cap left open
        seq.push_back(grammar.pairs[static_cast<std::size_t>(stack.back())].second);
        stack.pop_back();
      }

      Sample sample;
      const std::size_t split = seq.empty() ? 0 : rng.next_below(seq.size() + 1);
      sample.prompt.assign(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(split));
      sample.completion.assign(seq.begin() + static_cast<std::ptrdiff_t>(split), seq.end());
      sample.completion.push_back(vocab.eos);
      ds.samples.push_back(std::move(sample));
    }
    pool.push_back(std::move(ds));
  }
  return pool;
}

}  // namespace fedgen
