#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fedgen/grammar.hpp"
#include "fedgen/model.hpp"

namespace fedgen {

// Vocab file: one symbol per line, <eos> required.
Vocab load_vocab(const std::filesystem::path& path);
void save_vocab(const Vocab& vocab, const std::filesystem::path& path);

// Dataset file: one record per line,
//   <group_tag> TAB <prompt tokens space-separated> TAB <completion tokens>
// Returns one ClientDataset per distinct group tag, in first-seen order.
std::vector<ClientDataset> load_dataset(const std::filesystem::path& path, const Vocab& vocab);
void save_dataset(const std::vector<ClientDataset>& pool, const Vocab& vocab,
                  const std::filesystem::path& path);

struct CorpusSpec {
  int n_groups = 4;
  int samples_per_group = 100;
  int max_len = 12;          // bracket tokens before <eos>
  double bias = 0.75;        // probability a group draws its preferred pair
  std::uint64_t seed = 0;
};

// Synthetic balanced-bracket corpus; each group prefers one bracket pair so
// Dirichlet partitioning produces measurable heterogeneity.
std::vector<ClientDataset> make_corpus(const Vocab& vocab, const GrammarSpec& grammar,
                                       const CorpusSpec& spec);

// Convenience fixtures used by the CLI generator and the test suite.
Vocab default_vocab(int n_pairs);
GrammarSpec default_grammar(const Vocab& vocab, int max_depth);

}  // namespace fedgen
