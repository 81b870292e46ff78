#include "fedgen/grammar.hpp"

namespace fedgen {

bool check_syntax(std::span<const Token> seq, const GrammarSpec& grammar) {
  if (seq.empty() || seq.back() != grammar.eos) return false;
  std::vector<Token> stack;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    const Token t = seq[i];
    if (t == grammar.eos) return false;  // interior <eos>
    if (grammar.is_open(t)) {
      stack.push_back(t);
      if (static_cast<int>(stack.size()) > grammar.max_depth) return false;
      continue;
    }
    const Token open = grammar.open_for(t);
    if (open < 0) return false;  // not a bracket
    if (stack.empty() || stack.back() != open) return false;
    stack.pop_back();
  }
  return stack.empty();
}

}  // namespace fedgen
