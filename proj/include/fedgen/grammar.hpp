#pragma once

#include <span>
#include <utility>
#include <vector>

#include "fedgen/model.hpp"

namespace fedgen {

// Balanced bracket pairs over a configurable alphabet, terminated by <eos>.
// Any token that is neither a bracket nor the final <eos> rejects.
struct GrammarSpec {
  std::vector<std::pair<Token, Token>> pairs;  // (open, close)
  int max_depth = 8;
  Token eos = -1;

  bool is_open(Token t) const {
    for (const auto& [o, c] : pairs)
      if (o == t) return true;
    return false;
  }
  // Returns the matching open token, or -1.
  Token open_for(Token close) const {
    for (const auto& [o, c] : pairs)
      if (c == close) return o;
    return -1;
  }
};

bool check_syntax(std::span<const Token> seq, const GrammarSpec& grammar);

}  // namespace fedgen
