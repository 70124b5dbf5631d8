#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace promptforge {

/// Five-class scanner for C-family source lines. No keyword table: keywords
/// come out as identifiers.
enum class TokenKind { Identifier, Number, String, Char, Operator };

struct Token {
  TokenKind kind;
  std::string text;

  bool operator==(const Token&) const = default;
};

/// Whitespace is skipped; unterminated literals run to the end of input.
/// Multi-character operators use maximal munch.
std::vector<Token> tokenize(std::string_view line);

/// Identifier, number, string and char tokens all count as values.
inline bool is_value(TokenKind kind) { return kind != TokenKind::Operator; }

}  // namespace promptforge
