#include "promptforge/lexer.hpp"

#include <array>
#include <cctype>

namespace promptforge {

namespace {

// Longest first so the first prefix match is the maximal munch.
constexpr std::array<std::string_view, 36> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==",
    "!=",   "<=",  ">=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "<<",
    ">>",   "+",   "-",   "*",   "/",   "%",  "=",  "<",  ">",  "!",  "&",  "|"};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
         static_cast<unsigned char>(c) >= 0x80;
}
bool ident_char(char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::size_t scan_quoted(std::string_view s, std::size_t i, char quote) {
  ++i;
  while (i < s.size()) {
    if (s[i] == '\\') {
      i += 2;
      continue;
    }
    if (s[i] == quote) return i + 1;
    ++i;
  }
  return s.size();
}

std::size_t scan_number(std::string_view s, std::size_t i) {
  while (i < s.size()) {
    const char c = s[i];
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
      ++i;
    } else if ((c == '+' || c == '-') && (s[i - 1] == 'e' || s[i - 1] == 'E' || s[i - 1] == 'p' ||
                                          s[i - 1] == 'P') &&
               !(s[0] == '0' && i > 1 && (s[1] == 'x' || s[1] == 'X'))) {
      ++i;
    } else {
      break;
    }
  }
  return i;
}

}  // namespace

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    TokenKind kind = TokenKind::Operator;
    if (ident_start(c)) {
      while (end < line.size() && ident_char(line[end])) ++end;
      kind = TokenKind::Identifier;
    } else if (digit(c) || (c == '.' && i + 1 < line.size() && digit(line[i + 1]))) {
      end = i + scan_number(line.substr(i), 1);
      kind = TokenKind::Number;
    } else if (c == '"') {
      end = scan_quoted(line, i, '"');
      kind = TokenKind::String;
    } else if (c == '\'') {
      end = scan_quoted(line, i, '\'');
      kind = TokenKind::Char;
    } else {
      for (std::string_view op : kOperators) {
        if (line.substr(i, op.size()) == op) {
          end = i + op.size();
          break;
        }
      }
    }
    tokens.push_back({kind, std::string(line.substr(i, end - i))});
    i = end;
  }
  return tokens;
}

}  // namespace promptforge
