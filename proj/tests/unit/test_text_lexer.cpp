#include <doctest.h>

#include "promptforge/lexer.hpp"
#include "promptforge/text.hpp"

using namespace promptforge;

TEST_CASE("trim and whitespace helpers") {
  CHECK(text::trim("  a b \n") == "a b");
  CHECK(text::collapse_whitespace(" int   r =\tMath.min(a,  lo); ") == "int r = Math.min(a, lo);");
  CHECK(text::remove_whitespace(" a + b ") == "a+b");
  CHECK(text::is_blank(" \t"));
  CHECK_FALSE(text::is_blank(" x"));
}

TEST_CASE("split_lines drops only the trailing empty line") {
  auto lines = text::split_lines("a\n\nb\n");
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].empty());
  CHECK(text::split_lines("").empty());
}

TEST_CASE("csv record parsing handles quotes") {
  auto f = text::parse_csv_record(R"(a,"b, c","say ""hi""")");
  REQUIRE(f.size() == 3);
  CHECK(f[1] == "b, c");
  CHECK(f[2] == "say \"hi\"");
  CHECK(text::csv_escape("x,y") == "\"x,y\"");
  CHECK(text::csv_escape("plain") == "plain");
}

TEST_CASE("fixed formatting and token estimate") {
  CHECK(text::fixed(0.6049, 2) == "0.60");
  CHECK(text::fixed(18.44, 1) == "18.4");
  CHECK(text::estimate_tokens("") == 0);
  CHECK(text::estimate_tokens("one two three") == 4);  // ceil(3 * 1.3)
}

TEST_CASE("sha256 of a known string") {
  CHECK(text::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("shell quoting survives single quotes") {
  CHECK(text::shell_quote("it's") == "'it'\\''s'");
}

TEST_CASE("lexer kinds and maximal munch") {
  auto toks = tokenize(R"(if (x >= 0x1F && s != "a\"b") c = 'q'; i++;)");
  std::vector<std::string> texts;
  for (const auto& t : toks) texts.push_back(t.text);
  CHECK(texts == std::vector<std::string>{"if", "(", "x", ">=", "0x1F", "&&", "s", "!=", R"("a\"b")", ")", "c", "=",
                                          "'q'", ";", "i", "++", ";"});
  CHECK(toks[4].kind == TokenKind::Number);
  CHECK(toks[8].kind == TokenKind::String);
  CHECK(toks[12].kind == TokenKind::Char);
  CHECK(toks[5].kind == TokenKind::Operator);
  CHECK(toks[0].kind == TokenKind::Identifier);
}

TEST_CASE("lexer numbers with fractions and suffixes") {
  auto toks = tokenize("x = 1.5e-3f + 10L;");
  REQUIRE(toks.size() == 6);
  CHECK(toks[2].text == "1.5e-3f");
  CHECK(toks[4].text == "10L");
}

TEST_CASE("unterminated string runs to the end") {
  auto toks = tokenize("s = \"abc");
  REQUIRE(toks.size() == 3);
  CHECK(toks[2].kind == TokenKind::String);
  CHECK(toks[2].text == "\"abc");
}
