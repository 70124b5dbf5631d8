#include <doctest.h>

#include "promptforge/oracle.hpp"

using namespace promptforge;

TEST_CASE("norm2 oracle output parses") {
  auto s = parse_oracle_completion("norm2(x) <-> mult(x,x);");
  REQUIRE(s.has_value());
  CHECK(s->lhs == "norm2(x)");
  CHECK(s->rhs == "mult(x,x)");
  CHECK_FALSE(s->condition.has_value());
}

TEST_CASE("conditional oracle parses") {
  auto s = parse_oracle_completion("if (a != null) {{ toString(a) <-> Arrays.asList(a).toString() }};");
  REQUIRE(s.has_value());
  CHECK(s->condition == "a != null");
  CHECK(s->lhs == "toString(a)");
  CHECK(s->rhs == "Arrays.asList(a).toString()");
  CHECK(serialize(*s) == "if (a != null) {{ toString(a) <-> Arrays.asList(a).toString() }};");
}

TEST_CASE("prose without the anchor yields nothing") {
  CHECK_FALSE(parse_oracle_completion("I cannot determine an equivalence.").has_value());
  CHECK_FALSE(parse_oracle_completion("").has_value());
}

TEST_CASE("equivalence marker picks the line after it") {
  auto s = parse_oracle_completion("x <-> y;\n### Equivalence\nisEmpty() <-> size() == 0;");
  REQUIRE(s.has_value());
  CHECK(s->lhs == "isEmpty()");
}

TEST_CASE("name expansion respects token boundaries") {
  std::map<std::string, std::string> sym{{"Math", "java.lang.Math"}};
  CHECK(expand_names("Math.abs(x)", sym) == "java.lang.Math.abs(x)");
  CHECK(expand_names("MyMath.abs(x)", sym) == "MyMath.abs(x)");
  CHECK(expand_names("a.Math.abs(x)", sym) == "a.Math.abs(x)");
  CHECK(expand_names("f(\"Math\")", sym) == "f(\"Math\")");
  OracleSpec spec{std::string("Math.PI > 0"), "Math.abs(x)", "y", "m", 0};
  auto e = expand_names(spec, {});
  CHECK(e == spec);
  e = expand_names(spec, sym);
  CHECK(e.condition == "java.lang.Math.PI > 0");
}

TEST_CASE("matching is unordered and condition sensitive") {
  OracleSpec pred{std::nullopt, "a", "b", "m", 0};
  GroundTruthOracle truth{"m", std::nullopt, "b", "a", "p"};
  CHECK(match_oracle(pred, truth));

  OracleSpec longs{std::nullopt, "com.google.common.primitives.Longs.compare(a, b)", "java.lang.Long.compare(a, b)", "m", 0};
  GroundTruthOracle same{"m", std::nullopt, "com.google.common.primitives.Longs.compare(a, b)",
                         "java.lang.Long.compare(a,b)", "guava"};
  CHECK(match_oracle(longs, same));

  GroundTruthOracle cond = same;
  cond.condition = "a != null";
  CHECK_FALSE(match_oracle(longs, cond));
  CHECK(pair_matches(longs, cond));
}

TEST_CASE("normalization drops redundant outer parentheses only") {
  CHECK(normalize_expression(" (a + b) ") == "a+b");
  CHECK(normalize_expression("(a) + (b)") == "(a)+(b)");
}

TEST_CASE("f1 from reported precision and recall") {
  CHECK(std::abs(f1_score(0.82, 0.47) - 0.60) <= 0.005);
  CHECK(std::abs(f1_score(0.64, 0.54) - 0.59) <= 0.005);
  CHECK(f1_score(0.0, 0.0) == 0.0);
}

TEST_CASE("scoring: exact predictions give a perfect score") {
  std::vector<GroundTruthOracle> truths{{"A.f()", std::nullopt, "f()", "g()", "p1"},
                                        {"B.h(int)", std::string("x > 0"), "h(x)", "k(x)", "p2"}};
  std::vector<OracleSpec> preds{{std::nullopt, "g()", "f()", "A.f()", 0},
                                {std::string("x > 0"), "h(x)", "k(x)", "B.h(int)", 0}};
  auto s = score_oracles(preds, truths);
  CHECK(s.precision() == 1.0);
  CHECK(s.recall() == 1.0);
  CHECK(s.f1() == 1.0);
  CHECK(s.per_project.size() == 2);
}

TEST_CASE("scoring: one prediction matches at most one truth") {
  std::vector<GroundTruthOracle> truths{{"A.f()", std::nullopt, "f()", "g()", "p"}};
  std::vector<OracleSpec> preds{{std::nullopt, "f()", "g()", "A.f()", 0}, {std::nullopt, "f()", "g()", "A.f()", 1},
                                {std::nullopt, "u()", "v()", "Z.z()", 0}};
  auto s = score_oracles(preds, truths);
  CHECK(s.total.correct == 1);
  CHECK(s.total.predicted == 3);
  CHECK(s.precision() == doctest::Approx(1.0 / 3));
  CHECK(s.recall() == 1.0);
  CHECK(s.per_project.count("(unattributed)") == 1);
}

TEST_CASE("scoring: near misses are reported") {
  std::vector<GroundTruthOracle> truths{{"A.f()", std::string("a != null"), "f(a)", "g(a)", "p"}};
  std::vector<OracleSpec> preds{{std::nullopt, "f(a)", "g(a)", "A.f()", 0}};
  auto s = score_oracles(preds, truths);
  CHECK(s.total.correct == 0);
  CHECK(s.f1() == 0.0);
  CHECK(s.near_misses.size() == 1);
}

TEST_CASE("f1 property: zero iff nothing correct, bounded by twice p and r") {
  for (std::size_t truths = 1; truths <= 12; ++truths)
    for (std::size_t predicted = 0; predicted <= 12; ++predicted)
      for (std::size_t correct = 0; correct <= std::min(truths, predicted); ++correct) {
        auto s = make_score(correct, predicted, truths);
        CHECK((s.f1 == 0.0) == (correct == 0));
        CHECK(s.f1 <= std::min(2 * s.precision, 2 * s.recall) + 1e-12);
      }
}

TEST_CASE("ground truth and symbol files") {
  auto gt = parse_ground_truth(R"J([{"method_id":"A.f()","lhs":"f()","rhs":"g()","project":"p"},
                                   {"method_id":"B.g()","condition":"x","lhs":"a","rhs":"b","project":"q"}])J");
  REQUIRE(gt.size() == 2);
  CHECK(gt[1].condition == "x");
  auto sym = parse_symbol_map(R"({"Math":"java.lang.Math"})");
  CHECK(sym.at("Math") == "java.lang.Math");
}

TEST_CASE("oracle sentence heuristic") {
  CHECK(has_oracle_candidate_sentence("Returns the norm. This is equivalent to mult(x,x)."));
  CHECK(has_oracle_candidate_sentence("Same as size() == 0."));
  CHECK_FALSE(has_oracle_candidate_sentence("Returns the norm of the vector."));
  CHECK_FALSE(has_oracle_candidate_sentence("These are equivalent in spirit."));
}

TEST_CASE("oracle check rendering") {
  OracleSpec s{std::string("a != null"), "f(a)", "g(a)", "m", 0};
  auto out = render_oracle_check("boolean ok = ({CONDITION}) ? ({LHS}).equals({RHS}) : true;", s);
  CHECK(out == "boolean ok = (a != null) ? (f(a)).equals(g(a)) : true;");
}
