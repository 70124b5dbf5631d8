#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "promptforge/adapter.hpp"
#include "promptforge/process.hpp"
#include "promptforge/text.hpp"

using namespace promptforge;
namespace fs = std::filesystem;

static SourceUnit load(const std::string& rel) {
  return {rel, text::read_file(pftest::fixture(rel).string()), "java"};
}

TEST_CASE("comment and blank lines give no instances") {
  CHECK(extract_lines({"X.java", "// comment\n\n", "java"}).empty());
}

TEST_CASE("table example line is one instance") {
  const std::string line = R"(parsed = (parsed + "000000000").substring(0, 9);)";
  auto inst = extract_lines({"X.java", "    " + line + "\n", "java"});
  REQUIRE(inst.size() == 1);
  CHECK(text::trim(inst[0].payload) == line);
  CHECK(inst[0].line == 1);
  CHECK(inst[0].id == "X.java:1");
}

TEST_CASE("10-line class with 4 statements") {
  auto unit = load("adapter/Counter.java");
  auto inst = extract_lines(unit);
  REQUIRE(inst.size() == 4);
  std::vector<std::size_t> lines;
  for (const auto& i : inst) {
    lines.push_back(i.line);
    CHECK(unit.text.find(i.payload) != std::string::npos);
  }
  CHECK(lines == std::vector<std::size_t>{2, 4, 5, 8});
}

TEST_CASE("two public methods list each other as helpers") {
  auto ex = extract_methods(load("adapter/Pair.java"));
  CHECK_FALSE(ex.unbalanced_braces.has_value());
  REQUIRE(ex.methods.size() == 2);
  const auto& total = ex.methods[0];
  const auto& first = ex.methods[1];
  CHECK(total.name == "total");
  CHECK(total.class_name == "Pair");
  CHECK(total.method_id() == "Pair.total()");
  CHECK(total.short_signature() == "int total()");
  REQUIRE(total.doc_comment.has_value());
  CHECK(total.doc_comment->find("Same as plus(first(), second()).") != std::string::npos);
  CHECK_FALSE(first.doc_comment.has_value());
  CHECK(std::find(total.helpers.begin(), total.helpers.end(), first.signature) != total.helpers.end());
  CHECK(std::find(first.helpers.begin(), first.helpers.end(), total.signature) != first.helpers.end());
  CHECK(total.body.find("return a + b;") != std::string::npos);
}

TEST_CASE("doc comment of norm2") {
  const std::string src =
      "public class Algebra {\n"
      "  /**\n"
      "   * Returns the two-norm (aka euclidean norm) of vector x;\n"
      "   * equivalent to mult(x,x).\n"
      "   */\n"
      "  public double norm2(DoubleMatrix1D x) {\n"
      "    return mult(x, x);\n"
      "  }\n"
      "}\n";
  auto ex = extract_methods({"Algebra.java", src, "java"});
  REQUIRE(ex.methods.size() == 1);
  const auto& m = ex.methods[0];
  CHECK(m.method_id() == "Algebra.norm2(DoubleMatrix1D)");
  REQUIRE(m.doc_comment.has_value());
  CHECK(text::collapse_whitespace(*m.doc_comment).find("equivalent to mult(x,x)") != std::string::npos);
  CHECK(m.parameter_types == std::vector<std::string>{"DoubleMatrix1D"});
}

TEST_CASE("unbalanced braces are reported with partial results") {
  auto ex = extract_methods({"B.java", "class B {\n  void ok() { }\n  void broken() {\n", "java"});
  CHECK(ex.unbalanced_braces.has_value());
}

TEST_CASE("brace matching skips strings and comments") {
  const std::string s = "{ f(\"}\"); // }\n /* } */ }";
  CHECK(find_matching_brace(s, 0) == s.size() - 1);
  CHECK(find_matching_brace("{ {", 0) == std::string::npos);
}

TEST_CASE("compile check passes and fails by exit status") {
  AdapterSpec ok;
  ok.compile_cmd = "true";
  CHECK(compile_check("class A {}", ok).ok);

  AdapterSpec fail;
  fail.compile_cmd = "echo \"error: ';' expected\" >&2; exit 1";
  auto r = compile_check("class A {}", fail);
  CHECK_FALSE(r.ok);
  CHECK(r.diagnostics.find("error: ';' expected") != std::string::npos);
}

TEST_CASE("compile check sees the file under its name") {
  AdapterSpec spec;
  spec.compile_cmd = pftest::stub("compile_stub.sh") + " {file}";
  CHECK(compile_check("int x = 1;", spec).ok);
  auto bad = compile_check("int x = SYNTAX_BOMB;", spec);
  CHECK_FALSE(bad.ok);
  CHECK(bad.diagnostics.find("';' expected") != std::string::npos);
}

TEST_CASE("compile check against a real toolchain: 31 of 50 compile") {
  auto items = nlohmann::json::parse(text::read_file(pftest::fixture("adapter/compile_candidates.json").string()));
  REQUIRE(items.size() == 50);
  AdapterSpec spec;
  spec.compile_cmd = "g++ -fsyntax-only -x c++ {file}";
  int ok = 0;
  for (const auto& item : items) {
    const bool verdict = compile_check(item["code"].get<std::string>() + "\n", spec, "Unit.cpp").ok;
    CHECK(verdict == item["ok"].get<bool>());
    ok += verdict;
  }
  CHECK(ok == 31);
}

TEST_CASE("missing compiler is an adapter failure") {
  AdapterSpec spec;
  spec.compile_cmd = "definitely-not-a-compiler-xyz {file}";
  CHECK(pftest::code_of([&] { compile_check("x", spec); }) == ErrorCode::AdapterFailure);
}

TEST_CASE("compile timeout") {
  AdapterSpec spec;
  spec.compile_cmd = "sleep 5";
  spec.timeout_s = 1;
  auto r = compile_check("x", spec);
  CHECK_FALSE(r.ok);
  CHECK(r.diagnostics == "timeout");
}

TEST_CASE("coverage csv parsing and fractions") {
  std::string csv = "path,line,covered\n";
  for (int l = 1; l <= 20; ++l) csv += "A.java," + std::to_string(l) + "," + (l <= 5 ? "1" : "0") + "\n";
  auto m = parse_coverage_csv(csv);
  CHECK(m.instrumented() == 20);
  CHECK(m.covered() == 5);
  CHECK(m.fraction() == doctest::Approx(0.25));
  CHECK(pftest::code_of([] { parse_coverage_csv("A.java,x,1\n"); }) == ErrorCode::UnparseableReport);
  auto merged = parse_coverage_csv("A.java,1,0\nA.java,1,1\n");
  CHECK(merged.covered() == 1);
}

TEST_CASE("run_coverage with the stub tool") {
  TempDir dir;
  const auto universe = dir.path() / "universe.csv";
  text::write_file(universe.string(), "U.java,1\nU.java,2\nU.java,3\nU.java,4\n");
  AdapterSpec spec;
  spec.compile_cmd = "true";
  spec.coverage_cmd = pftest::stub("coverage_stub.sh") + " " + universe.string() + " {out} {tests}";

  const auto t1 = dir.path() / "T1.java";
  text::write_file(t1.string(), "COVER_1 COVER_3");
  auto m = run_coverage({t1}, spec);
  CHECK(m.instrumented() == 4);
  CHECK(m.covered() == 2);

  auto none = run_coverage({}, spec);
  CHECK(none.instrumented() == 4);
  CHECK(none.covered() == 0);
}

TEST_CASE("coverage failures") {
  AdapterSpec spec;
  spec.compile_cmd = "true";
  CHECK(pftest::code_of([&] { run_coverage({}, spec); }) == ErrorCode::AdapterFailure);
  spec.coverage_cmd = "exit 3";
  CHECK(pftest::code_of([&] { run_coverage({}, spec); }) == ErrorCode::AdapterFailure);
  spec.coverage_cmd = "echo garbage > {out}";
  CHECK(pftest::code_of([&] { run_coverage({}, spec); }) == ErrorCode::UnparseableReport);
}

TEST_CASE("quantiles fixture maps") {
  auto gen = load_coverage_map(pftest::fixture("quantiles/generated.csv").string());
  auto base = load_coverage_map(pftest::fixture("quantiles/baseline.csv").string());
  CHECK(gen.fraction() == doctest::Approx(0.29));
  CHECK(base.fraction() == doctest::Approx(0.26));
}

TEST_CASE("extraction output is a subset of the unit lines") {
  for (const char* f : {"toy/src/A.java", "toy/src/B.java", "adapter/Counter.java", "testgen/src/Stats.java"}) {
    auto unit = load(f);
    auto lines = text::split_lines(unit.text);
    for (const auto& i : extract_lines(unit)) {
      REQUIRE(i.line >= 1);
      REQUIRE(i.line <= lines.size());
      CHECK(std::string(lines[i.line - 1]).find(i.payload) != std::string::npos);
    }
  }
}

TEST_CASE("allowlist rows") {
  auto a = parse_allowlist("# keep\nsrc/A.java:5\nsrc/B.java:6\n");
  CHECK(a.size() == 2);
  CHECK(a.count({"src/A.java", 5}) == 1);
  CHECK(pftest::code_of([] { parse_allowlist("nocolon"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("external extractor output is read as JSON") {
  TempDir dir;
  const auto script = dir.path() / "extract.sh";
  text::write_file(script.string(),
                   "echo '[{\"signature\":\"public int f()\",\"body\":\"{ return 1; }\",\"byte_range\":[0,10],"
                   "\"name\":\"f\",\"class_name\":\"K\"}]'\n");
  AdapterSpec spec;
  spec.compile_cmd = "true";
  spec.extract_cmd = "sh " + script.string() + " {file}";
  auto ex = extract_methods_external({"K.java", "class K {}", "java"}, spec);
  REQUIRE(ex.methods.size() == 1);
  CHECK(ex.methods[0].method_id() == "K.f()");
}
