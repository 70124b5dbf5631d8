#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "promptforge/testgen.hpp"

using namespace promptforge;

TEST_CASE("default schedule: 100 requests, 10 per temperature") {
  TemperatureSchedule s;
  auto reqs = schedule_queries(s, ModelRequest{});
  REQUIRE(reqs.size() == 100);
  std::map<long, int> per;
  for (const auto& r : reqs) {
    ++per[std::lround(r.temperature * 10)];
    CHECK(r.key.temperature == r.temperature);
    CHECK(r.n == 1);
  }
  CHECK(per.size() == 10);
  for (const auto& [t, n] : per) CHECK(n == 10);
  CHECK(reqs.front().temperature == 0.0);
  CHECK(reqs.back().temperature == doctest::Approx(0.9));
  CHECK(reqs.back().key.query_index == 9);
}

TEST_CASE("small schedules") {
  CHECK(schedule_queries({0.0, 0.0, 0.1, 1}, ModelRequest{}).size() == 1);
  auto nine = schedule_queries({0.0, 0.4, 0.2, 3}, ModelRequest{});
  CHECK(nine.size() == 9);
  CHECK(nine[3].temperature == doctest::Approx(0.2));
}

TEST_CASE("bad schedules are rejected") {
  CHECK(pftest::code_of([] { TemperatureSchedule{0.0, 0.9, 0.0, 10}.validate(); }) == ErrorCode::InvalidConfig);
  CHECK(pftest::code_of([] { TemperatureSchedule{0.5, 0.1, 0.1, 10}.validate(); }) == ErrorCode::InvalidConfig);
  CHECK(pftest::code_of([] { TemperatureSchedule{0.0, 0.9, 0.1, 0}.validate(); }) == ErrorCode::InvalidConfig);
}

static const char* kQuantilesTest =
    "public static void testQuantiles() {\n"
    "  double[] temp = new double[2];\n"
    "  temp[0] = 8.9;\n"
    "  temp[1] = 1;\n"
    "  DenseDoubleMatrix1D d1Double = new DenseDoubleMatrix1D(temp);\n"
    "  hep.aida.bin.DynamicBin1D d1ynamicBin = cern.colt.matrix.doublealgo.Statistic.bin(d1Double);\n"
    "  DoubleArrayList quantiles = d1ynamicBin.quantiles(new DoubleArrayList(new double[] {0.5,0.75}));\n"
    "  System.out.println(\"quantiles=\"+ quantiles);\n"
    "}\n";

TEST_CASE("testQuantiles completion parses into a candidate") {
  auto c = parse_test_completion(kQuantilesTest);
  REQUIRE(c.has_value());
  CHECK(c->body.rfind("public static void testQuantiles()", 0) == 0);
  CHECK(c->body.back() == '}');
  CHECK(test_size_lines(c->body) == 9);
}

TEST_CASE("one-line candidate and unbalanced braces") {
  auto c = parse_test_completion("public void t() { assert(true); }");
  REQUIRE(c.has_value());
  CHECK(test_size_lines(c->body) == 1);
  CHECK_FALSE(parse_test_completion("public void t() { if (x) { { y(); }").has_value());
  CHECK_FALSE(parse_test_completion("I would call the method.").has_value());
}

TEST_CASE("trailing text after the method is cut") {
  auto c = parse_test_completion(" public void t() {\n  f(\"}\");\n}\n---\nMethod: more");
  REQUIRE(c.has_value());
  CHECK(c->body == "public void t() {\n  f(\"}\");\n}");
}

TEST_CASE("injection into a template") {
  TestCandidate c;
  c.body = "public void t() { f(); }";
  c.normalized_hash = normalized_test_hash(c.body);
  auto unit = inject_into_template(c, "class T { {TEST_BODY} }");
  CHECK(unit.find(c.body) != std::string::npos);
  CHECK(unit.find("class T_") != std::string::npos);
  CHECK(unit.find("class T ") == std::string::npos);
  CHECK(injected_class_name(c, "class T { {TEST_BODY} }") == "T_" + c.normalized_hash.substr(0, 8));
  CHECK(pftest::code_of([&] { inject_into_template(c, "class T { }"); }) == ErrorCode::BadTemplate);
  CHECK(pftest::code_of([&] { inject_into_template(c, "{TEST_BODY} {TEST_BODY}"); }) == ErrorCode::BadTemplate);
}

TEST_CASE("distinct candidates get distinct class names") {
  std::set<std::string> names;
  for (int i = 0; i < 200; ++i) {
    TestCandidate c;
    c.body = "public void t" + std::to_string(i) + "() { f(" + std::to_string(i) + "); }";
    c.normalized_hash = normalized_test_hash(c.body);
    names.insert(injected_class_name(c, "public class {CLASS_NAME} { {TEST_BODY} }"));
  }
  CHECK(names.size() == 200);
}

TEST_CASE("dedup keeps the first candidate per normalized body") {
  auto mk = [](std::string body, double t) {
    TestCandidate c;
    c.body = std::move(body);
    c.temperature = t;
    c.normalized_hash = normalized_test_hash(c.body);
    return c;
  };
  auto a = dedup({mk("void t() { f(); }", 0.0), mk("void t() { f(); }", 0.3)});
  REQUIRE(a.size() == 1);
  CHECK(a[0].temperature == 0.0);
  CHECK(dedup({mk("void t() {\n  f();\n}", 0.0), mk("void t() { f(); }", 0.1)}).size() == 1);
  CHECK(dedup({mk("void t() { f(); // one\n}", 0.0), mk("void t() { f(); // two\n}", 0.1)}).size() == 1);
}

TEST_CASE("dedup: 100 candidates with 42 distinct bodies") {
  std::vector<TestCandidate> cands;
  for (int i = 0; i < 100; ++i) {
    TestCandidate c;
    const int k = (i * 17) % 42;
    // vary the layout but not the content
    c.body = (i % 2 ? "public void t" : "public  void t") + std::to_string(k) + "() {\n  g(" + std::to_string(k) + ");\n}";
    c.normalized_hash = normalized_test_hash(c.body);
    cands.push_back(c);
  }
  CHECK(dedup(cands).size() == 42);
}

TEST_CASE("helpers for quantiles") {
  MethodInfo m;
  m.name = "quantiles";
  m.class_name = "DynamicBin1D";
  m.parameter_types = {"DoubleArrayList"};
  m.signature = "public DoubleArrayList quantiles(DoubleArrayList percentages)";
  auto h = select_helpers(m);
  CHECK(h == std::vector<std::string>{"DynamicBin1D()", "DoubleArrayList()"});
  m.parameter_types = {"String", "int", "Integer"};
  CHECK(select_helpers(m) == std::vector<std::string>{"DynamicBin1D()"});
}

static CoverageMap range_map(int universe, int lo, int hi) {
  CoverageMap m;
  for (int l = 1; l <= universe; ++l) m.set("U.java", l, l >= lo && l <= hi);
  return m;
}

TEST_CASE("coverage union of overlapping suites") {
  auto t = coverage_report({{"A", {range_map(100, 1, 26), 3, 5}}, {"B", {range_map(100, 10, 35), 4, 6}}});
  REQUIRE(t.tools.size() == 2);
  CHECK(*t.tools[0].line_coverage == doctest::Approx(0.26));
  CHECK(*t.tools[1].line_coverage == doctest::Approx(0.26));
  CHECK(*t.combined == doctest::Approx(0.35));
  CHECK(t.tools[0].compiling_tests == 3);
}

TEST_CASE("single tool: combined equals its coverage") {
  auto t = coverage_report({{"A", {range_map(20, 1, 5), 1, 1}}});
  CHECK(*t.tools[0].line_coverage == doctest::Approx(0.25));
  CHECK(*t.combined == doctest::Approx(0.25));
}

TEST_CASE("mismatched universes are rejected") {
  CHECK(pftest::code_of([] {
          coverage_report({{"A", {range_map(10, 1, 2), 1, 1}}, {"B", {range_map(11, 1, 2), 1, 1}}});
        }) == ErrorCode::UniverseMismatch);
}

TEST_CASE("a tool without a map covers nothing") {
  auto t = coverage_report({{"A", {range_map(10, 1, 3), 1, 1}}, {"B", {std::nullopt, 0, std::nullopt}}});
  CHECK(*t.tools[1].line_coverage == 0.0);
  CHECK(*t.combined == doctest::Approx(0.3));
}
