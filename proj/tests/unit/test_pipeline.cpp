#include <doctest.h>

#include "helpers.hpp"
#include "promptforge/pipeline.hpp"
#include "promptforge/process.hpp"
#include "promptforge/text.hpp"

using namespace promptforge;
namespace fs = std::filesystem;

namespace {

TaskConfig mutation_config() {
  TaskConfig c;
  c.task = ToolTask::Mutation;
  c.adapter.compile_cmd = pftest::stub("compile_stub.sh") + " {file}";
  c.workers = 2;
  return c;
}

const SourceUnit kThreeLines{"src/T.java",
                             "class T {\n  void f() {\n    int a = 1;\n    a += 2;\n    g(a);\n  }\n}\n", "java"};

class ThrowingBackend final : public ModelBackend {
 public:
  explicit ThrowingBackend(ErrorCode code) : code_(code) {}
  ModelResponse complete(const ModelRequest&) override { throw Error(code_, "backend down"); }

 private:
  ErrorCode code_;
};

std::size_t count_mutants(const std::vector<RunRecord>& records) {
  std::size_t n = 0;
  for (const auto& r : records)
    for (const auto& a : r.artifacts) n += std::holds_alternative<Mutant>(a);
  return n;
}

}  // namespace

TEST_CASE("one record per extracted line") {
  ScriptedBank bank;
  bank.set_default(std::string("- 1 |==> 0"));
  ScriptedBackend backend(bank);
  auto records = run_pipeline(mutation_config(), {kThreeLines}, backend);
  REQUIRE(records.size() == 3);
  CHECK(records[0].instance.line == 3);
  CHECK(records[2].instance.line == 5);
  CHECK(records[0].raw_completions == std::vector<std::string>{"- 1 |==> 0"});
  CHECK(count_mutants(records) == 1);
  CHECK(backend.calls() == 3);
}

TEST_CASE("empty corpus is rejected") {
  ScriptedBackend backend(ScriptedBank{});
  CHECK(pftest::code_of([&] { run_pipeline(mutation_config(), {}, backend); }) == ErrorCode::InvalidCorpus);
}

TEST_CASE("testgen: 5 methods x 100 scheduled queries") {
  TempDir out;
  auto config = load_config(pftest::fixture("testgen/testgen.toml").string());
  config.out_dir = out.path().string();
  auto corpus = load_corpus(config.corpus, config.base_dir);
  ScriptedBackend backend(ScriptedBank::load(config.backend.bank));
  auto records = run_pipeline(config, corpus, backend);
  REQUIRE(records.size() == 5);
  for (const auto& r : records) {
    CHECK(r.raw_completions.size() == 100);
    CHECK(r.prompts.size() == 100);
    CHECK_FALSE(r.incomplete);
    REQUIRE(r.coverage.has_value());
    for (const auto& a : r.artifacts) {
      const auto& t = std::get<TestCandidate>(a);
      CHECK(t.compiles);
      CHECK(t.body.find("SYNTAX_BOMB") == std::string::npos);
    }
    CHECK(r.artifacts.size() == 4);
  }
  CHECK(backend.calls() == 500);
  CHECK(fs::exists(out.path() / "Stats.max__" / "t0.0_q0.java"));
}

TEST_CASE("records are deterministic across worker counts") {
  ScriptedBank bank = ScriptedBank::load(pftest::fixture("toy/mutate_bank.json").string());
  auto config = load_config(pftest::fixture("toy/mutate.toml").string());
  auto corpus = load_corpus(config.corpus, config.base_dir);
  config.workers = 1;
  ScriptedBackend b1(bank);
  auto one = run_pipeline(config, corpus, b1);
  config.workers = 8;
  ScriptedBackend b8(bank);
  auto eight = run_pipeline(config, corpus, b8);
  CHECK(one == eight);
  CHECK(std::is_sorted(one.begin(), one.end(),
                       [](const RunRecord& a, const RunRecord& b) { return instance_order(a.instance, b.instance); }));
}

TEST_CASE("missing completions mark records incomplete") {
  ScriptedBank bank;
  bank.add("src/T.java:3", std::nullopt, 0.2, 0, "- 1 |==> 2");
  ScriptedBackend backend(bank);
  auto records = run_pipeline(mutation_config(), {kThreeLines}, backend);
  REQUIRE(records.size() == 3);
  CHECK_FALSE(records[0].incomplete);
  CHECK(records[1].incomplete);
  CHECK(records[2].incomplete);
}

TEST_CASE("backend failure: continue unless strict") {
  ThrowingBackend down(ErrorCode::BackendUnavailable);
  auto config = mutation_config();
  auto records = run_pipeline(config, {kThreeLines}, down);
  CHECK(records.size() == 3);
  for (const auto& r : records) CHECK(r.incomplete);

  config.strict = true;
  CHECK(pftest::code_of([&] { run_pipeline(config, {kThreeLines}, down); }) == ErrorCode::BackendUnavailable);
}

TEST_CASE("adapter failure aborts with partial records") {
  ScriptedBank bank;
  bank.set_default(std::string("- 1 |==> 0"));
  ScriptedBackend backend(bank);
  auto config = mutation_config();
  config.adapter.compile_cmd = "no-such-compiler-xyz {file}";
  try {
    run_pipeline(config, {kThreeLines}, backend);
    FAIL("expected PipelineAborted");
  } catch (const PipelineAborted& e) {
    CHECK(e.code() == ErrorCode::AdapterFailure);
    CHECK(e.partial().size() <= 3);
  }
}

TEST_CASE("compile filter drops SYNTAX_BOMB mutants") {
  ScriptedBank bank;
  bank.set_default(std::string("- 1 |==> SYNTAX_BOMB\n- 1 |==> 7"));
  ScriptedBackend backend(bank);
  auto records = run_pipeline(mutation_config(), {kThreeLines}, backend);
  CHECK(count_mutants(records) == 1);
  for (const auto& r : records)
    for (const auto& a : r.artifacts) CHECK(std::get<Mutant>(a).mutated_line.find("SYNTAX_BOMB") == std::string::npos);
  REQUIRE(records[0].discards.size() == 1);
  CHECK(records[0].discards[0].reason == kDiscardNoCompile);
}

TEST_CASE("allowlist restricts the mutated lines") {
  TempDir dir;
  text::write_file((dir.path() / "allow.txt").string(), "src/T.java:4\n");
  auto config = mutation_config();
  config.allowlist = (dir.path() / "allow.txt").string();
  ScriptedBank bank;
  bank.set_default(std::string("- 2 |==> 3"));
  ScriptedBackend backend(bank);
  auto records = run_pipeline(config, {kThreeLines}, backend);
  REQUIRE(records.size() == 1);
  CHECK(records[0].instance.line == 4);
}

TEST_CASE("oracle pipeline on a documented method") {
  TaskConfig config;
  config.task = ToolTask::OracleGen;
  config.adapter.compile_cmd = "true";
  SourceUnit unit{"demo/Pair.java", text::read_file(pftest::fixture("adapter/Pair.java").string()), "java"};
  ScriptedBank bank;
  bank.add("Pair.total()", std::nullopt, 0.0, 0,
           "It returns the sum.\n### Equivalence\ntotal() <-> plus(first(), second());\n");
  ScriptedBackend backend(bank);
  auto records = run_pipeline(config, {unit}, backend);
  REQUIRE(records.size() == 1);
  REQUIRE(records[0].artifacts.size() == 1);
  const auto& spec = std::get<OracleSpec>(records[0].artifacts[0]);
  CHECK(spec.method_id == "Pair.total()");
  CHECK(spec.rhs == "plus(first(), second())");
  CHECK(records[0].instance.context.at("project") == "demo");
}

TEST_CASE("extraction failure becomes a record") {
  TempDir out;
  auto config = load_config(pftest::fixture("testgen/testgen.toml").string());
  config.out_dir = out.path().string();
  config.schedule = {0.0, 0.0, 0.1, 1};
  SourceUnit broken{"src/Broken.java", "public class Broken {\n  public int f() {\n    return 1;\n", "java"};
  ScriptedBank bank;
  bank.set_default(std::string(""));
  ScriptedBackend backend(bank);
  auto records = run_pipeline(config, {broken}, backend);
  REQUIRE_FALSE(records.empty());
  const auto& last = records.back();
  CHECK(last.instance.id == "src/Broken.java:!extract");
  REQUIRE(last.discards.size() == 1);
  CHECK(text::starts_with(last.discards[0].reason, kDiscardExtraction));
}

TEST_CASE("reprocess reproduces the artifacts") {
  auto config = load_config(pftest::fixture("toy/mutate.toml").string());
  auto corpus = load_corpus(config.corpus, config.base_dir);
  ScriptedBackend backend(ScriptedBank::load(config.backend.bank));
  auto records = run_pipeline(config, corpus, backend);
  auto again = records;
  for (auto& r : again) {
    r.artifacts.clear();
    r.discards.clear();
  }
  reprocess(*make_tool(config), again, corpus);
  CHECK(again == records);
}

TEST_CASE("registered tools and path sanitizing") {
  CHECK(registered_tools() == std::vector<std::string>{"mutate", "oracle", "testgen"});
  CHECK(sanitize_for_path("A.f(int)") == "A.f_int_");
}
