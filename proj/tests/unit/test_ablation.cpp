#include <doctest.h>

#include "helpers.hpp"
#include "promptforge/ablation.hpp"
#include "promptforge/cli.hpp"
#include "promptforge/process.hpp"

using namespace promptforge;

namespace {

std::size_t parsed_mutants(const std::vector<RunRecord>& records) {
  std::size_t n = 0;
  for (const auto& r : records)
    for (const auto& a : r.artifacts) n += std::holds_alternative<Mutant>(a);
  return n;
}

}  // namespace

TEST_CASE("mutation ablation over all variants") {
  TempDir out;
  auto config = load_config(pftest::fixture("toy/ablate.toml").string());
  config.out_dir = out.path().string();
  auto corpus = load_corpus(config.corpus, config.base_dir);
  auto backend = make_backend(config, [](const std::string&) { return std::nullopt; });
  auto results = run_ablation(config, corpus, *backend, config.ablation_variants, load_report_inputs(config));
  REQUIRE(results.size() == 4);
  CHECK(results[0].variant == PromptVariant::Default);
  CHECK(results[1].variant == PromptVariant::NLOnly);
  CHECK(parsed_mutants(results[0].records) == 12);
  CHECK(parsed_mutants(results[1].records) == 0);
  CHECK(results[1].raw_counts.at("mutants") == 0);
  CHECK_FALSE(results[1].headline[0].second.has_value());
  for (const auto& r : results) CHECK(r.records.size() == 10);

  auto t = ablation_table(results);
  CHECK(t.rows.size() == 4);
  CHECK(t.columns[2] == "compilable");
}

TEST_CASE("single variant gives one result") {
  TempDir out;
  auto config = load_config(pftest::fixture("toy/ablate.toml").string());
  config.out_dir = out.path().string();
  auto corpus = load_corpus(config.corpus, config.base_dir);
  auto backend = make_backend(config, [](const std::string&) { return std::nullopt; });
  CHECK(run_ablation(config, corpus, *backend, {PromptVariant::Default}).size() == 1);
  CHECK(pftest::code_of([&] { run_ablation(config, corpus, *backend, {}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("testgen ablation reports line coverage per variant") {
  TempDir out;
  auto config = load_config(pftest::fixture("testgen/testgen.toml").string());
  config.out_dir = out.path().string();
  config.schedule = {0.0, 0.1, 0.1, 2};
  auto corpus = load_corpus(config.corpus, config.base_dir);

  // Default uses the fixture bank; the other variants produce weaker tests.
  ScriptedBank bank = ScriptedBank::load(config.backend.bank);
  auto weak = [](const std::string& marks) {
    ScriptedBank b;
    b.set_default("public void t() {\n  System.out.println(\"" + marks + "\");\n}\n");
    return b;
  };
  bank.merge(weak("COVER_11 COVER_17"), PromptVariant::NLOnly);
  bank.merge(weak("COVER_11"), PromptVariant::ExOnly);
  bank.merge(weak(""), PromptVariant::BadEx);
  ScriptedBackend backend(bank);

  auto results = run_ablation(config, corpus, backend, config.ablation_variants);
  REQUIRE(results.size() == 4);
  std::vector<double> lc;
  for (const auto& r : results) lc.push_back(r.headline.at(0).second.value());
  for (std::size_t i = 1; i < lc.size(); ++i) CHECK(lc[0] >= lc[i]);
  CHECK(lc[1] > lc[2]);
  CHECK(lc[2] > lc[3]);
  CHECK(lc[3] == 0.0);
  CHECK(backend.calls() == 4 * 5 * 4);
}
