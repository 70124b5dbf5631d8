#include "promptforge/cli.hpp"

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "promptforge/ablation.hpp"
#include "promptforge/pipeline.hpp"
#include "promptforge/records.hpp"
#include "promptforge/report.hpp"
#include "promptforge/text.hpp"

namespace promptforge {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BackendUnavailable:
    case ErrorCode::MalformedResponse:
      return kExitBackend;
    case ErrorCode::AdapterFailure:
    case ErrorCode::UnparseableReport:
    case ErrorCode::UniverseMismatch:
      return kExitAdapter;
    default:
      return kExitConfig;
  }
}

std::unique_ptr<ModelBackend> make_backend(const TaskConfig& config, const EnvLookup& env) {
  if (config.backend.kind == "scripted") {
    if (config.backend.bank.empty() && config.backend.variant_banks.empty())
      throw Error(ErrorCode::InvalidConfig, "scripted backend needs backend.bank");
    ScriptedBank bank;
    if (!config.backend.bank.empty()) bank = ScriptedBank::load(config.backend.bank);
    for (const auto& [variant, path] : config.backend.variant_banks) bank.merge(ScriptedBank::load(path), variant);
    return std::make_unique<ScriptedBackend>(std::move(bank));
  }
  if (config.backend.kind == "http") {
    const auto key = env(kApiKeyEnv);
    if (!key || key->empty())
      throw Error(ErrorCode::BackendUnavailable, std::string(kApiKeyEnv) + " is not set; the http backend needs it");
    HttpBackendOptions opts;
    opts.base_url = config.backend.base_url;
    opts.api_key = *key;
    opts.max_in_flight = config.backend.max_in_flight;
    opts.request_timeout = std::chrono::seconds(config.backend.request_timeout_s);
    return std::make_unique<HttpBackend>(std::move(opts));
  }
  throw Error(ErrorCode::InvalidConfig, "unknown backend kind '" + config.backend.kind + "'");
}

namespace {

struct Flags {
  std::string config;
  std::string variant;
  std::string variants;
  std::string backend;
  std::string model;
  std::optional<int> workers;
  std::string out;
  bool strict = false;
  bool allow_partial = false;
  std::string allowlist;
  std::string baseline_mutants;
  std::string ground_truth;
  std::string coverage_map;
  std::string symbols;
  std::string candidates;
  std::string bank;
  std::string records;
};

void add_run_flags(CLI::App& cmd, Flags& f, bool config_required) {
  auto* c = cmd.add_option("--config", f.config, "Config file (.toml or .json)");
  if (config_required) c->required();
  cmd.add_option("--variant", f.variant, "Prompt variant: Default, NLOnly, ExOnly, BadEx");
  cmd.add_option("--backend", f.backend, "Backend kind: scripted or http");
  cmd.add_option("--model", f.model, "Model id sent to the backend");
  cmd.add_option("--workers", f.workers, "Worker threads");
  cmd.add_option("--out", f.out, "Output directory");
  cmd.add_flag("--strict", f.strict, "Abort on the first failed model call");
  cmd.add_flag("--allow-partial", f.allow_partial, "Exit 0 even when records are incomplete");
  cmd.add_option("--allowlist", f.allowlist, "path:line rows restricting mutation instances");
  cmd.add_option("--baseline-mutants", f.baseline_mutants, "CSV path,line,mutated_line");
  cmd.add_option("--ground-truth", f.ground_truth, "JSON array of ground-truth oracles");
  cmd.add_option("--coverage-map", f.coverage_map, "Baseline coverage CSV method_id,path,line,covered");
  cmd.add_option("--symbols", f.symbols, "JSON map of simple to qualified names");
  cmd.add_option("--candidates", f.candidates, "Method ids to process, one per line");
  cmd.add_option("--bank", f.bank, "Scripted completion bank");
}

PromptVariant variant_flag(const std::string& s) {
  const auto v = parse_variant(s);
  if (!v) throw Error(ErrorCode::InvalidConfig, "unknown prompt variant '" + s + "'");
  return *v;
}

// Flags win over environment, environment over the file.
TaskConfig resolve_config(const Flags& f, std::optional<ToolTask> task, const EnvLookup& env) {
  TaskConfig c = load_config(f.config);
  if (task) c.task = *task;
  apply_env(c, env);
  if (!f.variant.empty()) c.variant = variant_flag(f.variant);
  if (!f.variants.empty()) {
    c.ablation_variants.clear();
    for (const auto& v : text::split(f.variants, ','))
      if (!text::is_blank(v)) c.ablation_variants.push_back(variant_flag(std::string(text::trim(v))));
  }
  if (!f.backend.empty()) c.backend.kind = f.backend;
  if (!f.model.empty()) c.backend.model_id = f.model;
  if (f.workers) c.workers = *f.workers;
  if (!f.out.empty()) c.out_dir = f.out;
  if (f.strict) c.strict = true;
  if (f.allow_partial) c.allow_partial = true;
  const std::pair<const std::string*, std::string*> paths[] = {
      {&f.allowlist, &c.allowlist},       {&f.baseline_mutants, &c.baseline_mutants},
      {&f.ground_truth, &c.ground_truth}, {&f.coverage_map, &c.coverage_map},
      {&f.symbols, &c.symbols},           {&f.candidates, &c.candidates},
      {&f.bank, &c.backend.bank}};
  for (const auto& [from, to] : paths)
    if (!from->empty()) *to = *from;
  validate(c);
  return c;
}

std::size_t count_incomplete(const std::vector<RunRecord>& records) {
  std::size_t n = 0;
  for (const auto& r : records) n += r.incomplete ? 1 : 0;
  return n;
}

int finish(const TaskConfig& c, const std::vector<RunRecord>& records, std::ostream& out, std::ostream& err) {
  const std::size_t incomplete = count_incomplete(records);
  out << "wrote " << (fs::path(c.out_dir) / "report.md").string() << " (" << records.size() << " records)\n";
  if (incomplete && !c.allow_partial) {
    err << "error: " << incomplete << " record(s) incomplete after failed model calls\n";
    return kExitBackend;
  }
  return kExitOk;
}

int run_task(const Flags& f, ToolTask task, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  const TaskConfig c = resolve_config(f, task, env);
  const auto backend = make_backend(c, env);
  const auto corpus = load_corpus(c.corpus, c.base_dir);
  const ReportInputs inputs = load_report_inputs(c);
  fs::create_directories(c.out_dir);

  std::vector<RunRecord> records;
  try {
    records = run_pipeline(c, corpus, *backend);
  } catch (const PipelineAborted& e) {
    save_records({c.task, c.variant, e.partial()}, (fs::path(c.out_dir) / "records.json").string());
    throw;
  }
  save_records({c.task, c.variant, records}, (fs::path(c.out_dir) / "records.json").string());
  emit_all_formats(build_report(c.task, c.variant, records, inputs), c.out_dir);
  return finish(c, records, out, err);
}

int run_ablate(const Flags& f, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  const TaskConfig c = resolve_config(f, std::nullopt, env);
  const auto backend = make_backend(c, env);
  const auto corpus = load_corpus(c.corpus, c.base_dir);
  const ReportInputs inputs = load_report_inputs(c);
  fs::create_directories(c.out_dir);

  const auto results = run_ablation(c, corpus, *backend, c.ablation_variants, inputs);
  std::vector<RunRecord> all;
  for (const auto& r : results) {
    const fs::path dir = fs::path(c.out_dir) / std::string(to_string(r.variant));
    fs::create_directories(dir);
    save_records({c.task, r.variant, r.records}, (dir / "records.json").string());
    emit_all_formats(build_report(c.task, r.variant, r.records, inputs), dir);
    all.insert(all.end(), r.records.begin(), r.records.end());
  }
  Report report;
  report.tables.push_back(ablation_table(results));
  emit_all_formats(report, c.out_dir);
  return finish(c, all, out, err);
}

int run_report(const Flags& f, std::ostream& out, const EnvLookup& env) {
  if (f.records.empty()) throw Error(ErrorCode::InvalidConfig, "report needs --records");
  const RecordSet set = load_records(f.records);
  TaskConfig c;
  if (!f.config.empty()) c = resolve_config(f, set.task, env);
  const std::pair<const std::string*, std::string*> paths[] = {{&f.baseline_mutants, &c.baseline_mutants},
                                                               {&f.ground_truth, &c.ground_truth},
                                                               {&f.coverage_map, &c.coverage_map}};
  for (const auto& [from, to] : paths)
    if (!from->empty()) *to = *from;
  const fs::path dir = !f.out.empty() ? fs::path(f.out) : fs::path(f.records).parent_path();
  emit_all_formats(build_report(set.task, set.variant, set.records, load_report_inputs(c)), dir);
  out << "wrote " << (dir / "report.md").string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app{"promptforge: code mutation, oracle extraction and test generation from one completion model"};
  app.name("promptforge");
  app.require_subcommand(1);

  Flags f;
  auto* mutate = app.add_subcommand("mutate", "Generate mutants for code lines");
  auto* oracle = app.add_subcommand("oracle", "Extract equivalence oracles from method comments");
  auto* testgen = app.add_subcommand("testgen", "Generate unit tests with a temperature sweep");
  auto* ablate = app.add_subcommand("ablate", "Run the configured task once per prompt variant");
  auto* report = app.add_subcommand("report", "Rebuild a report from stored records");
  for (auto* cmd : {mutate, oracle, testgen, ablate}) add_run_flags(*cmd, f, true);
  ablate->add_option("--variants", f.variants, "Comma separated variants (default: all four)");
  add_run_flags(*report, f, false);
  report->add_option("--records", f.records, "records.json written by an earlier run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  try {
    if (mutate->parsed()) return run_task(f, ToolTask::Mutation, out, err, env);
    if (oracle->parsed()) return run_task(f, ToolTask::OracleGen, out, err, env);
    if (testgen->parsed()) return run_task(f, ToolTask::TestGen, out, err, env);
    if (ablate->parsed()) return run_ablate(f, out, err, env);
    return run_report(f, out, env);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace promptforge
