#include "promptforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "promptforge/text.hpp"

namespace promptforge {

namespace fs = std::filesystem;

namespace {

std::string project_of(const TaskConfig& config, const std::string& path) {
  if (!config.project.empty()) return config.project;
  const auto slash = path.find('/');
  return slash == std::string::npos ? std::string() : path.substr(0, slash);
}

std::set<std::string> read_name_list(const std::string& path) {
  std::set<std::string> out;
  for (std::string_view row : text::split_lines(text::read_file(path))) {
    row = text::trim(row);
    if (!row.empty() && row.front() != '#') out.emplace(row);
  }
  return out;
}

ExampleBank bank_for(const TaskConfig& config) {
  return config.example_bank.empty() ? default_example_bank(config.task) : load_example_bank(config.example_bank);
}

std::string file_name_of(const std::string& path) { return fs::path(path).filename().string(); }

MethodExtraction methods_of(const SourceUnit& unit, const AdapterSpec& spec) {
  return spec.extract_cmd.empty() ? extract_methods(unit) : extract_methods_external(unit, spec);
}

// ---------------------------------------------------------------------------

class MutationTool final : public Tool {
 public:
  explicit MutationTool(const TaskConfig& config)
      : adapter_(config.adapter),
        template_(make_mutation_template(bank_for(config), config.temperature.value_or(0.2),
                                         config.max_tokens.value_or(256))) {
    if (!config.allowlist.empty()) allowlist_ = parse_allowlist(text::read_file(config.allowlist));
  }

  ToolTask task() const override { return ToolTask::Mutation; }
  const PromptTemplate& prompt_template() const override { return *template_; }

  Extraction extract(const SourceUnit& unit) const override {
    Extraction out;
    for (auto& inst : extract_lines(unit))
      if (!allowlist_ || allowlist_->count({inst.path, inst.line})) out.instances.push_back(std::move(inst));
    return out;
  }

  void post_process(RunRecord& record, const SourceUnit& unit) const override {
    record.artifacts.clear();
    record.discards.clear();
    const Instance& inst = record.instance;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < record.raw_completions.size(); ++i) {
      const int index = static_cast<int>(i);
      const std::string& raw = record.raw_completions[i];
      const auto suggestions = parse_mutation_completion(raw);
      if (suggestions.empty()) {
        record.discards.push_back({raw, "no mutation parsed", index});
        continue;
      }
      for (const auto& s : suggestions) {
        const auto mutated = apply_suggestion(inst.payload, s);
        if (!mutated) {
          record.discards.push_back({s.raw_line, "fragment not found", index});
          continue;
        }
        const std::string line = std::string(text::trim(*mutated));
        if (!seen.insert(text::collapse_whitespace(line)).second) {
          record.discards.push_back({s.raw_line, "duplicate mutant", index});
          continue;
        }
        const CompileResult verdict = compile_check(mutated_unit(unit, inst, line), adapter_, file_name_of(unit.path));
        if (!verdict.ok) {
          record.discards.push_back({line, kDiscardNoCompile, index});
          continue;
        }
        Mutant m;
        m.instance_id = inst.id;
        m.path = inst.path;
        m.line = inst.line;
        m.original_line = inst.payload;
        m.mutated_line = line;
        m.compiles = true;
        m.mutant_class = classify_mutant(inst.payload, line);
        m.tokens_changed = count_tokens_changed(inst.payload, line);
        m.completion_index = index;
        record.artifacts.emplace_back(std::move(m));
      }
    }
  }

 private:
  static std::string mutated_unit(const SourceUnit& unit, const Instance& inst, const std::string& mutated) {
    std::string out;
    std::size_t n = 0;
    for (std::string_view line : text::split_lines(unit.text)) {
      if (++n == inst.line) {
        const auto at = line.find(inst.payload);
        std::string replaced(line);
        if (at != std::string_view::npos) replaced.replace(at, inst.payload.size(), mutated);
        else replaced = mutated;
        out += replaced;
      } else {
        out.append(line);
      }
      out.push_back('\n');
    }
    return out;
  }

  AdapterSpec adapter_;
  std::unique_ptr<PromptTemplate> template_;
  std::optional<LineAllowlist> allowlist_;
};

// ---------------------------------------------------------------------------

class OracleTool final : public Tool {
 public:
  explicit OracleTool(const TaskConfig& config)
      : config_(config),
        adapter_(config.adapter),
        template_(make_oracle_template(bank_for(config), config.temperature.value_or(0.0),
                                       config.max_tokens.value_or(256))) {
    if (!config.symbols.empty()) symbols_ = parse_symbol_map(text::read_file(config.symbols));
    if (!config.candidates.empty()) candidates_ = read_name_list(config.candidates);
  }

  ToolTask task() const override { return ToolTask::OracleGen; }
  const PromptTemplate& prompt_template() const override { return *template_; }

  Extraction extract(const SourceUnit& unit) const override {
    Extraction out;
    const MethodExtraction found = methods_of(unit, adapter_);
    if (found.unbalanced_braces) out.failure = "unbalanced braces: " + *found.unbalanced_braces;
    for (const auto& m : found.methods) {
      if (!m.doc_comment || text::is_blank(*m.doc_comment)) continue;
      const std::string id = m.method_id();
      if (candidates_ ? !candidates_->count(id) : !has_oracle_candidate_sentence(*m.doc_comment)) continue;
      Instance inst;
      inst.id = id;
      inst.task = ToolTask::OracleGen;
      inst.payload = *m.doc_comment;
      inst.context = {{"signature", m.signature}, {"method_id", id}, {"path", unit.path},
                      {"class_name", m.class_name}, {"project", project_of(config_, unit.path)}};
      inst.path = unit.path;
      inst.line = m.line;
      inst.offset = m.byte_range.first;
      out.instances.push_back(std::move(inst));
    }
    return out;
  }

  void post_process(RunRecord& record, const SourceUnit&) const override {
    record.artifacts.clear();
    record.discards.clear();
    for (std::size_t i = 0; i < record.raw_completions.size(); ++i) {
      const int index = static_cast<int>(i);
      const std::string& raw = record.raw_completions[i];
      auto spec = parse_oracle_completion(raw);
      if (!spec) {
        record.discards.push_back({raw, "no oracle emitted", index});
        continue;
      }
      spec->method_id = record.instance.context.at("method_id");
      spec->completion_index = index;
      spec = expand_names(std::move(*spec), symbols_);
      if (!adapter_.oracle_template.empty()) {
        const auto verdict = compile_check(render_oracle_check(adapter_.oracle_template, *spec), adapter_,
                                           "OracleCheck." + adapter_.extension);
        if (!verdict.ok) {
          record.discards.push_back({serialize(*spec), kDiscardNoCompile, index});
          continue;
        }
      }
      record.artifacts.emplace_back(std::move(*spec));
    }
  }

 private:
  TaskConfig config_;
  AdapterSpec adapter_;
  std::unique_ptr<PromptTemplate> template_;
  std::map<std::string, std::string> symbols_;
  std::optional<std::set<std::string>> candidates_;
};

// ---------------------------------------------------------------------------

class TestgenTool final : public Tool {
 public:
  explicit TestgenTool(const TaskConfig& config)
      : config_(config),
        template_(make_testgen_template(bank_for(config), config.max_tokens.value_or(512), config.example_selection)) {
    if (!config.candidates.empty()) candidates_ = read_name_list(config.candidates);
  }

  ToolTask task() const override { return ToolTask::TestGen; }
  const PromptTemplate& prompt_template() const override { return *template_; }

  Extraction extract(const SourceUnit& unit) const override {
    Extraction out;
    const MethodExtraction found = methods_of(unit, config_.adapter);
    if (found.unbalanced_braces) out.failure = "unbalanced braces: " + *found.unbalanced_braces;
    for (const auto& m : found.methods) {
      if (m.name.empty() || m.name == m.class_name) continue;  // constructors are not tested directly
      const std::string id = m.method_id();
      if (candidates_ && !candidates_->count(id)) continue;
      Instance inst;
      inst.id = id;
      inst.task = ToolTask::TestGen;
      inst.payload = m.signature + " " + m.body;
      inst.context = {{"signature", m.short_signature()},
                      {"helpers", text::join(select_helpers(m), "\n")},
                      {"method_id", id},
                      {"class_name", m.class_name},
                      {"path", unit.path},
                      {"project", project_of(config_, unit.path)}};
      inst.path = unit.path;
      inst.line = m.line;
      inst.offset = m.byte_range.first;
      out.instances.push_back(std::move(inst));
    }
    return out;
  }

  std::vector<PromptBundle> build_prompts(const Instance& instance, PromptVariant variant) const override {
    const PromptBundle base = assemble_prompt(*template_, instance, variant, config_.context_budget);
    std::vector<PromptBundle> out;
    for (const double t : config_.schedule.grid()) {
      for (int q = 0; q < config_.schedule.queries_per_temperature; ++q) {
        PromptBundle b = base;
        b.temperature = t;
        b.query_index = q;
        out.push_back(std::move(b));
      }
    }
    return out;
  }

  void post_process(RunRecord& record, const SourceUnit& unit) const override {
    record.artifacts.clear();
    record.discards.clear();
    record.coverage.reset();

    std::vector<TestCandidate> parsed;
    for (std::size_t i = 0; i < record.raw_completions.size(); ++i) {
      const std::string& raw = record.raw_completions[i];
      auto c = parse_test_completion(raw);
      if (!c) {
        record.discards.push_back({raw, "unterminated test", static_cast<int>(i)});
        continue;
      }
      if (i < record.prompts.size()) {
        c->temperature = record.prompts[i].temperature;
        c->query_index = record.prompts[i].query_index;
      }
      c->completion_index = static_cast<int>(i);
      parsed.push_back(std::move(*c));
    }

    const auto unique = dedup(parsed);
    if (unique.size() != parsed.size()) {
      std::set<int> kept;
      for (const auto& c : unique) kept.insert(c.completion_index);
      for (const auto& c : parsed)
        if (!kept.count(c.completion_index)) record.discards.push_back({c.body, "duplicate test", c.completion_index});
    }

    const fs::path dir = fs::path(config_.out_dir) / sanitize_for_path(record.instance.id);
    std::vector<fs::path> files;
    for (auto c : unique) {
      const std::string unit_text = inject_into_template(c, config_.adapter.test_class_template);
      const std::string class_name = injected_class_name(c, config_.adapter.test_class_template);
      const auto verdict = compile_check(unit_text, config_.adapter, class_name + "." + config_.adapter.extension);
      if (!verdict.ok) {
        record.discards.push_back({c.body, kDiscardNoCompile, c.completion_index});
        continue;
      }
      c.compiles = true;
      fs::create_directories(dir);
      const fs::path file = dir / ("t" + text::fixed(c.temperature, 1) + "_q" + std::to_string(c.query_index) + "." +
                                   config_.adapter.extension);
      text::write_file(file.string(), unit_text);
      files.push_back(file);
      record.artifacts.emplace_back(std::move(c));
    }

    if (!config_.adapter.coverage_cmd.empty()) record.coverage = run_coverage(files, config_.adapter).restricted_to(unit.path);
  }

 private:
  TaskConfig config_;
  std::unique_ptr<PromptTemplate> template_;
  std::optional<std::set<std::string>> candidates_;
};

// ---------------------------------------------------------------------------

RunRecord extraction_failure(const SourceUnit& unit, const std::string& reason, ToolTask task) {
  RunRecord r;
  r.instance.id = unit.path + ":!extract";
  r.instance.task = task;
  r.instance.payload = reason;
  r.instance.path = unit.path;
  r.instance.offset = unit.text.size();
  r.discards.push_back({"", std::string(kDiscardExtraction) + ": " + reason, -1});
  return r;
}

bool is_fatal(ErrorCode code, bool strict) {
  return code == ErrorCode::AdapterFailure || code == ErrorCode::UnparseableReport ||
         code == ErrorCode::BadTemplate || (strict && code == ErrorCode::BackendUnavailable);
}

}  // namespace

std::vector<PromptBundle> Tool::build_prompts(const Instance& instance, PromptVariant variant) const {
  return {assemble_prompt(prompt_template(), instance, variant)};
}

std::vector<std::string> registered_tools() { return {"mutate", "oracle", "testgen"}; }

std::unique_ptr<Tool> make_tool(const TaskConfig& config) {
  switch (config.task) {
    case ToolTask::Mutation: return std::make_unique<MutationTool>(config);
    case ToolTask::OracleGen: return std::make_unique<OracleTool>(config);
    case ToolTask::TestGen: return std::make_unique<TestgenTool>(config);
  }
  throw Error(ErrorCode::InvalidConfig, "no tool registered for the task");
}

std::string sanitize_for_path(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-' || c == '$';
    out.push_back(keep ? c : '_');
  }
  return out;
}

std::vector<RunRecord> run_pipeline(const TaskConfig& config, const std::vector<SourceUnit>& corpus,
                                    ModelBackend& backend) {
  return run_pipeline(config, corpus, backend, config.variant);
}

std::vector<RunRecord> run_pipeline(const TaskConfig& config, const std::vector<SourceUnit>& corpus,
                                    ModelBackend& backend, PromptVariant variant) {
  if (corpus.empty()) throw Error(ErrorCode::InvalidCorpus, "corpus is empty");
  {
    std::set<std::string> paths;
    for (const auto& u : corpus)
      if (!paths.insert(u.path).second) throw Error(ErrorCode::InvalidCorpus, "duplicate corpus path " + u.path);
  }
  const auto tool = make_tool(config);

  // Step 1: extraction.
  struct Job {
    Instance instance;
    const SourceUnit* unit;
  };
  std::vector<Job> jobs;
  std::vector<RunRecord> failures;
  for (const auto& unit : corpus) {
    Extraction ex = tool->extract(unit);
    for (auto& inst : ex.instances) jobs.push_back({std::move(inst), &unit});
    if (ex.failure) failures.push_back(extraction_failure(unit, *ex.failure, config.task));
  }
  std::map<std::string, int> seen;
  for (auto& job : jobs)
    if (const int n = ++seen[job.instance.id]; n > 1) job.instance.id += "#" + std::to_string(n);

  // Steps 2 and 3 run per instance on a bounded worker pool.
  std::vector<std::optional<RunRecord>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex error_mutex;
  std::optional<Error> fatal;

  auto process = [&](const Job& job) {
    RunRecord rec;
    rec.instance = job.instance;
    try {
      rec.prompts = tool->build_prompts(job.instance, variant);
    } catch (const Error& e) {
      if (is_fatal(e.code(), config.strict)) throw;
      rec.prompts.clear();
      rec.discards.push_back({"", std::string("prompt assembly failed: ") + e.what(), -1});
      return rec;
    }
    for (const auto& p : rec.prompts) {
      if (stop) break;
      ModelRequest req;
      req.model_id = config.backend.model_id;
      req.prompt = p.text;
      req.temperature = p.temperature;
      req.max_tokens = p.max_tokens;
      req.stop = p.stop_sequences;
      req.key = {job.instance.id, variant, p.temperature, p.query_index};
      try {
        ModelResponse resp = backend.complete(req);
        if (resp.finish_reason == FinishReason::Error) rec.incomplete = true;
        rec.raw_completions.push_back(std::move(resp.text));
      } catch (const Error& e) {
        if (is_fatal(e.code(), config.strict)) throw;
        if (e.code() != ErrorCode::BackendUnavailable && e.code() != ErrorCode::MalformedResponse) throw;
        rec.incomplete = true;
        rec.raw_completions.emplace_back();
      }
    }
    tool->post_process(rec, *job.unit);
    return rec;
  };

  auto worker = [&] {
    for (;;) {
      if (stop) return;
      const std::size_t i = next++;
      if (i >= jobs.size()) return;
      try {
        results[i] = process(jobs[i]);
      } catch (const Error& e) {
        std::lock_guard lock(error_mutex);
        if (!fatal) fatal = e;
        stop = true;
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!fatal) fatal = Error(ErrorCode::IOFailure, e.what());
        stop = true;
      }
    }
  };

  const std::size_t n_workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(config.workers, 1)), 1,
                                                        std::max<std::size_t>(jobs.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<RunRecord> records = std::move(failures);
  for (auto& r : results)
    if (r) records.push_back(std::move(*r));
  std::stable_sort(records.begin(), records.end(),
                   [](const RunRecord& a, const RunRecord& b) { return instance_order(a.instance, b.instance); });
  if (fatal) throw PipelineAborted(fatal->code(), fatal->what(), std::move(records));
  return records;
}

void reprocess(const Tool& tool, std::vector<RunRecord>& records, const std::vector<SourceUnit>& corpus) {
  std::map<std::string, const SourceUnit*> by_path;
  for (const auto& u : corpus) by_path[u.path] = &u;
  for (auto& r : records) {
    if (r.prompts.empty()) continue;
    const auto it = by_path.find(r.instance.path);
    if (it == by_path.end()) throw Error(ErrorCode::InvalidCorpus, "record refers to unknown unit " + r.instance.path);
    tool.post_process(r, *it->second);
  }
}

}  // namespace promptforge
