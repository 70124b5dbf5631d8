#include "promptforge/ablation.hpp"

#include <filesystem>

namespace promptforge {

std::vector<std::string> headline_names(ToolTask task) {
  switch (task) {
    case ToolTask::Mutation: return {"compilable", "overlap"};
    case ToolTask::OracleGen: return {"f1"};
    case ToolTask::TestGen: return {"line_coverage"};
  }
  return {};
}

namespace {

std::vector<std::string> count_names(ToolTask task) {
  switch (task) {
    case ToolTask::Mutation: return {"instances", "mutants", "compiling_mutants"};
    case ToolTask::OracleGen: return {"instances", "oracles", "correct", "ground_truth"};
    case ToolTask::TestGen: return {"instances", "compiling_tests", "covered_lines", "instrumented_lines"};
  }
  return {};
}

}  // namespace

AblationResult summarize(ToolTask task, PromptVariant variant, std::vector<RunRecord> records,
                         const ReportInputs& inputs) {
  AblationResult r;
  r.task = task;
  r.variant = variant;
  r.raw_counts["instances"] = static_cast<double>(records.size());
  switch (task) {
    case ToolTask::Mutation: {
      const auto s = mutation_stats(records, inputs.baseline_mutants ? &*inputs.baseline_mutants : nullptr);
      r.raw_counts["mutants"] = static_cast<double>(s.total);
      r.raw_counts["compiling_mutants"] = static_cast<double>(s.compilable);
      r.headline.emplace_back("compilable", s.total ? std::optional<double>(static_cast<double>(s.compilable) /
                                                                             static_cast<double>(s.total))
                                                    : std::nullopt);
      r.headline.emplace_back("overlap", s.compilable ? s.overlap : std::nullopt);
      break;
    }
    case ToolTask::OracleGen: {
      const auto oracles = collect_oracles(records);
      r.raw_counts["oracles"] = static_cast<double>(oracles.size());
      if (inputs.ground_truth) {
        const auto score = score_oracles(oracles, *inputs.ground_truth);
        r.raw_counts["correct"] = static_cast<double>(score.total.correct);
        r.raw_counts["ground_truth"] = static_cast<double>(score.total.truths);
        r.headline.emplace_back("f1", score.f1());
      } else {
        r.headline.emplace_back("f1", std::nullopt);
      }
      break;
    }
    case ToolTask::TestGen: {
      std::size_t tests = 0;
      for (const auto& rec : records)
        for (const auto& a : rec.artifacts) tests += std::holds_alternative<TestCandidate>(a) ? 1 : 0;
      const auto [covered, instrumented] = pooled_coverage(records);
      r.raw_counts["compiling_tests"] = static_cast<double>(tests);
      r.raw_counts["covered_lines"] = static_cast<double>(covered);
      r.raw_counts["instrumented_lines"] = static_cast<double>(instrumented);
      r.headline.emplace_back("line_coverage", instrumented ? std::optional<double>(static_cast<double>(covered) /
                                                                                    static_cast<double>(instrumented))
                                                            : std::nullopt);
      break;
    }
  }
  r.records = std::move(records);
  return r;
}

std::vector<AblationResult> run_ablation(const TaskConfig& config, const std::vector<SourceUnit>& corpus,
                                         ModelBackend& backend, const std::vector<PromptVariant>& variants,
                                         const ReportInputs& inputs) {
  if (variants.empty()) throw Error(ErrorCode::InvalidArgument, "ablation needs at least one variant");
  std::vector<AblationResult> out;
  for (const PromptVariant v : variants) {
    TaskConfig per_variant = config;
    per_variant.variant = v;
    per_variant.out_dir = (std::filesystem::path(config.out_dir) / std::string(to_string(v))).string();
    out.push_back(summarize(config.task, v, run_pipeline(per_variant, corpus, backend, v), inputs));
  }
  return out;
}

Table ablation_table(const std::vector<AblationResult>& results) {
  Table t;
  t.title = "Prompt variants";
  t.columns = {"Task", "Variant"};
  const ToolTask task = results.empty() ? ToolTask::Mutation : results.front().task;
  for (const auto& name : headline_names(task)) t.columns.push_back(name);
  for (const auto& name : count_names(task)) t.columns.push_back(name);
  for (const auto& r : results) {
    std::vector<Cell> row{Cell::of_text(std::string(to_string(r.task))), Cell::of_text(variant_label(r.variant))};
    for (const auto& [name, value] : r.headline) {
      if (!value) row.push_back(Cell::missing());
      else if (name == "f1") row.push_back(Cell::ratio(*value));
      else row.push_back(Cell::percent(*value));
    }
    for (const auto& name : count_names(r.task)) {
      const auto it = r.raw_counts.find(name);
      row.push_back(it == r.raw_counts.end() ? Cell::missing() : Cell::integer(static_cast<long long>(it->second)));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace promptforge
