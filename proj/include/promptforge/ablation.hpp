#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "promptforge/pipeline.hpp"
#include "promptforge/report.hpp"

namespace promptforge {

struct AblationResult {
  ToolTask task = ToolTask::Mutation;
  PromptVariant variant = PromptVariant::Default;
  /// mutation: compilable + overlap; oracle: f1; testgen: line_coverage.
  std::vector<std::pair<std::string, std::optional<double>>> headline;
  std::map<std::string, double> raw_counts;
  std::vector<RunRecord> records;
};

/// Headline metric names for a task, in report order.
std::vector<std::string> headline_names(ToolTask task);

AblationResult summarize(ToolTask task, PromptVariant variant, std::vector<RunRecord> records,
                         const ReportInputs& inputs);

/// One pipeline run per variant over the same corpus and backend. Test files
/// of each run go below <out_dir>/<variant>. Throws Error(InvalidArgument)
/// for an empty variant list.
std::vector<AblationResult> run_ablation(const TaskConfig& config, const std::vector<SourceUnit>& corpus,
                                         ModelBackend& backend, const std::vector<PromptVariant>& variants,
                                         const ReportInputs& inputs = {});

/// Variant table with the headline metrics plus the raw counts behind them.
Table ablation_table(const std::vector<AblationResult>& results);

}  // namespace promptforge
