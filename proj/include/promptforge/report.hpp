#pragma once

// Evaluation tables and their JSON / CSV / markdown renderings.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "promptforge/mutation.hpp"
#include "promptforge/oracle.hpp"
#include "promptforge/pipeline.hpp"
#include "promptforge/testgen.hpp"

namespace promptforge {

enum class CellKind { Text, Integer, Percent, Ratio, Missing };

/// Percent holds a fraction in [0,1] and renders with one decimal; Ratio
/// renders with two decimals.
struct Cell {
  CellKind kind = CellKind::Missing;
  std::string text;
  double value = 0.0;

  static Cell of_text(std::string s) { return {CellKind::Text, std::move(s), 0.0}; }
  static Cell integer(long long v) { return {CellKind::Integer, {}, static_cast<double>(v)}; }
  static Cell percent(double fraction) { return {CellKind::Percent, {}, fraction}; }
  static Cell ratio(double v) { return {CellKind::Ratio, {}, v}; }
  static Cell missing() { return {}; }

  bool operator==(const Cell&) const = default;
};

struct Table {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Report {
  std::vector<Table> tables;
};

enum class ReportFormat { Json, Csv, Markdown };
std::optional<ReportFormat> parse_report_format(std::string_view s);
std::string_view extension(ReportFormat format);

/// Cell value as printed in CSV and JSON ("18.4", "0.60", "12", text, or "").
std::string render_cell_plain(const Cell& cell);

std::string render_report(const Report& report, ReportFormat format);
/// Throws Error(IOFailure).
void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& file);
/// Writes report.json, report.csv and report.md into `dir`.
void emit_all_formats(const Report& report, const std::filesystem::path& dir, const std::string& stem = "report");

// ---------------------------------------------------------------------------
// Mutation

struct MutationStats {
  std::size_t total = 0;       // applied mutants, compiling or not
  std::size_t compilable = 0;  // mutants that passed the compile check
  std::optional<double> overlap;
  std::map<MutantClass, std::size_t> classes;  // over compilable mutants
  double mean_tokens_changed = 0.0;
};

/// Overlap is computed only when a baseline is given.
MutationStats mutation_stats(const std::vector<RunRecord>& records, const std::set<MutantKey>* baseline);
Table mutation_table(const std::vector<std::pair<std::string, MutationStats>>& rows);

// ---------------------------------------------------------------------------
// Oracles

std::vector<OracleSpec> collect_oracles(const std::vector<RunRecord>& records);
Table oracle_table(const OracleScore& score);
Table near_miss_table(const OracleScore& score);

// ---------------------------------------------------------------------------
// Test generation

/// Baseline coverage file rows: method_id,path,line,covered (quoted as CSV).
std::map<std::string, CoverageMap> parse_method_coverage_csv(const std::string& csv);

struct MethodCoverageRow {
  std::string project;
  std::string method;  // signature shown in the table
  CoverageTable table;
};

std::vector<MethodCoverageRow> testgen_rows(const std::vector<RunRecord>& records,
                                            const std::map<std::string, CoverageMap>* baseline);
/// Per-method rows plus a Total row (CT summed, TS test-weighted mean, LC
/// over the pooled instrumented lines).
Table testgen_table(const std::vector<MethodCoverageRow>& rows, bool with_baseline);

/// Pooled line coverage over all methods: (covered, instrumented).
std::pair<std::size_t, std::size_t> pooled_coverage(const std::vector<RunRecord>& records);

// ---------------------------------------------------------------------------

/// Evaluation inputs a report may use.
struct ReportInputs {
  std::optional<std::set<MutantKey>> baseline_mutants;
  std::optional<std::vector<GroundTruthOracle>> ground_truth;
  std::optional<std::map<std::string, CoverageMap>> baseline_coverage;
};

ReportInputs load_report_inputs(const TaskConfig& config);

/// Report for one task run; a pure function of the records and inputs.
Report build_report(ToolTask task, PromptVariant variant, const std::vector<RunRecord>& records,
                    const ReportInputs& inputs);

/// Row label used for a variant ("FSLM", "FSLM (NL-only)", ...).
std::string variant_label(PromptVariant variant);

}  // namespace promptforge
