#pragma once

// Everything specific to the target source language lives here: line and
// method extraction with a lightweight C-family scanner, plus compile checks
// and coverage measurement delegated to configurable external commands.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "promptforge/types.hpp"

namespace promptforge {

struct SourceUnit {
  std::string path;
  std::string text;
  std::string language_tag = "java";
};

struct MethodInfo {
  std::string signature;
  std::string body;
  std::optional<std::string> doc_comment;
  std::vector<std::string> helpers;
  std::pair<std::size_t, std::size_t> byte_range{0, 0};

  std::string name;
  std::string class_name;
  std::vector<std::string> parameter_types;
  std::size_t line = 0;

  /// "Class.name(T1,T2)"; the key used for ground-truth matching.
  std::string method_id() const;
  /// Signature without modifiers or throws clause, e.g. "double max()".
  std::string short_signature() const;
};

struct MethodExtraction {
  std::vector<MethodInfo> methods;
  /// Set when the brace scan hit an unbalanced brace; `methods` then holds
  /// what was recovered before the fault.
  std::optional<std::string> unbalanced_braces;
};

struct AdapterSpec {
  /// Command template; {file} is replaced by the quoted path of the unit.
  std::string compile_cmd;
  /// Command template with {tests} (quoted, space separated) and {out}.
  std::string coverage_cmd;
  /// Test class scaffolding containing {TEST_BODY} exactly once.
  std::string test_class_template;
  /// Boolean-context wrapper for oracle expressions: {CONDITION} {LHS} {RHS}.
  std::string oracle_template;
  /// Optional external method extractor; {file} placeholder, JSON on stdout.
  std::string extract_cmd;
  std::string extension = "java";
  int timeout_s = 30;
};

/// Throws Error(InvalidConfig) unless compile_cmd is set and timeout_s >= 1.
void validate(const AdapterSpec& spec);

/// Candidate mutation lines. Blank, comment-only, import/package, annotation,
/// declaration-header and brace/keyword-only lines are skipped.
std::vector<Instance> extract_lines(const SourceUnit& unit);

MethodExtraction extract_methods(const SourceUnit& unit);

/// Runs spec.extract_cmd on the unit and reads a JSON array of
/// {signature, body, doc_comment?, helpers?, byte_range: [start, end],
/// name?, class_name?, parameter_types?, line?}.
MethodExtraction extract_methods_external(const SourceUnit& unit, const AdapterSpec& spec);

/// Position of the '}' matching the '{' at `open` (string literals and
/// comments skipped), or npos.
std::size_t find_matching_brace(std::string_view s, std::size_t open);

/// Strips comment delimiters and leading '*' gutters.
std::string clean_doc_comment(std::string_view raw);

struct CompileResult {
  bool ok = false;
  std::string diagnostics;
};

/// Writes `code` to a fresh temp dir as `file_name`, then runs compile_cmd.
/// ok iff the command exits 0 within the timeout; a timeout reports
/// diagnostics "timeout". Throws Error(AdapterFailure) when the command
/// cannot be launched.
CompileResult compile_check(const std::string& code, const AdapterSpec& spec,
                            const std::string& file_name = "Unit.java");

/// Line coverage keyed by (path, line).
class CoverageMap {
 public:
  void set(const std::string& path, int line, bool covered);

  std::size_t instrumented() const { return lines_.size(); }
  std::size_t covered() const;
  /// covered / instrumented in [0,1]; 0 for an empty map.
  double fraction() const;

  std::set<std::pair<std::string, int>> universe() const;
  std::set<std::pair<std::string, int>> covered_lines() const;
  const std::map<std::pair<std::string, int>, bool>& lines() const { return lines_; }

  /// Rows for `path` only; the full map when `path` has no rows.
  CoverageMap restricted_to(const std::string& path) const;
  CoverageMap with_nothing_covered() const;

  bool operator==(const CoverageMap&) const = default;

 private:
  std::map<std::pair<std::string, int>, bool> lines_;
};

/// Parses `path,line,covered(0|1)` rows. A header row starting with "path"
/// and blank lines are skipped; repeated rows are OR-ed together.
/// Throws Error(UnparseableReport).
CoverageMap parse_coverage_csv(const std::string& csv);
CoverageMap load_coverage_map(const std::string& path);

/// Runs coverage_cmd over the given test files and parses its report.
/// Throws Error(AdapterFailure) when the command is missing or fails and
/// Error(UnparseableReport) when its report is unreadable.
CoverageMap run_coverage(const std::vector<std::filesystem::path>& tests, const AdapterSpec& spec);

/// `path:line` per row.
using LineAllowlist = std::set<std::pair<std::string, std::size_t>>;
LineAllowlist parse_allowlist(const std::string& text);

}  // namespace promptforge
