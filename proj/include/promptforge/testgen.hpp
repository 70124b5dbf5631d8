#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptforge/adapter.hpp"
#include "promptforge/types.hpp"

namespace promptforge {

/// Temperatures start, start+step, ... up to end (inclusive), each queried
/// queries_per_temperature times. Defaults give 0.0..0.9 x 10 = 100 queries.
struct TemperatureSchedule {
  double start = 0.0;
  double end = 0.9;
  double step = 0.1;
  int queries_per_temperature = 10;

  /// Throws Error(InvalidConfig) for a non-positive step, end < start,
  /// temperatures outside [0,1] or fewer than one query.
  void validate() const;
  std::vector<double> grid() const;
};

/// One request per (temperature, query index), ordered by temperature then index.
std::vector<ModelRequest> schedule_queries(const TemperatureSchedule& schedule, const ModelRequest& base);

struct TestCandidate {
  std::string body;
  double temperature = 0.0;
  int query_index = 0;
  bool compiles = false;
  std::string normalized_hash;
  int completion_index = 0;

  bool operator==(const TestCandidate&) const = default;
};

/// Line comments stripped, whitespace runs collapsed, then SHA-256.
std::string normalized_test_hash(std::string_view body);

/// Scans from the start of the completion to the brace closing the first
/// method body. nullopt when braces never balance or the text before the
/// first '{' is not a method signature.
std::optional<TestCandidate> parse_test_completion(std::string_view completion);

inline constexpr std::string_view kTestBodyPlaceholder = "{TEST_BODY}";

/// Substitutes the body into the template and renames the template's class
/// (or fills {CLASS_NAME}) with a suffix taken from the candidate hash.
/// Throws Error(BadTemplate) unless {TEST_BODY} occurs exactly once.
std::string inject_into_template(const TestCandidate& candidate, const std::string& tmpl);

/// Class name the injected unit declares (for file naming).
std::string injected_class_name(const TestCandidate& candidate, const std::string& tmpl);

/// Keeps the first candidate per normalized hash, preserving order.
std::vector<TestCandidate> dedup(const std::vector<TestCandidate>& candidates);

/// Number of physical lines in a test body.
int test_size_lines(std::string_view body);

/// Helper list for the prompt: zero-argument constructors of the class under
/// test and constructors of parameter types, at most `cap` entries.
std::vector<std::string> select_helpers(const MethodInfo& method, std::size_t cap = 5);

/// Coverage results of one tool on one method.
struct ToolCoverage {
  std::optional<CoverageMap> map;
  std::optional<int> compiling_tests;
  std::optional<int> mean_test_size;
};

struct CoverageRow {
  std::string tool;
  std::optional<int> compiling_tests;
  std::optional<int> mean_test_size;
  std::optional<double> line_coverage;
  std::size_t covered_lines = 0;
};

struct CoverageTable {
  std::vector<CoverageRow> tools;
  std::optional<double> combined;
  std::size_t instrumented = 0;
  std::size_t combined_covered = 0;
};

/// Tools keep their given order. Per-tool LC plus the coverage of the union of covered lines. Tools
/// without a map count as covering nothing. Throws Error(UniverseMismatch)
/// when two maps disagree on the instrumented lines.
CoverageTable coverage_report(const std::vector<std::pair<std::string, ToolCoverage>>& per_tool);

}  // namespace promptforge
