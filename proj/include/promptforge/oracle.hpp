#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptforge {

/// A metamorphic equivalence `[if (cond) {{ ]lhs <-> rhs[ }}];`.
struct OracleSpec {
  std::optional<std::string> condition;
  std::string lhs;
  std::string rhs;
  std::string method_id;
  int completion_index = 0;

  bool operator==(const OracleSpec&) const = default;
};

struct GroundTruthOracle {
  std::string method_id;
  std::optional<std::string> condition;
  std::string lhs;
  std::string rhs;
  std::string project;
};

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t truths = 0;
};

struct OracleScore {
  PrfScore total;
  std::map<std::string, PrfScore> per_project;
  /// Predictions whose expression pair matches a truth but whose condition differs.
  std::vector<std::pair<OracleSpec, GroundTruthOracle>> near_misses;

  double precision() const { return total.precision; }
  double recall() const { return total.recall; }
  double f1() const { return total.f1; }
};

/// Harmonic mean; 0 when both inputs are 0.
double f1_score(double precision, double recall);

/// Builds a score from raw counts (precision 0 without predictions, recall 0
/// without truths).
PrfScore make_score(std::size_t correct, std::size_t predicted, std::size_t truths);

/// Reads the first `<->` line after a "### Equivalence" marker (or anywhere
/// when the marker is absent). nullopt when there is no well-formed oracle.
std::optional<OracleSpec> parse_oracle_completion(std::string_view completion);

/// `if (c) {{ lhs <-> rhs }};` or `lhs <-> rhs;`.
std::string serialize(const OracleSpec& spec);

/// Replaces unqualified identifiers that key `symbols` with their qualified
/// names in lhs, rhs and condition. Identifiers preceded by '.' and text
/// inside string literals are left alone.
OracleSpec expand_names(OracleSpec spec, const std::map<std::string, std::string>& symbols);
std::string expand_names(std::string_view expr, const std::map<std::string, std::string>& symbols);

/// Whitespace removed, then redundant outer parentheses dropped.
std::string normalize_expression(std::string_view expr);

/// Unordered-pair equality of normalized expressions plus condition equality.
bool match_oracle(const OracleSpec& pred, const GroundTruthOracle& truth);
/// Expression pair matches regardless of condition.
bool pair_matches(const OracleSpec& pred, const GroundTruthOracle& truth);

/// Each prediction matches at most one truth and each truth at most one
/// prediction; predictions are paired in order with the first free match.
/// Per-project rows partition by the truths' project (predictions for
/// methods without any truth go to "(unattributed)").
OracleScore score_oracles(const std::vector<OracleSpec>& preds, const std::vector<GroundTruthOracle>& truths);

/// JSON array of {method_id, condition?, lhs, rhs, project}.
std::vector<GroundTruthOracle> parse_ground_truth(const std::string& json_text);
/// JSON object mapping simple names to qualified names.
std::map<std::string, std::string> parse_symbol_map(const std::string& json_text);

/// Sentence-level heuristic: a sentence containing "equivalent", "same as",
/// "identical to" or "equal to" together with a code-like token.
bool has_oracle_candidate_sentence(std::string_view comment);

/// Fills the adapter's boolean-context template ({CONDITION} {LHS} {RHS}).
std::string render_oracle_check(const std::string& tmpl, const OracleSpec& spec);

}  // namespace promptforge
