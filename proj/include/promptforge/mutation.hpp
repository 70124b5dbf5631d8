#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace promptforge {

/// One `- <orig> |==> <repl>` entry of a mutation completion.
struct MutantSuggestion {
  std::string original_fragment;
  std::string replacement;
  std::string raw_line;

  bool operator==(const MutantSuggestion&) const = default;
};

enum class MutantClass { DeleteStatement, ReplaceOperator, ReplaceValue, Other };

std::string_view to_string(MutantClass c);
std::optional<MutantClass> parse_mutant_class(std::string_view s);

struct Mutant {
  std::string instance_id;
  std::string path;
  std::size_t line = 0;
  std::string original_line;
  std::string mutated_line;
  bool compiles = false;
  MutantClass mutant_class = MutantClass::Other;
  int tokens_changed = 0;
  /// Index of the raw completion this mutant was parsed from.
  int completion_index = 0;

  bool operator==(const Mutant&) const = default;
};

/// Collects every `- orig |==> repl` line up to the first `[[Code]]` marker.
/// Entries whose fragments are equal after trimming are dropped.
std::vector<MutantSuggestion> parse_mutation_completion(std::string_view completion);

/// Replaces the leftmost occurrence of the fragment; nullopt when absent.
std::optional<std::string> apply_suggestion(std::string_view line, const MutantSuggestion& s);

/// True for an empty line or a statement that does nothing (";", "{}", or a
/// lone comment).
bool is_noop_statement(std::string_view line);

MutantClass classify_mutant(std::string_view original_line, std::string_view mutated_line);

/// Levenshtein distance over token sequences (unit costs).
int count_tokens_changed(std::string_view original_line, std::string_view mutated_line);

/// (path, line, whitespace-collapsed mutated line)
using MutantKey = std::tuple<std::string, std::size_t, std::string>;

MutantKey mutant_key(std::string path, std::size_t line, std::string_view mutated_line);

/// |generated ∩ baseline| / |generated|, 0 for an empty generated set.
double compute_overlap(const std::set<MutantKey>& generated, const std::set<MutantKey>& baseline);

/// Baseline CSV rows `path,line,mutated_line`; an optional `path,...` header
/// is skipped.
std::set<MutantKey> parse_baseline_mutants(const std::string& csv);

}  // namespace promptforge
