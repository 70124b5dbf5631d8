#include "promptforge/mutation.hpp"

#include <algorithm>
#include <regex>

#include "promptforge/error.hpp"
#include "promptforge/lexer.hpp"
#include "promptforge/text.hpp"

namespace promptforge {

std::string_view to_string(MutantClass c) {
  switch (c) {
    case MutantClass::DeleteStatement: return "DeleteStatement";
    case MutantClass::ReplaceOperator: return "ReplaceOperator";
    case MutantClass::ReplaceValue: return "ReplaceValue";
    case MutantClass::Other: return "Other";
  }
  return "?";
}

std::optional<MutantClass> parse_mutant_class(std::string_view s) {
  for (auto c : {MutantClass::DeleteStatement, MutantClass::ReplaceOperator,
                 MutantClass::ReplaceValue, MutantClass::Other})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::vector<MutantSuggestion> parse_mutation_completion(std::string_view completion) {
  static const std::regex kEntry(R"(^\s*-\s*(.*?)\s*\|==>\s*(.*?)\s*$)");

  if (const auto marker = completion.find("[[Code]]"); marker != std::string_view::npos)
    completion = completion.substr(0, marker);

  std::vector<MutantSuggestion> out;
  for (std::string_view line : text::split_lines(completion)) {
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(line.begin(), line.end(), m, kEntry)) continue;
    MutantSuggestion s{m[1].str(), m[2].str(), std::string(line)};
    if (s.original_fragment.empty() || s.original_fragment == s.replacement) continue;
    out.push_back(std::move(s));
  }
  return out;
}

std::optional<std::string> apply_suggestion(std::string_view line, const MutantSuggestion& s) {
  const auto pos = line.find(s.original_fragment);
  if (pos == std::string_view::npos) return std::nullopt;
  std::string out(line.substr(0, pos));
  out += s.replacement;
  out += line.substr(pos + s.original_fragment.size());
  return out;
}

bool is_noop_statement(std::string_view line) {
  line = text::trim(line);
  if (line.empty() || line == ";") return true;
  if (text::starts_with(line, "//")) return true;
  if (text::starts_with(line, "/*") && text::ends_with(line, "*/") &&
      line.find("*/") == line.size() - 2)
    return true;
  return text::remove_whitespace(line) == "{}";
}

MutantClass classify_mutant(std::string_view original_line, std::string_view mutated_line) {
  if (is_noop_statement(mutated_line)) return MutantClass::DeleteStatement;

  const auto a = tokenize(original_line);
  const auto b = tokenize(mutated_line);
  std::size_t prefix = 0;
  while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
         a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix])
    ++suffix;

  if (a.size() - prefix - suffix != 1 || b.size() - prefix - suffix != 1) return MutantClass::Other;
  const Token& from = a[prefix];
  const Token& to = b[prefix];
  if (from.kind == TokenKind::Operator && to.kind == TokenKind::Operator)
    return MutantClass::ReplaceOperator;
  if (is_value(from.kind) && is_value(to.kind)) return MutantClass::ReplaceValue;
  return MutantClass::Other;
}

int count_tokens_changed(std::string_view original_line, std::string_view mutated_line) {
  const auto a = tokenize(original_line);
  const auto b = tokenize(mutated_line);
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

MutantKey mutant_key(std::string path, std::size_t line, std::string_view mutated_line) {
  return {std::move(path), line, text::collapse_whitespace(mutated_line)};
}

double compute_overlap(const std::set<MutantKey>& generated, const std::set<MutantKey>& baseline) {
  if (generated.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& key : generated) hits += baseline.count(key);
  return static_cast<double>(hits) / static_cast<double>(generated.size());
}

std::set<MutantKey> parse_baseline_mutants(const std::string& csv) {
  std::set<MutantKey> out;
  std::size_t row = 0;
  for (std::string_view line : text::split_lines(csv)) {
    ++row;
    if (text::is_blank(line)) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos)
      throw Error(ErrorCode::InvalidConfig, "baseline mutant row " + std::to_string(row) + " needs 3 fields");
    const std::string_view path = text::trim(line.substr(0, c1));
    const std::string line_field(text::trim(line.substr(c1 + 1, c2 - c1 - 1)));
    if (row == 1 && path == "path") continue;
    std::string mutated(line.substr(c2 + 1));
    if (mutated.size() >= 2 && mutated.front() == '"' && mutated.back() == '"') {
      const auto fields = text::parse_csv_record(mutated);
      if (fields.size() == 1) mutated = fields[0];
    }
    std::size_t line_no = 0;
    try {
      line_no = std::stoul(line_field);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "baseline mutant row " + std::to_string(row) + " has a bad line number");
    }
    out.insert(mutant_key(std::string(path), line_no, mutated));
  }
  return out;
}

}  // namespace promptforge
