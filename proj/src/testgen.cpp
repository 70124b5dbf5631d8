#include "promptforge/testgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>

#include "promptforge/error.hpp"
#include "promptforge/text.hpp"

namespace promptforge {

void TemperatureSchedule::validate() const {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidConfig, "schedule step must be positive");
  if (end < start) throw Error(ErrorCode::InvalidConfig, "schedule end must not precede start");
  if (start < 0.0 || end > 1.0) throw Error(ErrorCode::InvalidConfig, "schedule temperatures must lie in [0,1]");
  if (queries_per_temperature < 1) throw Error(ErrorCode::InvalidConfig, "queries_per_temperature must be >= 1");
}

std::vector<double> TemperatureSchedule::grid() const {
  validate();
  const auto count = static_cast<std::size_t>(std::floor((end - start) / step + 1e-9)) + 1;
  std::vector<double> temps;
  temps.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    temps.push_back(std::round((start + static_cast<double>(i) * step) * 1e6) / 1e6);
  return temps;
}

std::vector<ModelRequest> schedule_queries(const TemperatureSchedule& schedule, const ModelRequest& base) {
  std::vector<ModelRequest> out;
  for (double t : schedule.grid()) {
    for (int q = 0; q < schedule.queries_per_temperature; ++q) {
      ModelRequest r = base;
      r.temperature = t;
      r.key.temperature = t;
      r.key.query_index = q;
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string normalized_test_hash(std::string_view body) {
  std::string stripped;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      while (j < body.size() && body[j] != c && body[j] != '\n') j += body[j] == '\\' ? 2 : 1;
      j = std::min(j + 1, body.size());
      stripped.append(body.substr(i, j - i));
      i = j - 1;
      continue;
    }
    if (c == '/' && i + 1 < body.size() && body[i + 1] == '/') {
      while (i < body.size() && body[i] != '\n') ++i;
      stripped.push_back('\n');
      continue;
    }
    stripped.push_back(c);
  }
  return text::sha256_hex(text::collapse_whitespace(stripped));
}

std::optional<TestCandidate> parse_test_completion(std::string_view completion) {
  const std::string_view body = text::trim_left(completion);
  const auto open = body.find('{');
  if (open == std::string_view::npos) return std::nullopt;
  const std::string_view head = body.substr(0, open);
  if (head.empty() || !(std::isalpha(static_cast<unsigned char>(head.front())) || head.front() == '@') ||
      head.find('(') == std::string_view::npos || head.find(')') == std::string_view::npos)
    return std::nullopt;
  const auto close = find_matching_brace(body, open);
  if (close == std::string_view::npos) return std::nullopt;

  TestCandidate c;
  c.body = std::string(body.substr(0, close + 1));
  c.normalized_hash = normalized_test_hash(c.body);
  return c;
}

namespace {

const std::regex kClassDecl(R"(\bclass\s+([A-Za-z_$][\w$]*))");

std::string replace_word(const std::string& s, const std::string& word, const std::string& with) {
  const std::regex re("\\b" + word + "\\b");
  return std::regex_replace(s, re, with);
}

void check_template(const std::string& tmpl) {
  const std::size_t n = text::count_occurrences(tmpl, kTestBodyPlaceholder);
  if (n != 1)
    throw Error(ErrorCode::BadTemplate, "test template must contain {TEST_BODY} exactly once (found " +
                                            std::to_string(n) + ")");
}

}  // namespace

std::string injected_class_name(const TestCandidate& candidate, const std::string& tmpl) {
  const std::string suffix = candidate.normalized_hash.substr(0, 8);
  if (tmpl.find("{CLASS_NAME}") != std::string::npos) return "GeneratedTest_" + suffix;
  std::smatch m;
  if (std::regex_search(tmpl, m, kClassDecl)) return m[1].str() + "_" + suffix;
  return "GeneratedTest_" + suffix;
}

std::string inject_into_template(const TestCandidate& candidate, const std::string& tmpl) {
  check_template(tmpl);
  const std::string name = injected_class_name(candidate, tmpl);
  std::string unit;
  if (tmpl.find("{CLASS_NAME}") != std::string::npos) {
    unit = text::replace_all(tmpl, "{CLASS_NAME}", name);
  } else if (std::smatch m; std::regex_search(tmpl, m, kClassDecl)) {
    unit = replace_word(tmpl, m[1].str(), name);
  } else {
    unit = tmpl;
  }
  return text::replace_all(unit, kTestBodyPlaceholder, candidate.body);
}

std::vector<TestCandidate> dedup(const std::vector<TestCandidate>& candidates) {
  std::set<std::string> seen;
  std::vector<TestCandidate> out;
  for (const auto& c : candidates)
    if (seen.insert(c.normalized_hash).second) out.push_back(c);
  return out;
}

int test_size_lines(std::string_view body) { return static_cast<int>(text::split_lines(body).size()); }

std::vector<std::string> select_helpers(const MethodInfo& method, std::size_t cap) {
  static const std::set<std::string> kSkip = {"String", "Integer", "Long", "Double", "Float", "Short",
                                              "Byte", "Boolean", "Character", "Object", "Number"};
  std::vector<std::string> out;
  auto add = [&](std::string h) {
    if (out.size() < cap && std::find(out.begin(), out.end(), h) == out.end()) out.push_back(std::move(h));
  };

  if (!method.class_name.empty()) {
    bool has_ctor = false, has_zero_arg_ctor = false;
    for (const auto& sig : method.helpers) {
      static const std::regex kCtor(R"((?:^|\s)([A-Za-z_$][\w$]*)\s*\(\s*(.*?)\s*\))");
      std::smatch m;
      if (std::regex_search(sig, m, kCtor) && m[1].str() == method.class_name) {
        has_ctor = true;
        has_zero_arg_ctor = has_zero_arg_ctor || m[2].str().empty();
      }
    }
    if (!has_ctor || has_zero_arg_ctor) add(method.class_name + "()");
  }
  for (const auto& type : method.parameter_types) {
    std::string base = type;
    base = base.substr(0, base.find_first_of("<[ ."));
    if (const auto dot = type.rfind('.', type.find('<')); dot != std::string::npos && type.find('<') > dot)
      base = type.substr(dot + 1, type.find_first_of("<[", dot) - dot - 1);
    if (base.empty() || !std::isupper(static_cast<unsigned char>(base.front())) || kSkip.count(base)) continue;
    add(base + "()");
  }
  return out;
}

CoverageTable coverage_report(const std::vector<std::pair<std::string, ToolCoverage>>& per_tool) {
  CoverageTable table;
  const CoverageMap* reference = nullptr;
  for (const auto& [tool, cov] : per_tool) {
    if (!cov.map) continue;
    if (reference == nullptr) {
      reference = &*cov.map;
    } else if (cov.map->universe() != reference->universe()) {
      throw Error(ErrorCode::UniverseMismatch, "coverage maps disagree on instrumented lines (" + tool + ")");
    }
  }

  std::set<std::pair<std::string, int>> union_covered;
  for (const auto& [tool, cov] : per_tool) {
    CoverageRow row;
    row.tool = tool;
    row.compiling_tests = cov.compiling_tests;
    row.mean_test_size = cov.mean_test_size;
    if (cov.map) {
      row.line_coverage = cov.map->fraction();
      row.covered_lines = cov.map->covered();
      const auto covered = cov.map->covered_lines();
      union_covered.insert(covered.begin(), covered.end());
    } else if (reference != nullptr) {
      row.line_coverage = 0.0;
    }
    table.tools.push_back(std::move(row));
  }
  if (reference != nullptr) {
    table.instrumented = reference->instrumented();
    table.combined_covered = union_covered.size();
    table.combined = table.instrumented
                         ? static_cast<double>(union_covered.size()) / static_cast<double>(table.instrumented)
                         : 0.0;
  }
  return table;
}

}  // namespace promptforge
