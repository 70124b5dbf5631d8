#include "promptforge/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include <nlohmann/json.hpp>

#include "promptforge/error.hpp"
#include "promptforge/text.hpp"

namespace promptforge {

namespace {

constexpr std::string_view kArrow = "<->";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool ident_char(char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

// Position of the ')' closing the '(' at `open`, or npos.
std::size_t closing_paren(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '"' || s[i] == '\'') {
      const char q = s[i];
      for (++i; i < s.size() && s[i] != q; ++i)
        if (s[i] == '\\') ++i;
      continue;
    }
    if (s[i] == '(') ++depth;
    if (s[i] == ')' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

std::string_view strip_terminators(std::string_view s) {
  for (;;) {
    s = text::trim(s);
    if (text::ends_with(s, ";")) {
      s.remove_suffix(1);
    } else if (text::ends_with(s, "}}")) {
      s.remove_suffix(2);
    } else {
      return s;
    }
  }
}

std::optional<OracleSpec> parse_oracle_line(std::string_view line) {
  line = text::trim(line);
  OracleSpec spec;
  if (text::starts_with(line, "if") && line.size() > 2 && !ident_char(line[2])) {
    const auto open = line.find('(');
    if (open == std::string_view::npos) return std::nullopt;
    const auto close = closing_paren(line, open);
    if (close == std::string_view::npos) return std::nullopt;
    const auto cond = text::trim(line.substr(open + 1, close - open - 1));
    if (cond.empty()) return std::nullopt;
    spec.condition = std::string(cond);
    line = text::trim(line.substr(close + 1));
  }
  if (text::starts_with(line, "{{")) line = text::trim(line.substr(2));
  line = strip_terminators(line);

  const auto arrow = line.find(kArrow);
  if (arrow == std::string_view::npos) return std::nullopt;
  spec.lhs = std::string(text::trim(line.substr(0, arrow)));
  spec.rhs = std::string(strip_terminators(line.substr(arrow + kArrow.size())));
  if (spec.lhs.empty() || spec.rhs.empty()) return std::nullopt;
  if (normalize_expression(spec.lhs) == normalize_expression(spec.rhs)) return std::nullopt;
  return spec;
}

bool same_condition(const std::optional<std::string>& a, const std::optional<std::string>& b) {
  if (!a || !b) return !a && !b;
  return normalize_expression(*a) == normalize_expression(*b);
}

}  // namespace

double f1_score(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

PrfScore make_score(std::size_t correct, std::size_t predicted, std::size_t truths) {
  PrfScore s;
  s.correct = correct;
  s.predicted = predicted;
  s.truths = truths;
  s.precision = predicted ? static_cast<double>(correct) / static_cast<double>(predicted) : 0.0;
  s.recall = truths ? static_cast<double>(correct) / static_cast<double>(truths) : 0.0;
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

std::optional<OracleSpec> parse_oracle_completion(std::string_view completion) {
  if (const auto marker = completion.find("### Equivalence"); marker != std::string_view::npos)
    completion = completion.substr(marker + std::string_view("### Equivalence").size());
  for (std::string_view line : text::split_lines(completion)) {
    if (line.find(kArrow) == std::string_view::npos) continue;
    return parse_oracle_line(line);
  }
  return std::nullopt;
}

std::string serialize(const OracleSpec& spec) {
  if (spec.condition) return "if (" + *spec.condition + ") {{ " + spec.lhs + " <-> " + spec.rhs + " }};";
  return spec.lhs + " <-> " + spec.rhs + ";";
}

std::string expand_names(std::string_view expr, const std::map<std::string, std::string>& symbols) {
  if (symbols.empty()) return std::string(expr);
  std::string out;
  std::size_t i = 0;
  while (i < expr.size()) {
    const char c = expr[i];
    if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      while (j < expr.size() && expr[j] != c) j += expr[j] == '\\' ? 2 : 1;
      j = std::min(j + 1, expr.size());
      out.append(expr.substr(i, j - i));
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < expr.size() && (ident_char(expr[j]) || expr[j] == '.')) ++j;
      out.append(expr.substr(i, j - i));
      i = j;
    } else if (ident_start(c)) {
      std::size_t j = i;
      while (j < expr.size() && ident_char(expr[j])) ++j;
      const std::string ident(expr.substr(i, j - i));
      const bool qualified = i > 0 && expr[i - 1] == '.';
      const auto hit = qualified ? symbols.end() : symbols.find(ident);
      out += hit == symbols.end() ? ident : hit->second;
      i = j;
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

OracleSpec expand_names(OracleSpec spec, const std::map<std::string, std::string>& symbols) {
  spec.lhs = expand_names(spec.lhs, symbols);
  spec.rhs = expand_names(spec.rhs, symbols);
  if (spec.condition) spec.condition = expand_names(*spec.condition, symbols);
  return spec;
}

std::string normalize_expression(std::string_view expr) {
  std::string s = text::remove_whitespace(expr);
  while (s.size() >= 2 && s.front() == '(' && closing_paren(s, 0) == s.size() - 1)
    s = s.substr(1, s.size() - 2);
  return s;
}

bool pair_matches(const OracleSpec& pred, const GroundTruthOracle& truth) {
  const auto pl = normalize_expression(pred.lhs), pr = normalize_expression(pred.rhs);
  const auto tl = normalize_expression(truth.lhs), tr = normalize_expression(truth.rhs);
  return (pl == tl && pr == tr) || (pl == tr && pr == tl);
}

bool match_oracle(const OracleSpec& pred, const GroundTruthOracle& truth) {
  return pair_matches(pred, truth) && same_condition(pred.condition, truth.condition);
}

OracleScore score_oracles(const std::vector<OracleSpec>& preds, const std::vector<GroundTruthOracle>& truths) {
  static const std::string kUnattributed = "(unattributed)";
  std::map<std::string, std::vector<std::size_t>> by_method;
  for (std::size_t t = 0; t < truths.size(); ++t) by_method[truths[t].method_id].push_back(t);

  struct Counts {
    std::size_t correct = 0, predicted = 0, truths = 0;
  };
  std::map<std::string, Counts> counts;
  for (const auto& t : truths) ++counts[t.project].truths;

  OracleScore score;
  std::vector<bool> used(truths.size(), false);
  std::size_t correct = 0;
  for (const auto& pred : preds) {
    const auto it = by_method.find(pred.method_id);
    const std::string& project = it == by_method.end() ? kUnattributed : truths[it->second.front()].project;
    ++counts[project].predicted;
    if (it == by_method.end()) continue;

    bool matched = false;
    for (std::size_t t : it->second) {
      if (used[t] || !match_oracle(pred, truths[t])) continue;
      used[t] = true;
      matched = true;
      ++correct;
      ++counts[truths[t].project].correct;
      break;
    }
    if (matched) continue;
    for (std::size_t t : it->second) {
      if (pair_matches(pred, truths[t])) {
        score.near_misses.emplace_back(pred, truths[t]);
        break;
      }
    }
  }

  score.total = make_score(correct, preds.size(), truths.size());
  for (const auto& [project, c] : counts) score.per_project[project] = make_score(c.correct, c.predicted, c.truths);
  return score;
}

std::vector<GroundTruthOracle> parse_ground_truth(const std::string& json_text) {
  std::vector<GroundTruthOracle> out;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    if (!doc.is_array()) throw Error(ErrorCode::InvalidConfig, "ground truth must be a JSON array");
    for (const auto& j : doc) {
      GroundTruthOracle t;
      t.method_id = j.at("method_id").get<std::string>();
      if (j.contains("condition") && !j["condition"].is_null()) t.condition = j["condition"].get<std::string>();
      t.lhs = j.at("lhs").get<std::string>();
      t.rhs = j.at("rhs").get<std::string>();
      t.project = j.value("project", std::string());
      if (text::is_blank(t.lhs) || text::is_blank(t.rhs) ||
          normalize_expression(t.lhs) == normalize_expression(t.rhs) ||
          (t.condition && text::is_blank(*t.condition)))
        throw Error(ErrorCode::InvalidConfig, "ground truth oracle for " + t.method_id + " is malformed");
      out.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("ground truth is not valid: ") + e.what());
  }
  return out;
}

std::map<std::string, std::string> parse_symbol_map(const std::string& json_text) {
  try {
    return nlohmann::json::parse(json_text).get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("symbol map is not valid: ") + e.what());
  }
}

bool has_oracle_candidate_sentence(std::string_view comment) {
  static const std::regex kCodeLike(R"([A-Za-z_$][\w$]*\s*\(|[A-Za-z_$][\w$]*[.#][A-Za-z_$])");
  const std::string flat = text::collapse_whitespace(comment);
  std::size_t start = 0;
  while (start < flat.size()) {
    std::size_t end = start;
    // A sentence ends at ". " or at the end of the comment; dots inside code do not split.
    while (end < flat.size() && !(flat[end] == '.' && (end + 1 == flat.size() || flat[end + 1] == ' '))) ++end;
    std::string sentence = flat.substr(start, end - start);
    std::string lower = sentence;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    const bool keyword = lower.find("equivalent") != std::string::npos ||
                         lower.find("same as") != std::string::npos ||
                         lower.find("identical to") != std::string::npos ||
                         lower.find("equal to") != std::string::npos;
    if (keyword && std::regex_search(sentence, kCodeLike)) return true;
    start = end + 1;
  }
  return false;
}

std::string render_oracle_check(const std::string& tmpl, const OracleSpec& spec) {
  std::string out = text::replace_all(tmpl, "{CONDITION}", spec.condition.value_or("true"));
  out = text::replace_all(out, "{LHS}", spec.lhs);
  return text::replace_all(out, "{RHS}", spec.rhs);
}

}  // namespace promptforge
