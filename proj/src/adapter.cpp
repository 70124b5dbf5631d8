#include "promptforge/adapter.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include <nlohmann/json.hpp>

#include "promptforge/error.hpp"
#include "promptforge/lexer.hpp"
#include "promptforge/process.hpp"
#include "promptforge/text.hpp"

namespace promptforge {

namespace {

bool in_set(std::string_view word, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), word) != set.end();
}

bool is_control_keyword(std::string_view w) {
  return in_set(w, {"if", "else", "for", "while", "do", "switch", "case", "catch", "try", "finally",
                    "synchronized", "return", "throw", "new", "assert", "yield", "goto", "sizeof"});
}

bool is_bare_keyword(std::string_view w) {
  return in_set(w, {"else", "try", "finally", "do", "default", "break", "continue", "return",
                    "public", "private", "protected", "static", "final", "abstract",
                    "synchronized"});
}

bool is_container_keyword(std::string_view w) {
  return in_set(w, {"class", "interface", "enum", "record", "struct", "namespace"});
}

bool is_modifier(std::string_view w) {
  return in_set(w, {"public", "private", "protected", "static", "final", "synchronized",
                    "abstract", "native", "default", "strictfp", "transient", "volatile",
                    "inline", "virtual", "constexpr", "explicit"});
}

// Index just past a string or char literal starting at `i`.
std::size_t skip_literal(std::string_view s, std::size_t i) {
  const char quote = s[i];
  ++i;
  while (i < s.size()) {
    if (s[i] == '\\') {
      i += 2;
      continue;
    }
    if (s[i] == quote) return i + 1;
    if (s[i] == '\n') return i;
    ++i;
  }
  return s.size();
}

// Removes comments from one physical line, carrying block-comment state across lines.
std::string strip_comments(std::string_view line, bool& in_block) {
  std::string out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (in_block) {
      const auto end = line.find("*/", i);
      if (end == std::string_view::npos) return out;
      in_block = false;
      i = end + 2;
      out.push_back(' ');
      continue;
    }
    const char c = line[i];
    const char next = i + 1 < line.size() ? line[i + 1] : '\0';
    if (c == '"' || c == '\'') {
      const std::size_t j = skip_literal(line, i);
      out.append(line.substr(i, j - i));
      i = j;
    } else if (c == '/' && next == '/') {
      break;
    } else if (c == '/' && next == '*') {
      in_block = true;
      i += 2;
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

// Method or constructor header: two adjacent identifiers before the first '('
// (type + name), or a lone identifier followed by a body, and no assignment.
bool looks_like_method_header(const std::vector<Token>& toks, bool opens_body) {
  std::size_t first = 0;
  while (first < toks.size() && toks[first].kind == TokenKind::Operator &&
         (toks[first].text == "}" || toks[first].text == "{"))
    ++first;
  if (first >= toks.size()) return false;
  if (toks[first].kind == TokenKind::Identifier && is_control_keyword(toks[first].text)) return false;

  std::size_t paren = first;
  while (paren < toks.size() && toks[paren].text != "(") {
    if (toks[paren].text == "=" || toks[paren].text == "->") return false;
    ++paren;
  }
  if (paren == toks.size() || paren == first) return false;
  if (toks[paren - 1].kind != TokenKind::Identifier) return false;

  int angle = 0;
  std::size_t idents_outside_generics = 0;
  bool adjacent = false;
  for (std::size_t k = first; k < paren; ++k) {
    const auto& t = toks[k];
    if (t.text == "<") ++angle;
    if (t.text == ">") --angle;
    if (t.text == ">>") angle -= 2;
    if (t.kind == TokenKind::Identifier && angle == 0) {
      ++idents_outside_generics;
      if (k > first && (toks[k - 1].kind == TokenKind::Identifier || toks[k - 1].text == ">" ||
                        toks[k - 1].text == ">>" || toks[k - 1].text == "]"))
        adjacent = true;
    }
  }
  if (adjacent) return true;
  return opens_body && idents_outside_generics == 1 && paren == first + 1;
}

bool is_annotation_only(std::string_view code) {
  if (code.empty() || code.front() != '@') return false;
  const auto toks = tokenize(code.substr(1));
  if (toks.empty() || toks[0].kind != TokenKind::Identifier) return false;
  std::size_t k = 1;
  while (k + 1 < toks.size() && toks[k].text == "." && toks[k + 1].kind == TokenKind::Identifier)
    k += 2;
  if (k == toks.size()) return true;
  return toks[k].text == "(" && toks.back().text == ")";
}

bool skip_mutation_line(std::string_view code) {
  code = text::trim(code);
  if (code.empty()) return true;
  if (text::starts_with(code, "import ") || text::starts_with(code, "package ") ||
      text::starts_with(code, "#"))
    return true;
  if (is_annotation_only(code)) return true;

  const auto toks = tokenize(code);
  const bool only_structure = std::all_of(toks.begin(), toks.end(), [](const Token& t) {
    if (t.kind == TokenKind::Identifier) return is_bare_keyword(t.text);
    return t.kind == TokenKind::Operator &&
           in_set(t.text, {"{", "}", "(", ")", ";", ",", ":"});
  });
  if (only_structure) return true;

  const bool opens_body = text::ends_with(code, "{");
  if (opens_body) {
    for (const auto& t : toks)
      if (t.kind == TokenKind::Identifier && is_container_keyword(t.text)) return true;
  }
  return looks_like_method_header(toks, opens_body);
}

// Length of the leading annotations (and the whitespace after them) in a header.
std::size_t annotation_prefix(std::string_view header) {
  std::size_t i = 0;
  for (;;) {
    while (i < header.size() && std::isspace(static_cast<unsigned char>(header[i]))) ++i;
    if (i >= header.size() || header[i] != '@') return i;
    ++i;
    while (i < header.size() && (std::isalnum(static_cast<unsigned char>(header[i])) ||
                                 header[i] == '_' || header[i] == '.'))
      ++i;
    std::size_t j = i;
    while (j < header.size() && std::isspace(static_cast<unsigned char>(header[j]))) ++j;
    if (j < header.size() && header[j] == '(') {
      int depth = 0;
      for (; j < header.size(); ++j) {
        if (header[j] == '(') ++depth;
        if (header[j] == ')' && --depth == 0) break;
      }
      i = std::min(j + 1, header.size());
    }
  }
}

// Text between the first '(' and its matching ')'.
std::string_view parameter_list(std::string_view signature) {
  const auto open = signature.find('(');
  if (open == std::string_view::npos) return {};
  int depth = 0;
  for (std::size_t i = open; i < signature.size(); ++i) {
    if (signature[i] == '(') ++depth;
    if (signature[i] == ')' && --depth == 0) return signature.substr(open + 1, i - open - 1);
  }
  return signature.substr(open + 1);
}

std::vector<std::string> parameter_types(std::string_view params) {
  std::vector<std::string> types;
  std::vector<std::string_view> pieces;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const char c = params[i];
    if (c == '<' || c == '(' || c == '[') ++depth;
    if (c == '>' || c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      pieces.push_back(params.substr(start, i - start));
      start = i + 1;
    }
  }
  if (!text::is_blank(params)) pieces.push_back(params.substr(start));

  for (std::string_view piece : pieces) {
    auto toks = tokenize(piece);
    std::vector<Token> kept;
    for (std::size_t k = 0; k < toks.size(); ++k) {
      if (toks[k].text == "@" && k + 1 < toks.size()) {
        ++k;
        continue;
      }
      if (toks[k].kind == TokenKind::Identifier && toks[k].text == "final") continue;
      kept.push_back(toks[k]);
    }
    if (kept.size() > 1 && kept.back().kind == TokenKind::Identifier) kept.pop_back();
    std::string type;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      if (k > 0 && kept[k].kind == TokenKind::Identifier &&
          kept[k - 1].kind == TokenKind::Identifier)
        type.push_back(' ');
      type += kept[k].text;
    }
    types.push_back(type);
  }
  return types;
}

std::size_t line_of(std::string_view s, std::size_t offset) {
  return 1 + static_cast<std::size_t>(std::count(s.begin(), s.begin() + offset, '\n'));
}

}  // namespace

std::size_t find_matching_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  std::size_t i = open;
  while (i < s.size()) {
    const char c = s[i];
    const char next = i + 1 < s.size() ? s[i + 1] : '\0';
    if (c == '"' || c == '\'') {
      i = skip_literal(s, i);
      continue;
    }
    if (c == '/' && next == '/') {
      const auto nl = s.find('\n', i);
      i = nl == std::string_view::npos ? s.size() : nl;
      continue;
    }
    if (c == '/' && next == '*') {
      const auto end = s.find("*/", i + 2);
      i = end == std::string_view::npos ? s.size() : end + 2;
      continue;
    }
    if (c == '{') ++depth;
    if (c == '}' && --depth == 0) return i;
    ++i;
  }
  return std::string_view::npos;
}

void validate(const AdapterSpec& spec) {
  if (text::is_blank(spec.compile_cmd)) throw Error(ErrorCode::InvalidConfig, "adapter compile_cmd is empty");
  if (spec.timeout_s < 1) throw Error(ErrorCode::InvalidConfig, "adapter timeout_s must be >= 1");
}

std::vector<Instance> extract_lines(const SourceUnit& unit) {
  std::vector<Instance> out;
  bool in_block = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  const std::string_view src = unit.text;
  while (start < src.size()) {
    ++line_no;
    std::size_t end = src.find('\n', start);
    if (end == std::string_view::npos) end = src.size();
    std::string_view line = src.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const std::string code = strip_comments(line, in_block);
    if (!skip_mutation_line(code)) {
      const std::string_view payload = text::trim(line);
      Instance inst;
      inst.id = unit.path + ":" + std::to_string(line_no);
      inst.task = ToolTask::Mutation;
      inst.payload = std::string(payload);
      inst.path = unit.path;
      inst.line = line_no;
      inst.offset = start + static_cast<std::size_t>(payload.data() - line.data());
      inst.context = {{"path", unit.path}, {"line", std::to_string(line_no)}};
      out.push_back(std::move(inst));
    }
    start = end + 1;
  }
  return out;
}

std::string clean_doc_comment(std::string_view raw) {
  std::string_view body = text::trim(raw);
  if (text::starts_with(body, "/**"))
    body.remove_prefix(3);
  else if (text::starts_with(body, "/*"))
    body.remove_prefix(2);
  if (text::ends_with(body, "*/")) body.remove_suffix(2);

  std::vector<std::string> lines;
  for (std::string_view line : text::split_lines(body)) {
    line = text::trim(line);
    while (!line.empty() && line.front() == '*') line.remove_prefix(1);
    lines.emplace_back(text::trim(line));
  }
  while (!lines.empty() && lines.front().empty()) lines.erase(lines.begin());
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return text::join(lines, "\n");
}

std::string MethodInfo::method_id() const {
  std::string id = class_name.empty() ? name : class_name + "." + name;
  return id + "(" + text::join(parameter_types, ",") + ")";
}

std::string MethodInfo::short_signature() const {
  std::string_view sig = text::trim(signature);
  for (;;) {
    const auto sp = sig.find(' ');
    if (sp == std::string_view::npos || !is_modifier(sig.substr(0, sp))) break;
    sig = text::trim_left(sig.substr(sp + 1));
  }
  const auto open = sig.find('(');
  if (open != std::string_view::npos) {
    const std::string_view params = parameter_list(sig);
    const std::size_t close = static_cast<std::size_t>(params.data() - sig.data()) + params.size();
    if (close < sig.size()) sig = sig.substr(0, close + 1);
  }
  return text::collapse_whitespace(sig);
}

MethodExtraction extract_methods(const SourceUnit& unit) {
  struct Scope {
    std::string class_name;
  };
  MethodExtraction result;
  const std::string_view s = unit.text;
  std::vector<Scope> containers;
  std::size_t header_start = std::string_view::npos;
  std::optional<std::string> pending_doc;
  int paren_depth = 0;
  auto reset = [&] {
    header_start = std::string_view::npos;
    pending_doc.reset();
    paren_depth = 0;
  };
  auto fault = [&](std::size_t at, const std::string& what) {
    result.unbalanced_braces = what + " at line " + std::to_string(line_of(s, at));
  };

  std::size_t i = 0;
  while (i < s.size() && !result.unbalanced_braces) {
    const char c = s[i];
    const char next = i + 1 < s.size() ? s[i + 1] : '\0';
    if (c == '/' && next == '/') {
      const auto nl = s.find('\n', i);
      i = nl == std::string_view::npos ? s.size() : nl;
      continue;
    }
    if (c == '/' && next == '*') {
      const auto end = s.find("*/", i + 2);
      const std::size_t stop = end == std::string_view::npos ? s.size() : end + 2;
      if (header_start == std::string_view::npos) pending_doc = std::string(s.substr(i, stop - i));
      i = stop;
      continue;
    }
    if (c == '"' || c == '\'') {
      if (header_start == std::string_view::npos) header_start = i;
      i = skip_literal(s, i);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == ';' && paren_depth == 0) {
      reset();
      ++i;
      continue;
    }
    if (c == '}') {
      if (containers.empty()) {
        fault(i, "unexpected '}'");
        break;
      }
      containers.pop_back();
      reset();
      ++i;
      continue;
    }
    if (c == '{') {
      const std::size_t close = find_matching_brace(s, i);
      if (paren_depth > 0) {
        // Array initializer inside an annotation or parameter default.
        if (close == std::string_view::npos) {
          fault(i, "unterminated '{'");
          break;
        }
        i = close + 1;
        continue;
      }
      const std::string_view raw_header =
          header_start == std::string_view::npos ? std::string_view{} : s.substr(header_start, i - header_start);
      const std::size_t skip = annotation_prefix(raw_header);
      const std::string_view header = text::trim(raw_header.substr(std::min(skip, raw_header.size())));
      const auto toks = tokenize(header);

      auto container_kw = std::find_if(toks.begin(), toks.end(), [](const Token& t) {
        return t.kind == TokenKind::Identifier && is_container_keyword(t.text);
      });
      const bool has_assign = std::any_of(toks.begin(), toks.end(), [](const Token& t) {
        return t.text == "=";
      });
      if (container_kw != toks.end() && !has_assign) {
        Scope scope;
        if (container_kw + 1 != toks.end() && (container_kw + 1)->kind == TokenKind::Identifier)
          scope.class_name = (container_kw + 1)->text;
        containers.push_back(std::move(scope));
        reset();
        ++i;
        continue;
      }
      if (close == std::string_view::npos) {
        fault(i, "unterminated body");
        break;
      }
      if (looks_like_method_header(toks, true)) {
        MethodInfo m;
        m.signature = text::collapse_whitespace(header);
        m.body = std::string(s.substr(i, close - i + 1));
        if (pending_doc && text::starts_with(*pending_doc, "/*")) m.doc_comment = clean_doc_comment(*pending_doc);
        const std::size_t start = static_cast<std::size_t>(header.data() - s.data());
        m.byte_range = {start, close + 1};
        m.line = line_of(s, start);
        const auto paren = m.signature.find('(');
        const auto name_toks = tokenize(std::string_view(m.signature).substr(0, paren));
        m.name = name_toks.empty() ? "" : name_toks.back().text;
        for (auto it = containers.rbegin(); it != containers.rend(); ++it) {
          if (!it->class_name.empty()) {
            m.class_name = it->class_name;
            break;
          }
        }
        m.parameter_types = parameter_types(parameter_list(m.signature));
        result.methods.push_back(std::move(m));
      }
      i = close + 1;
      reset();
      continue;
    }
    if (header_start == std::string_view::npos) header_start = i;
    if (c == '(') ++paren_depth;
    if (c == ')' && paren_depth > 0) --paren_depth;
    ++i;
  }
  if (!result.unbalanced_braces && !containers.empty())
    result.unbalanced_braces = "unclosed '{' at end of file";

  for (auto& m : result.methods) {
    for (const auto& other : result.methods)
      if (&other != &m) m.helpers.push_back(other.signature);
  }
  return result;
}

MethodExtraction extract_methods_external(const SourceUnit& unit, const AdapterSpec& spec) {
  TempDir dir;
  const auto file = dir.path() / std::filesystem::path(unit.path).filename();
  text::write_file(file.string(), unit.text);
  const std::string cmd = text::replace_all(spec.extract_cmd, "{file}", text::shell_quote(file.string()));
  const ProcessResult run = run_command(cmd, std::chrono::seconds(spec.timeout_s));
  if (run.timed_out || run.exit_code != 0)
    throw Error(ErrorCode::AdapterFailure, "extract_cmd failed on " + unit.path + ": " +
                                               std::string(text::trim(run.stderr_text)));
  MethodExtraction out;
  try {
    const auto doc = nlohmann::json::parse(run.stdout_text);
    for (const auto& j : doc) {
      MethodInfo m;
      m.signature = j.at("signature").get<std::string>();
      m.body = j.at("body").get<std::string>();
      if (j.contains("doc_comment") && !j["doc_comment"].is_null())
        m.doc_comment = j["doc_comment"].get<std::string>();
      m.helpers = j.value("helpers", std::vector<std::string>{});
      const auto range = j.at("byte_range").get<std::vector<std::size_t>>();
      if (range.size() != 2 || range[0] > range[1] || range[1] > unit.text.size())
        throw Error(ErrorCode::AdapterFailure, "extract_cmd produced an invalid byte_range");
      m.byte_range = {range[0], range[1]};
      m.class_name = j.value("class_name", std::string());
      m.line = j.value("line", line_of(unit.text, range[0]));
      m.parameter_types =
          j.value("parameter_types", parameter_types(parameter_list(m.signature)));
      const auto paren = m.signature.find('(');
      const auto toks = tokenize(std::string_view(m.signature).substr(0, paren));
      m.name = j.value("name", toks.empty() ? std::string() : toks.back().text);
      out.methods.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::AdapterFailure, std::string("extract_cmd output is not valid: ") + e.what());
  }
  return out;
}

CompileResult compile_check(const std::string& code, const AdapterSpec& spec,
                            const std::string& file_name) {
  validate(spec);
  TempDir dir;
  const auto file = dir.path() / file_name;
  text::write_file(file.string(), code);
  const std::string cmd = text::replace_all(spec.compile_cmd, "{file}", text::shell_quote(file.string()));
  const ProcessResult run = run_command(cmd, std::chrono::seconds(spec.timeout_s));
  if (run.timed_out) return {false, "timeout"};
  if (run.exit_code == 0) return {true, ""};
  std::string diag = run.stderr_text;
  if (!run.stdout_text.empty()) diag += run.stdout_text;
  return {false, std::string(text::trim(diag))};
}

void CoverageMap::set(const std::string& path, int line, bool covered) {
  auto [it, inserted] = lines_.emplace(std::make_pair(path, line), covered);
  if (!inserted) it->second = it->second || covered;
}

std::size_t CoverageMap::covered() const {
  return static_cast<std::size_t>(
      std::count_if(lines_.begin(), lines_.end(), [](const auto& kv) { return kv.second; }));
}

double CoverageMap::fraction() const {
  return lines_.empty() ? 0.0 : static_cast<double>(covered()) / static_cast<double>(lines_.size());
}

std::set<std::pair<std::string, int>> CoverageMap::universe() const {
  std::set<std::pair<std::string, int>> out;
  for (const auto& [key, _] : lines_) out.insert(key);
  return out;
}

std::set<std::pair<std::string, int>> CoverageMap::covered_lines() const {
  std::set<std::pair<std::string, int>> out;
  for (const auto& [key, cov] : lines_)
    if (cov) out.insert(key);
  return out;
}

CoverageMap CoverageMap::restricted_to(const std::string& path) const {
  CoverageMap out;
  for (const auto& [key, cov] : lines_)
    if (key.first == path) out.lines_.emplace(key, cov);
  return out.lines_.empty() ? *this : out;
}

CoverageMap CoverageMap::with_nothing_covered() const {
  CoverageMap out = *this;
  for (auto& [_, cov] : out.lines_) cov = false;
  return out;
}

CoverageMap parse_coverage_csv(const std::string& csv) {
  CoverageMap map;
  std::size_t row = 0;
  for (std::string_view line : text::split_lines(csv)) {
    ++row;
    if (text::is_blank(line)) continue;
    const auto fields = text::parse_csv_record(line);
    if (row == 1 && !fields.empty() && text::trim(fields[0]) == "path") continue;
    if (fields.size() != 3)
      throw Error(ErrorCode::UnparseableReport, "coverage row " + std::to_string(row) + ": expected 3 fields");
    const std::string_view line_field = text::trim(fields[1]);
    const std::string_view cov_field = text::trim(fields[2]);
    int line_no = 0;
    try {
      std::size_t used = 0;
      line_no = std::stoi(std::string(line_field), &used);
      if (used != line_field.size() || line_no < 1) throw std::invalid_argument("line");
    } catch (const std::exception&) {
      throw Error(ErrorCode::UnparseableReport, "coverage row " + std::to_string(row) + ": bad line number");
    }
    if (cov_field != "0" && cov_field != "1")
      throw Error(ErrorCode::UnparseableReport, "coverage row " + std::to_string(row) + ": covered must be 0 or 1");
    map.set(std::string(text::trim(fields[0])), line_no, cov_field == "1");
  }
  return map;
}

CoverageMap load_coverage_map(const std::string& path) { return parse_coverage_csv(text::read_file(path)); }

CoverageMap run_coverage(const std::vector<std::filesystem::path>& tests, const AdapterSpec& spec) {
  if (text::is_blank(spec.coverage_cmd))
    throw Error(ErrorCode::AdapterFailure, "adapter coverage_cmd is not configured");
  TempDir dir;
  const auto report = dir.path() / "coverage.csv";
  std::vector<std::string> quoted;
  for (const auto& t : tests) quoted.push_back(text::shell_quote(t.string()));
  std::string cmd = text::replace_all(spec.coverage_cmd, "{tests}", text::join(quoted, " "));
  cmd = text::replace_all(cmd, "{out}", text::shell_quote(report.string()));
  const ProcessResult run = run_command(cmd, std::chrono::seconds(spec.timeout_s));
  if (run.timed_out) throw Error(ErrorCode::AdapterFailure, "coverage_cmd timed out");
  if (run.exit_code != 0)
    throw Error(ErrorCode::AdapterFailure,
                "coverage_cmd exited " + std::to_string(run.exit_code) + ": " +
                    std::string(text::trim(run.stderr_text)));
  if (!std::filesystem::exists(report))
    throw Error(ErrorCode::UnparseableReport, "coverage_cmd wrote no report to {out}");
  CoverageMap map = parse_coverage_csv(text::read_file(report.string()));
  // Without tests nothing can be covered, whatever the tool claims.
  return tests.empty() ? map.with_nothing_covered() : map;
}

LineAllowlist parse_allowlist(const std::string& content) {
  LineAllowlist out;
  for (std::string_view row : text::split_lines(content)) {
    row = text::trim(row);
    if (row.empty() || row.front() == '#') continue;
    const auto colon = row.rfind(':');
    if (colon == std::string_view::npos)
      throw Error(ErrorCode::InvalidConfig, "allowlist row without ':': " + std::string(row));
    try {
      out.emplace(std::string(row.substr(0, colon)), std::stoul(std::string(row.substr(colon + 1))));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "allowlist row with bad line: " + std::string(row));
    }
  }
  return out;
}

}  // namespace promptforge
