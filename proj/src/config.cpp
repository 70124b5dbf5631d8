#include "promptforge/config.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>

#include "promptforge/error.hpp"
#include "promptforge/text.hpp"

namespace promptforge {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// TOML subset

namespace {

class TomlReader {
 public:
  explicit TomlReader(const std::string& src) : s_(src) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_ws_comments_newlines();
      if (eof()) break;
      if (peek() == '[') {
        if (s_.compare(pos_, 2, "[[") == 0) fail("arrays of tables are not supported");
        ++pos_;
        const auto path = parse_key_path(']');
        expect(']');
        table = &descend(root, path, true);
        expect_line_end();
        continue;
      }
      const auto path = parse_key_path('=');
      expect('=');
      skip_inline_ws();
      json value = parse_value();
      json* target = path.size() > 1 ? &descend(*table, {path.begin(), path.end() - 1}, false) : table;
      if (target->contains(path.back())) fail("duplicate key '" + path.back() + "'");
      (*target)[path.back()] = std::move(value);
      expect_line_end();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    const auto line = 1 + std::count(s_.begin(), s_.begin() + static_cast<std::ptrdiff_t>(std::min(pos_, s_.size())), '\n');
    throw Error(ErrorCode::InvalidConfig, "config line " + std::to_string(line) + ": " + msg);
  }

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }

  void expect(char c) {
    skip_inline_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }

  void skip_ws_comments_newlines() {
    for (;;) {
      skip_inline_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        ++pos_;
        continue;
      }
      return;
    }
  }

  void expect_line_end() {
    skip_inline_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (!eof() && peek() != '\n') fail("unexpected text after value");
  }

  std::vector<std::string> parse_key_path(char terminator) {
    std::vector<std::string> path;
    for (;;) {
      skip_inline_ws();
      if (peek() == '"' || peek() == '\'') {
        path.push_back(parse_string());
      } else {
        const auto start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
        if (start == pos_) fail("expected a key");
        path.push_back(s_.substr(start, pos_ - start));
      }
      skip_inline_ws();
      if (peek() == '.') {
        ++pos_;
        continue;
      }
      if (peek() != terminator) fail(std::string("expected '") + terminator + "' after key");
      return path;
    }
  }

  json& descend(json& from, const std::vector<std::string>& path, bool header) {
    json* cur = &from;
    for (const auto& key : path) {
      if (!cur->contains(key)) (*cur)[key] = json::object();
      cur = &(*cur)[key];
      if (!cur->is_object()) fail("'" + key + "' is not a table");
    }
    (void)header;
    return *cur;
  }

  json parse_value() {
    const char c = peek();
    if (c == '"' || c == '\'') return parse_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return false;
    }
    return parse_number();
  }

  json parse_number() {
    const auto start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || std::string_view("+-._").find(peek()) != std::string_view::npos))
      ++pos_;
    std::string tok = s_.substr(start, pos_ - start);
    tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
    if (tok.empty()) fail("expected a value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos && tok.rfind("0x", 0) != 0;
    try {
      std::size_t used = 0;
      if (is_float) {
        const double v = std::stod(tok, &used);
        if (used == tok.size()) return v;
      } else {
        const long long v = std::stoll(tok, &used, 0);
        if (used == tok.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("invalid value '" + tok + "'");
  }

  json parse_array() {
    ++pos_;
    json arr = json::array();
    for (;;) {
      skip_ws_comments_newlines();
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(parse_value());
      skip_ws_comments_newlines();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  json parse_inline_table() {
    ++pos_;
    json obj = json::object();
    skip_inline_ws();
    if (peek() == '}') {
      ++pos_;
      return obj;
    }
    for (;;) {
      const auto path = parse_key_path('=');
      expect('=');
      skip_inline_ws();
      json* target = path.size() > 1 ? &descend(obj, {path.begin(), path.end() - 1}, false) : &obj;
      (*target)[path.back()] = parse_value();
      skip_inline_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      return obj;
    }
  }

  std::string parse_string() {
    const char q = peek();
    const bool multi = s_.compare(pos_, 3, std::string(3, q)) == 0;
    pos_ += multi ? 3 : 1;
    if (multi && peek() == '\n') ++pos_;  // a newline right after the opening quotes is trimmed
    else if (multi && s_.compare(pos_, 2, "\r\n") == 0) pos_ += 2;
    std::string out;
    for (;;) {
      if (eof()) fail("unterminated string");
      const char c = s_[pos_];
      if (multi ? s_.compare(pos_, 3, std::string(3, q)) == 0 : c == q) {
        pos_ += multi ? 3 : 1;
        return out;
      }
      if (!multi && c == '\n') fail("newline in single-line string");
      if (c == '\\' && q == '"') {
        ++pos_;
        const char e = peek();
        ++pos_;
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case '\n':
            if (!multi) fail("bad escape");
            while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
            break;
          default: fail(std::string("unsupported escape \\") + e);
        }
        continue;
      }
      out += c;
      ++pos_;
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// JSON -> TaskConfig

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be a table");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items())
    if (!ok.count(item.key()))
      throw Error(ErrorCode::InvalidConfig, "unknown config key '" + (where.empty() ? "" : where + ".") + item.key() + "'");
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

PromptVariant variant_or_throw(const std::string& s) {
  const auto v = parse_variant(s);
  if (!v) throw Error(ErrorCode::InvalidConfig, "unknown prompt variant '" + s + "'");
  return *v;
}

}  // namespace

json parse_toml(const std::string& text) { return TomlReader(text).parse(); }

TaskConfig config_from_json(const json& doc, const fs::path& base_dir) {
  TaskConfig c;
  c.base_dir = base_dir;
  try {
    check_keys(doc, "", {"task", "corpus", "project", "variant", "variants", "workers", "out", "strict",
                         "allow_partial", "backend", "prompt", "schedule", "adapter", "inputs"});
    if (!doc.contains("task")) throw Error(ErrorCode::InvalidConfig, "config lacks 'task'");
    const auto task = parse_task(doc.at("task").get<std::string>());
    if (!task) throw Error(ErrorCode::InvalidConfig, "unknown task '" + doc.at("task").get<std::string>() + "'");
    c.task = *task;

    if (doc.contains("corpus")) {
      const auto& corpus = doc.at("corpus");
      if (corpus.is_string()) c.corpus = {corpus.get<std::string>()};
      else c.corpus = corpus.get<std::vector<std::string>>();
    }
    read(doc, "project", c.project);
    if (doc.contains("variant")) c.variant = variant_or_throw(doc.at("variant").get<std::string>());
    if (doc.contains("variants")) {
      c.ablation_variants.clear();
      for (const auto& v : doc.at("variants").get<std::vector<std::string>>()) c.ablation_variants.push_back(variant_or_throw(v));
    }
    read(doc, "workers", c.workers);
    if (doc.contains("out")) c.out_dir = resolve(base_dir, doc.at("out").get<std::string>());
    read(doc, "strict", c.strict);
    read(doc, "allow_partial", c.allow_partial);

    if (doc.contains("backend")) {
      const auto& b = doc.at("backend");
      check_keys(b, "backend", {"kind", "model", "base_url", "bank", "variant_banks", "max_in_flight", "request_timeout_s"});
      read(b, "kind", c.backend.kind);
      read(b, "model", c.backend.model_id);
      read(b, "base_url", c.backend.base_url);
      if (b.contains("bank")) c.backend.bank = resolve(base_dir, b.at("bank").get<std::string>());
      if (b.contains("variant_banks")) {
        for (const auto& item : b.at("variant_banks").items())
          c.backend.variant_banks[variant_or_throw(item.key())] = resolve(base_dir, item.value().get<std::string>());
      }
      read(b, "max_in_flight", c.backend.max_in_flight);
      read(b, "request_timeout_s", c.backend.request_timeout_s);
    }

    if (doc.contains("prompt")) {
      const auto& p = doc.at("prompt");
      check_keys(p, "prompt", {"example_bank", "example_selection", "temperature", "max_tokens", "context_budget"});
      if (p.contains("example_bank")) c.example_bank = resolve(base_dir, p.at("example_bank").get<std::string>());
      if (p.contains("example_selection")) {
        std::string sel = p.at("example_selection").get<std::string>();
        std::transform(sel.begin(), sel.end(), sel.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (sel == "same-class" || sel == "same_class" || sel == "sameclass") c.example_selection = ExampleSelection::SameClass;
        else if (sel == "random") c.example_selection = ExampleSelection::Random;
        else throw Error(ErrorCode::InvalidConfig, "unknown example_selection '" + sel + "'");
      }
      if (p.contains("temperature")) c.temperature = p.at("temperature").get<double>();
      if (p.contains("max_tokens")) c.max_tokens = p.at("max_tokens").get<int>();
      read(p, "context_budget", c.context_budget);
    }

    if (doc.contains("schedule")) {
      const auto& s = doc.at("schedule");
      check_keys(s, "schedule", {"start", "end", "step", "queries"});
      read(s, "start", c.schedule.start);
      read(s, "end", c.schedule.end);
      read(s, "step", c.schedule.step);
      read(s, "queries", c.schedule.queries_per_temperature);
    }

    if (doc.contains("adapter")) {
      const auto& a = doc.at("adapter");
      check_keys(a, "adapter", {"compile_cmd", "coverage_cmd", "test_class_template", "test_class_template_file",
                                "oracle_template", "extract_cmd", "extension", "timeout_s"});
      read(a, "compile_cmd", c.adapter.compile_cmd);
      read(a, "coverage_cmd", c.adapter.coverage_cmd);
      read(a, "test_class_template", c.adapter.test_class_template);
      if (a.contains("test_class_template_file"))
        c.adapter.test_class_template = text::read_file(resolve(base_dir, a.at("test_class_template_file").get<std::string>()));
      read(a, "oracle_template", c.adapter.oracle_template);
      read(a, "extract_cmd", c.adapter.extract_cmd);
      read(a, "extension", c.adapter.extension);
      read(a, "timeout_s", c.adapter.timeout_s);
      // Commands may refer to helper scripts next to the config.
      const std::string dir = text::shell_quote(fs::absolute(base_dir).lexically_normal().string());
      for (auto* cmd : {&c.adapter.compile_cmd, &c.adapter.coverage_cmd, &c.adapter.extract_cmd})
        *cmd = text::replace_all(*cmd, "{config_dir}", dir);
    }

    if (doc.contains("inputs")) {
      const auto& in = doc.at("inputs");
      check_keys(in, "inputs", {"allowlist", "baseline_mutants", "ground_truth", "symbols", "candidates", "coverage_map"});
      const std::pair<const char*, std::string*> fields[] = {
          {"allowlist", &c.allowlist},       {"baseline_mutants", &c.baseline_mutants},
          {"ground_truth", &c.ground_truth}, {"symbols", &c.symbols},
          {"candidates", &c.candidates},     {"coverage_map", &c.coverage_map}};
      for (const auto& [key, dst] : fields)
        if (in.contains(key)) *dst = resolve(base_dir, in.at(key).get<std::string>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config has a value of the wrong type: ") + e.what());
  }
  return c;
}

TaskConfig load_config(const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::InvalidConfig, "config file not found: " + path);
  const std::string content = text::read_file(path);
  const fs::path base = fs::path(path).parent_path().empty() ? fs::path(".") : fs::path(path).parent_path();
  json doc;
  if (text::ends_with(path, ".json")) {
    try {
      doc = json::parse(content);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
    }
  } else {
    doc = parse_toml(content);
  }
  return config_from_json(doc, base);
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

void apply_env(TaskConfig& config, const EnvLookup& env) {
  if (auto v = env("PROMPTFORGE_BACKEND")) config.backend.kind = *v;
  if (auto v = env("PROMPTFORGE_MODEL")) config.backend.model_id = *v;
  if (auto v = env("PROMPTFORGE_BASE_URL")) config.backend.base_url = *v;
  if (auto v = env("PROMPTFORGE_WORKERS")) {
    try {
      config.workers = std::stoi(*v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "PROMPTFORGE_WORKERS is not a number: " + *v);
    }
  }
}

void validate(const TaskConfig& config) {
  if (config.backend.kind != "scripted" && config.backend.kind != "http")
    throw Error(ErrorCode::InvalidConfig, "backend kind must be 'scripted' or 'http', got '" + config.backend.kind + "'");
  if (config.workers < 1) throw Error(ErrorCode::InvalidConfig, "workers must be >= 1");
  if (config.backend.max_in_flight < 1) throw Error(ErrorCode::InvalidConfig, "max_in_flight must be >= 1");
  if (config.temperature && (*config.temperature < 0.0 || *config.temperature > 1.0))
    throw Error(ErrorCode::InvalidConfig, "temperature must lie in [0,1]");
  if (config.max_tokens && *config.max_tokens < 1) throw Error(ErrorCode::InvalidConfig, "max_tokens must be >= 1");
  if (config.context_budget < 1) throw Error(ErrorCode::InvalidConfig, "context_budget must be >= 1");
  if (config.ablation_variants.empty()) throw Error(ErrorCode::InvalidConfig, "variants must not be empty");
  config.schedule.validate();
  validate(config.adapter);
  if (config.task == ToolTask::TestGen && config.adapter.test_class_template.empty())
    throw Error(ErrorCode::InvalidConfig, "testgen needs adapter.test_class_template");
}

// ---------------------------------------------------------------------------
// Corpus

namespace {

bool match_segments(const std::vector<std::string>& pat, std::size_t pi, const std::vector<std::string>& segs,
                    std::size_t si) {
  if (pi == pat.size()) return si == segs.size();
  if (pat[pi] == "**") {
    for (std::size_t k = si; k <= segs.size(); ++k)
      if (match_segments(pat, pi + 1, segs, k)) return true;
    return false;
  }
  if (si == segs.size()) return false;
  if (fnmatch(pat[pi].c_str(), segs[si].c_str(), FNM_PERIOD) != 0) return false;
  return match_segments(pat, pi + 1, segs, si + 1);
}

std::vector<std::string> segments(std::string_view p) {
  std::vector<std::string> out;
  for (auto& s : text::split(p, '/'))
    if (!s.empty() && s != ".") out.push_back(s);
  return out;
}

bool has_wildcard(std::string_view s) { return s.find_first_of("*?[") != std::string_view::npos; }

}  // namespace

bool glob_match(std::string_view pattern, std::string_view path) {
  return match_segments(segments(pattern), 0, segments(path), 0);
}

std::vector<SourceUnit> load_corpus(const std::vector<std::string>& globs, const fs::path& base_dir,
                                    const std::string& language_tag) {
  std::map<std::string, fs::path> found;  // unit path -> file on disk
  for (const auto& glob : globs) {
    const bool absolute = fs::path(glob).is_absolute();
    const auto pat = segments(glob);
    fs::path root = absolute ? fs::path("/") : base_dir;
    std::string prefix;
    std::size_t i = 0;
    for (; i < pat.size() && !has_wildcard(pat[i]); ++i) {
      root /= pat[i];
      prefix += (prefix.empty() ? "" : "/") + pat[i];
    }
    auto consider = [&](const fs::path& file) {
      std::string rel = file.lexically_relative(root).generic_string();
      if (rel == ".") rel.clear();
      std::string name = prefix.empty() ? rel : (rel.empty() ? prefix : prefix + "/" + rel);
      if (absolute) name = "/" + name;
      if (glob_match(glob, name)) found.emplace(name, file);
    };
    std::error_code ec;
    if (fs::is_regular_file(root, ec)) {
      consider(root);
    } else if (fs::is_directory(root, ec)) {
      for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
           it.increment(ec))
        if (it->is_regular_file(ec)) consider(it->path());
    }
  }
  if (found.empty()) throw Error(ErrorCode::InvalidCorpus, "corpus globs matched no files");
  std::vector<SourceUnit> units;
  for (const auto& [name, file] : found) units.push_back({name, text::read_file(file.string()), language_tag});
  return units;
}

}  // namespace promptforge
