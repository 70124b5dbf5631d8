#include "promptforge/records.hpp"

#include <nlohmann/json.hpp>

#include "promptforge/text.hpp"

namespace promptforge {

using nlohmann::json;

namespace {

template <class E>
E enum_from(const json& j, std::optional<E> (*parse)(std::string_view), const char* what) {
  const auto v = parse(j.get<std::string>());
  if (!v) throw Error(ErrorCode::InvalidConfig, std::string("unknown ") + what + " in records: " + j.dump());
  return *v;
}

json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }
std::optional<std::string> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

json to_j(const Instance& i) {
  return {{"id", i.id},     {"task", to_string(i.task)}, {"payload", i.payload}, {"context", i.context},
          {"path", i.path}, {"line", i.line},            {"offset", i.offset}};
}
Instance instance_from(const json& j) {
  Instance i;
  i.id = j.at("id").get<std::string>();
  i.task = enum_from<ToolTask>(j.at("task"), parse_task, "task");
  i.payload = j.at("payload").get<std::string>();
  i.context = j.at("context").get<std::map<std::string, std::string>>();
  i.path = j.at("path").get<std::string>();
  i.line = j.at("line").get<std::size_t>();
  i.offset = j.at("offset").get<std::size_t>();
  return i;
}

json to_j(const PromptBundle& p) {
  return {{"instance_id", p.instance_id}, {"variant", to_string(p.variant)}, {"text", p.text},
          {"stop_sequences", p.stop_sequences}, {"temperature", p.temperature}, {"max_tokens", p.max_tokens},
          {"query_index", p.query_index}, {"dropped_examples", p.dropped_examples}};
}
PromptBundle prompt_from(const json& j) {
  PromptBundle p;
  p.instance_id = j.at("instance_id").get<std::string>();
  p.variant = enum_from<PromptVariant>(j.at("variant"), parse_variant, "variant");
  p.text = j.at("text").get<std::string>();
  p.stop_sequences = j.at("stop_sequences").get<std::vector<std::string>>();
  p.temperature = j.at("temperature").get<double>();
  p.max_tokens = j.at("max_tokens").get<int>();
  p.query_index = j.at("query_index").get<int>();
  p.dropped_examples = j.at("dropped_examples").get<int>();
  return p;
}

struct ArtifactToJson {
  json operator()(const Mutant& m) const {
    return {{"kind", "mutant"},
            {"instance_id", m.instance_id},
            {"path", m.path},
            {"line", m.line},
            {"original_line", m.original_line},
            {"mutated_line", m.mutated_line},
            {"compiles", m.compiles},
            {"class", to_string(m.mutant_class)},
            {"tokens_changed", m.tokens_changed},
            {"completion_index", m.completion_index}};
  }
  json operator()(const OracleSpec& o) const {
    return {{"kind", "oracle"}, {"condition", opt(o.condition)}, {"lhs", o.lhs}, {"rhs", o.rhs},
            {"method_id", o.method_id}, {"completion_index", o.completion_index}};
  }
  json operator()(const TestCandidate& t) const {
    return {{"kind", "test"}, {"body", t.body}, {"temperature", t.temperature}, {"query_index", t.query_index},
            {"compiles", t.compiles}, {"normalized_hash", t.normalized_hash},
            {"completion_index", t.completion_index}};
  }
};

Artifact artifact_from(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "mutant") {
    Mutant m;
    m.instance_id = j.at("instance_id").get<std::string>();
    m.path = j.at("path").get<std::string>();
    m.line = j.at("line").get<std::size_t>();
    m.original_line = j.at("original_line").get<std::string>();
    m.mutated_line = j.at("mutated_line").get<std::string>();
    m.compiles = j.at("compiles").get<bool>();
    m.mutant_class = enum_from<MutantClass>(j.at("class"), parse_mutant_class, "mutant class");
    m.tokens_changed = j.at("tokens_changed").get<int>();
    m.completion_index = j.at("completion_index").get<int>();
    return m;
  }
  if (kind == "oracle") {
    OracleSpec o;
    o.condition = opt_from(j, "condition");
    o.lhs = j.at("lhs").get<std::string>();
    o.rhs = j.at("rhs").get<std::string>();
    o.method_id = j.at("method_id").get<std::string>();
    o.completion_index = j.at("completion_index").get<int>();
    return o;
  }
  if (kind == "test") {
    TestCandidate t;
    t.body = j.at("body").get<std::string>();
    t.temperature = j.at("temperature").get<double>();
    t.query_index = j.at("query_index").get<int>();
    t.compiles = j.at("compiles").get<bool>();
    t.normalized_hash = j.at("normalized_hash").get<std::string>();
    t.completion_index = j.at("completion_index").get<int>();
    return t;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown artifact kind in records: " + kind);
}

json to_j(const CoverageMap& map) {
  json rows = json::array();
  for (const auto& [key, covered] : map.lines()) rows.push_back({key.first, key.second, covered ? 1 : 0});
  return rows;
}
CoverageMap coverage_from(const json& j) {
  CoverageMap map;
  for (const auto& row : j) map.set(row.at(0).get<std::string>(), row.at(1).get<int>(), row.at(2).get<int>() != 0);
  return map;
}

json to_j(const RunRecord& r) {
  json prompts = json::array(), artifacts = json::array(), discards = json::array();
  for (const auto& p : r.prompts) prompts.push_back(to_j(p));
  for (const auto& a : r.artifacts) artifacts.push_back(std::visit(ArtifactToJson{}, a));
  for (const auto& d : r.discards)
    discards.push_back({{"raw", d.raw}, {"reason", d.reason}, {"completion_index", d.completion_index}});
  json j = {{"instance", to_j(r.instance)}, {"prompts", prompts},     {"raw_completions", r.raw_completions},
            {"artifacts", artifacts},       {"discards", discards},   {"incomplete", r.incomplete}};
  j["coverage"] = r.coverage ? to_j(*r.coverage) : json(nullptr);
  return j;
}
RunRecord record_from(const json& j) {
  RunRecord r;
  r.instance = instance_from(j.at("instance"));
  for (const auto& p : j.at("prompts")) r.prompts.push_back(prompt_from(p));
  r.raw_completions = j.at("raw_completions").get<std::vector<std::string>>();
  for (const auto& a : j.at("artifacts")) r.artifacts.push_back(artifact_from(a));
  for (const auto& d : j.at("discards"))
    r.discards.push_back({d.at("raw").get<std::string>(), d.at("reason").get<std::string>(),
                          d.at("completion_index").get<int>()});
  r.incomplete = j.at("incomplete").get<bool>();
  if (j.contains("coverage") && !j.at("coverage").is_null()) r.coverage = coverage_from(j.at("coverage"));
  return r;
}

}  // namespace

std::string records_to_json(const RecordSet& set) {
  json records = json::array();
  for (const auto& r : set.records) records.push_back(to_j(r));
  const json doc = {{"task", to_string(set.task)}, {"variant", to_string(set.variant)}, {"records", records}};
  return doc.dump(1) + "\n";
}

RecordSet records_from_json(const std::string& json_text) {
  try {
    const json doc = json::parse(json_text);
    RecordSet set;
    set.task = enum_from<ToolTask>(doc.at("task"), parse_task, "task");
    set.variant = enum_from<PromptVariant>(doc.at("variant"), parse_variant, "variant");
    for (const auto& r : doc.at("records")) set.records.push_back(record_from(r));
    return set;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("records file is not valid: ") + e.what());
  }
}

RecordSet load_records(const std::string& path) { return records_from_json(text::read_file(path)); }

void save_records(const RecordSet& set, const std::string& path) { text::write_file(path, records_to_json(set)); }

}  // namespace promptforge
