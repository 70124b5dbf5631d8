#include <cmath>

#include <nlohmann/json.hpp>

#include "promptforge/backend.hpp"
#include "promptforge/error.hpp"
#include "promptforge/text.hpp"

namespace promptforge {

namespace {

constexpr int kAnyVariant = 4;

long milli(double temperature) { return std::lround(temperature * 1000.0); }

}  // namespace

void ScriptedBank::add(std::string instance_id, std::optional<PromptVariant> variant,
                       double temperature, int query_index, std::string completion) {
  const int v = variant ? static_cast<int>(*variant) : kAnyVariant;
  entries_[Key{std::move(instance_id), v, milli(temperature), query_index}] = std::move(completion);
}

const std::string* ScriptedBank::find(const RequestKey& key) const {
  const long t = milli(key.temperature);
  if (auto it = entries_.find(Key{key.instance_id, static_cast<int>(key.variant), t, key.query_index});
      it != entries_.end())
    return &it->second;
  // A variant default shadows the wildcard entries for that variant.
  if (variant_defaults_.count(static_cast<int>(key.variant))) return nullptr;
  if (auto it = entries_.find(Key{key.instance_id, kAnyVariant, t, key.query_index});
      it != entries_.end())
    return &it->second;
  return nullptr;
}

void ScriptedBank::set_default(PromptVariant variant, std::string text) {
  variant_defaults_[static_cast<int>(variant)] = std::move(text);
}

const std::string* ScriptedBank::fallback(PromptVariant variant) const {
  if (auto it = variant_defaults_.find(static_cast<int>(variant)); it != variant_defaults_.end())
    return &it->second;
  return default_ ? &*default_ : nullptr;
}

void ScriptedBank::merge(const ScriptedBank& other, std::optional<PromptVariant> as_variant) {
  for (const auto& [key, text] : other.entries_) {
    Key k = key;
    if (as_variant) std::get<1>(k) = static_cast<int>(*as_variant);
    entries_[k] = text;
  }
  if (as_variant) {
    if (other.default_) set_default(*as_variant, *other.default_);
  } else {
    if (other.default_) default_ = other.default_;
    for (const auto& [v, text] : other.variant_defaults_) variant_defaults_[v] = text;
  }
}

ScriptedBank ScriptedBank::from_json_text(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("scripted bank is not valid JSON: ") + e.what());
  }

  ScriptedBank bank;
  const nlohmann::json* entries = &doc;
  if (doc.is_object()) {
    if (doc.contains("default") && !doc["default"].is_null())
      bank.set_default(doc["default"].get<std::string>());
    if (doc.contains("defaults")) {
      for (const auto& item : doc["defaults"].items()) {
        const auto variant = parse_variant(item.key());
        if (!variant)
          throw Error(ErrorCode::InvalidConfig, "unknown variant in scripted bank defaults: " + item.key());
        bank.set_default(*variant, item.value().get<std::string>());
      }
    }
    if (!doc.contains("entries")) return bank;
    entries = &doc["entries"];
  }
  if (!entries->is_array()) throw Error(ErrorCode::InvalidConfig, "scripted bank entries must be an array");

  for (const auto& e : *entries) {
    if (!e.is_object() || !e.contains("instance_id") || !e.contains("completion"))
      throw Error(ErrorCode::InvalidConfig, "scripted bank entry needs instance_id and completion");
    std::optional<PromptVariant> variant;
    if (e.contains("variant") && e["variant"].get<std::string>() != "*") {
      variant = parse_variant(e["variant"].get<std::string>());
      if (!variant)
        throw Error(ErrorCode::InvalidConfig, "unknown variant in scripted bank: " + e["variant"].dump());
    }
    bank.add(e["instance_id"].get<std::string>(), variant, e.value("temperature", 0.0),
             e.value("query_index", 0), e["completion"].get<std::string>());
  }
  return bank;
}

ScriptedBank ScriptedBank::load(const std::string& path) {
  return from_json_text(text::read_file(path));
}

ModelResponse complete_scripted(const ScriptedBank& bank, const RequestKey& key) {
  if (const std::string* hit = bank.find(key)) return {*hit, FinishReason::Stop, 0};
  if (const std::string* fallback = bank.fallback(key.variant)) return {*fallback, FinishReason::Stop, 0};
  return {"", FinishReason::Error, 0};
}

ModelResponse ScriptedBackend::complete(const ModelRequest& request) {
  validate(request);
  ++calls_;
  ModelResponse response = complete_scripted(bank_, request.key);
  if (response.finish_reason == FinishReason::Stop) strip_at_stop(response.text, request.stop);
  return response;
}

}  // namespace promptforge
