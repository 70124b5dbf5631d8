#include "promptforge/types.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

#include "promptforge/error.hpp"

namespace promptforge {

std::string_view to_string(ToolTask task) {
  switch (task) {
    case ToolTask::Mutation: return "mutate";
    case ToolTask::OracleGen: return "oracle";
    case ToolTask::TestGen: return "testgen";
  }
  return "?";
}

std::string_view to_string(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::Default: return "Default";
    case PromptVariant::NLOnly: return "NLOnly";
    case PromptVariant::ExOnly: return "ExOnly";
    case PromptVariant::BadEx: return "BadEx";
  }
  return "?";
}

std::string_view display_name(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::Default: return "Default";
    case PromptVariant::NLOnly: return "NL-only";
    case PromptVariant::ExOnly: return "Ex-only";
    case PromptVariant::BadEx: return "Bad-ex";
  }
  return "?";
}

namespace {
std::string lower_alnum(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}
}  // namespace

std::optional<ToolTask> parse_task(std::string_view s) {
  const std::string k = lower_alnum(s);
  if (k == "mutate" || k == "mutation") return ToolTask::Mutation;
  if (k == "oracle" || k == "oraclegen") return ToolTask::OracleGen;
  if (k == "testgen") return ToolTask::TestGen;
  return std::nullopt;
}

std::optional<PromptVariant> parse_variant(std::string_view s) {
  const std::string k = lower_alnum(s);
  if (k == "default") return PromptVariant::Default;
  if (k == "nlonly") return PromptVariant::NLOnly;
  if (k == "exonly") return PromptVariant::ExOnly;
  if (k == "badex") return PromptVariant::BadEx;
  return std::nullopt;
}

bool instance_order(const Instance& a, const Instance& b) {
  return std::tie(a.path, a.offset, a.id) < std::tie(b.path, b.offset, b.id);
}

void validate(const ModelRequest& r) {
  if (!(r.temperature >= 0.0 && r.temperature <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "temperature must lie in [0,1]");
  if (r.max_tokens < 1) throw Error(ErrorCode::InvalidArgument, "max_tokens must be >= 1");
  if (r.stop.empty() || r.stop.size() > 4)
    throw Error(ErrorCode::InvalidArgument, "between 1 and 4 stop sequences required");
  if (r.n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Error: return "error";
  }
  return "?";
}

bool strip_at_stop(std::string& text, const std::vector<std::string>& stops) {
  std::size_t cut = std::string::npos;
  for (const auto& stop : stops) {
    if (stop.empty()) continue;
    cut = std::min(cut, text.find(stop));
  }
  if (cut == std::string::npos) return false;
  text.resize(cut);
  return true;
}

}  // namespace promptforge
