#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptforge {

enum class ToolTask { Mutation, OracleGen, TestGen };

/// Prompt ablations: Default keeps description and examples, NLOnly drops
/// the examples, ExOnly drops the description, BadEx swaps in the
/// adversarial example bank.
enum class PromptVariant { Default, NLOnly, ExOnly, BadEx };

std::string_view to_string(ToolTask task);
std::string_view to_string(PromptVariant variant);
/// Human label used in report rows ("NL-only", ...).
std::string_view display_name(PromptVariant variant);

/// Accepts "mutate"/"mutation", "oracle"/"oraclegen", "testgen".
std::optional<ToolTask> parse_task(std::string_view s);
/// Accepts "Default", "NLOnly", "nl-only", "ExOnly", "ex-only", "BadEx", "bad-ex" (case-insensitive).
std::optional<PromptVariant> parse_variant(std::string_view s);

inline constexpr PromptVariant kAllVariants[] = {PromptVariant::Default, PromptVariant::NLOnly,
                                                 PromptVariant::ExOnly, PromptVariant::BadEx};

/// One unit of work extracted from a corpus.
struct Instance {
  std::string id;
  ToolTask task = ToolTask::Mutation;
  std::string payload;
  std::map<std::string, std::string> context;

  // Location of the payload inside its source unit; drives record ordering.
  std::string path;
  std::size_t line = 0;
  std::size_t offset = 0;

  bool operator==(const Instance&) const = default;
};

/// Orders instances by (path, byte offset, id).
bool instance_order(const Instance& a, const Instance& b);

struct PromptBundle {
  std::string instance_id;
  PromptVariant variant = PromptVariant::Default;
  std::string text;
  std::vector<std::string> stop_sequences;
  double temperature = 0.0;
  int max_tokens = 256;
  int query_index = 0;
  /// Examples dropped from the bank to fit the context budget.
  int dropped_examples = 0;

  bool operator==(const PromptBundle&) const = default;
};

/// Identifies a completion call independently of the prompt text; the
/// scripted backend is keyed on it.
struct RequestKey {
  std::string instance_id;
  PromptVariant variant = PromptVariant::Default;
  double temperature = 0.0;
  int query_index = 0;
};

struct ModelRequest {
  std::string model_id;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 256;
  std::vector<std::string> stop;
  int n = 1;
  RequestKey key;
};

/// Throws Error(InvalidArgument) when the request breaks its invariants.
void validate(const ModelRequest& request);

enum class FinishReason { Stop, Length, Error };
std::string_view to_string(FinishReason reason);

struct ModelResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  long latency_ms = 0;
};

/// Cuts `text` at the earliest occurrence of any stop sequence.
/// Returns true when a stop sequence was found.
bool strip_at_stop(std::string& text, const std::vector<std::string>& stops);

}  // namespace promptforge
