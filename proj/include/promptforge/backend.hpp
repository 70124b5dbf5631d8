#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <tuple>

#include "promptforge/types.hpp"

namespace promptforge {

/// Uniform completion interface. Implementations must be callable from
/// several pipeline workers at once.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  /// Throws Error(BackendUnavailable) once retries are exhausted and
  /// Error(MalformedResponse) when the server answer has no completion text.
  virtual ModelResponse complete(const ModelRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Scripted backend

/// Canned completions keyed by (instance id, variant, temperature, query index).
/// An entry with no variant matches every variant. Temperatures are compared
/// at millesimal resolution.
class ScriptedBank {
 public:
  void add(std::string instance_id, std::optional<PromptVariant> variant, double temperature,
           int query_index, std::string completion);
  void set_default(std::optional<std::string> text) { default_ = std::move(text); }
  /// Fallback used only for requests of one variant; wins over the plain
  /// default and over wildcard entries.
  void set_default(PromptVariant variant, std::string text);

  const std::string* find(const RequestKey& key) const;
  const std::optional<std::string>& fallback() const { return default_; }
  /// Variant default when set, else the plain default.
  const std::string* fallback(PromptVariant variant) const;
  std::size_t size() const { return entries_.size(); }

  /// Copies every entry of `other` (later entries win). With `as_variant`
  /// set, entries and the default of `other` are pinned to that variant.
  void merge(const ScriptedBank& other, std::optional<PromptVariant> as_variant = std::nullopt);

  /// Accepts either a JSON array of {instance_id, variant, temperature,
  /// query_index, completion} or an object {"default": ..., "entries": [...]}.
  /// A missing or "*" variant is a wildcard; temperature and query_index
  /// default to 0.
  static ScriptedBank from_json_text(const std::string& json_text);
  static ScriptedBank load(const std::string& path);

 private:
  // variant index 4 encodes the wildcard
  using Key = std::tuple<std::string, int, long, int>;
  std::map<Key, std::string> entries_;
  std::optional<std::string> default_;
  std::map<int, std::string> variant_defaults_;
};

/// Pure lookup: the stored entry, else the variant or plain default (Stop),
/// else an Error response with empty text.
ModelResponse complete_scripted(const ScriptedBank& bank, const RequestKey& key);

class ScriptedBackend final : public ModelBackend {
 public:
  explicit ScriptedBackend(ScriptedBank bank) : bank_(std::move(bank)) {}

  ModelResponse complete(const ModelRequest& request) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  const ScriptedBank bank_;
  std::atomic<std::size_t> calls_{0};
};

// ---------------------------------------------------------------------------
// HTTP backend (OpenAI-compatible /completions)

struct RetryPolicy {
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  int max_attempts = 5;
};

struct HttpBackendOptions {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  RetryPolicy retry;
  int max_in_flight = 10;
  std::chrono::seconds request_timeout{120};
  /// Replaced in tests to avoid real sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;
};

class HttpBackend final : public ModelBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);
  ~HttpBackend() override;

  ModelResponse complete(const ModelRequest& request) override;

  /// Reads the key from PROMPTFORGE_API_KEY; throws BackendUnavailable naming
  /// the variable when it is unset or empty.
  static std::string api_key_from_env();

 private:
  HttpBackendOptions options_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::counting_semaphore<1024> in_flight_;
};

inline constexpr const char* kApiKeyEnv = "PROMPTFORGE_API_KEY";

/// Builds the JSON body sent to `<base_url>/completions`.
std::string completion_request_body(const ModelRequest& request);

/// Extracts choices[0] from a completions response body; throws
/// Error(MalformedResponse) when the text field is missing.
ModelResponse parse_completion_body(const std::string& body, const std::vector<std::string>& stops);

}  // namespace promptforge
