#include <httplib.h>

#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "promptforge/backend.hpp"
#include "promptforge/error.hpp"

namespace promptforge {

namespace {

bool transient_status(int status) { return status == 429 || status >= 500; }

// Releases a semaphore slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

}  // namespace

std::string completion_request_body(const ModelRequest& request) {
  nlohmann::json body = {
      {"model", request.model_id},
      {"prompt", request.prompt},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
      {"stop", request.stop},
      {"n", request.n},
  };
  return body.dump();
}

ModelResponse parse_completion_body(const std::string& body, const std::vector<std::string>& stops) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::MalformedResponse, "completion response is not JSON");
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty())
    throw Error(ErrorCode::MalformedResponse, "completion response has no choices");
  const auto& choice = doc["choices"][0];
  if (!choice.is_object() || !choice.contains("text") || !choice["text"].is_string())
    throw Error(ErrorCode::MalformedResponse, "completion response has no choices[0].text");

  ModelResponse response;
  response.text = choice["text"].get<std::string>();
  const std::string reason = choice.value("finish_reason", std::string("stop"));
  response.finish_reason = reason == "length" ? FinishReason::Length : FinishReason::Stop;
  // Servers normally omit the stop sequence, but some echo it back.
  if (strip_at_stop(response.text, stops)) response.finish_reason = FinishReason::Stop;
  return response;
}

HttpBackend::HttpBackend(HttpBackendOptions options)
    : options_(std::move(options)), in_flight_(std::max(1, std::min(options_.max_in_flight, 1024))) {
  if (options_.api_key.empty())
    throw Error(ErrorCode::BackendUnavailable, std::string(kApiKeyEnv) + " is not set");
  if (options_.retry.max_attempts < 1) options_.retry.max_attempts = 1;
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

  const std::string& url = options_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorCode::InvalidConfig, "base_url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::api_key_from_env() {
  const char* key = std::getenv(kApiKeyEnv);
  if (key == nullptr || *key == '\0')
    throw Error(ErrorCode::BackendUnavailable, std::string(kApiKeyEnv) + " is not set");
  return key;
}

ModelResponse HttpBackend::complete(const ModelRequest& request) {
  validate(request);
  SlotGuard slot(in_flight_);

  const std::string body = completion_request_body(request);
  const httplib::Headers headers = {{"Authorization", "Bearer " + options_.api_key}};
  std::string last_error = "no attempt made";
  auto delay = options_.retry.base_delay;

  for (int attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
    const auto started = std::chrono::steady_clock::now();
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(options_.request_timeout);
    client.set_read_timeout(options_.request_timeout);
    auto result = client.Post(path_prefix_ + "/completions", headers, body, "application/json");

    if (result && result->status == 200) {
      ModelResponse response = parse_completion_body(result->body, request.stop);
      response.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - started)
                                .count();
      return response;
    }
    if (result && !transient_status(result->status))
      throw Error(ErrorCode::BackendUnavailable,
                  "completion endpoint returned HTTP " + std::to_string(result->status));

    last_error = result ? "HTTP " + std::to_string(result->status) : httplib::to_string(result.error());
    if (attempt < options_.retry.max_attempts) {
      options_.sleep(delay);
      delay = std::chrono::milliseconds(
          static_cast<long>(static_cast<double>(delay.count()) * options_.retry.factor));
    }
  }
  throw Error(ErrorCode::BackendUnavailable,
              "completion endpoint unavailable after " + std::to_string(options_.retry.max_attempts) +
                  " attempts: " + last_error);
}

}  // namespace promptforge
