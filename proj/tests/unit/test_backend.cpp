#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "promptforge/backend.hpp"

using namespace promptforge;

static ModelRequest request_for(std::string id, double temperature = 0.0, int q = 0) {
  ModelRequest r;
  r.model_id = "m";
  r.prompt = "ping";
  r.temperature = temperature;
  r.stop = {"###"};
  r.key = {std::move(id), PromptVariant::Default, temperature, q};
  return r;
}

TEST_CASE("scripted lookup returns the stored text") {
  ScriptedBank bank;
  bank.add("ping", std::nullopt, 0.0, 0, "pong");
  ScriptedBackend backend(bank);
  auto r = backend.complete(request_for("ping"));
  CHECK(r.text == "pong");
  CHECK(r.finish_reason == FinishReason::Stop);
  CHECK(backend.complete(request_for("ping")).text == r.text);
  CHECK(backend.calls() == 2);
}

TEST_CASE("scripted fallbacks") {
  ScriptedBank bank;
  bank.add("k", PromptVariant::NLOnly, 0.3, 2, "nl text");
  CHECK(complete_scripted(bank, {"k", PromptVariant::NLOnly, 0.3, 2}).text == "nl text");
  CHECK(complete_scripted(bank, {"k", PromptVariant::NLOnly, 0.30000001, 2}).text == "nl text");
  CHECK(complete_scripted(bank, {"k", PromptVariant::Default, 0.3, 2}).finish_reason == FinishReason::Error);

  bank.set_default(std::string(""));
  auto r = complete_scripted(bank, {"absent", PromptVariant::Default, 0.0, 0});
  CHECK(r.text.empty());
  CHECK(r.finish_reason == FinishReason::Stop);

  bank.set_default(PromptVariant::BadEx, "bad");
  CHECK(complete_scripted(bank, {"absent", PromptVariant::BadEx, 0.0, 0}).text == "bad");
  CHECK(complete_scripted(bank, {"absent", PromptVariant::ExOnly, 0.0, 0}).text.empty());
}

TEST_CASE("scripted backend strips stop sequences") {
  ScriptedBank bank;
  bank.add("s", std::nullopt, 0.0, 0, "keep ### drop");
  ScriptedBackend backend(bank);
  CHECK(backend.complete(request_for("s")).text == "keep ");
}

TEST_CASE("bank JSON and merge") {
  auto bank = ScriptedBank::from_json_text(R"({"default": "d", "defaults": {"NLOnly": "n"},
      "entries": [{"instance_id": "a", "completion": "x"},
                  {"instance_id": "a", "variant": "BadEx", "temperature": 0.5, "query_index": 1, "completion": "y"}]})");
  CHECK(bank.size() == 2);
  CHECK(complete_scripted(bank, {"a", PromptVariant::ExOnly, 0.0, 0}).text == "x");
  CHECK(complete_scripted(bank, {"a", PromptVariant::BadEx, 0.5, 1}).text == "y");
  CHECK(complete_scripted(bank, {"zz", PromptVariant::NLOnly, 0.0, 0}).text == "n");

  ScriptedBank pinned;
  pinned.merge(ScriptedBank::from_json_text(R"({"default": "only nl", "entries": []})"), PromptVariant::NLOnly);
  CHECK(complete_scripted(pinned, {"q", PromptVariant::NLOnly, 0.0, 0}).text == "only nl");
  CHECK(complete_scripted(pinned, {"q", PromptVariant::Default, 0.0, 0}).finish_reason == FinishReason::Error);

  CHECK(pftest::code_of([] { ScriptedBank::from_json_text("{"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("request validation") {
  auto r = request_for("x");
  r.temperature = 1.5;
  CHECK(pftest::code_of([&] { validate(r); }) == ErrorCode::InvalidArgument);
  r = request_for("x");
  r.max_tokens = 0;
  CHECK(pftest::code_of([&] { validate(r); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("completion bodies") {
  auto body = nlohmann::json::parse(completion_request_body(request_for("x", 0.4)));
  CHECK(body["model"] == "m");
  CHECK(body["prompt"] == "ping");
  CHECK(body["temperature"].get<double>() == doctest::Approx(0.4));
  CHECK(body["stop"][0] == "###");

  auto r = parse_completion_body(R"({"choices":[{"text":"a###b","finish_reason":"stop"}]})", {"###"});
  CHECK(r.text == "a");
  CHECK(pftest::code_of([] { parse_completion_body(R"({"id":"x"})", {}); }) == ErrorCode::MalformedResponse);
  CHECK(pftest::code_of([] { parse_completion_body("not json", {}); }) == ErrorCode::MalformedResponse);
}

namespace {

/// Local completions server whose first `failures` answers are HTTP 503.
struct FakeServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};
  std::string reply = R"({"choices":[{"text":"pong","finish_reason":"stop"}]})";
  int failures = 0;

  FakeServer() {
    server.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++hits;
      if (req.get_header_value("Authorization") != "Bearer secret") {
        res.status = 401;
        return;
      }
      if (n <= failures) {
        res.status = 503;
        return;
      }
      res.set_content(reply, "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeServer() {
    server.stop();
    thread.join();
  }

  HttpBackendOptions options(std::vector<std::chrono::milliseconds>* sleeps) {
    HttpBackendOptions o;
    o.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    o.api_key = "secret";
    o.retry.max_attempts = 3;
    o.request_timeout = std::chrono::seconds(5);
    o.sleep = [sleeps](std::chrono::milliseconds d) { sleeps->push_back(d); };
    return o;
  }
};

}  // namespace

TEST_CASE("http backend: success") {
  FakeServer srv;
  std::vector<std::chrono::milliseconds> sleeps;
  HttpBackend backend(srv.options(&sleeps));
  auto r = backend.complete(request_for("x"));
  CHECK(r.text == "pong");
  CHECK(sleeps.empty());
}

TEST_CASE("http backend: retries with exponential backoff") {
  FakeServer srv;
  srv.failures = 2;
  std::vector<std::chrono::milliseconds> sleeps;
  HttpBackend backend(srv.options(&sleeps));
  CHECK(backend.complete(request_for("x")).text == "pong");
  CHECK(srv.hits == 3);
  CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(1000), std::chrono::milliseconds(2000)});
}

TEST_CASE("http backend: gives up after max attempts") {
  FakeServer srv;
  srv.failures = 10;
  std::vector<std::chrono::milliseconds> sleeps;
  HttpBackend backend(srv.options(&sleeps));
  CHECK(pftest::code_of([&] { backend.complete(request_for("x")); }) == ErrorCode::BackendUnavailable);
  CHECK(srv.hits == 3);
}

TEST_CASE("http backend: missing choices is malformed") {
  FakeServer srv;
  srv.reply = R"({"object":"text_completion"})";
  std::vector<std::chrono::milliseconds> sleeps;
  HttpBackend backend(srv.options(&sleeps));
  CHECK(pftest::code_of([&] { backend.complete(request_for("x")); }) == ErrorCode::MalformedResponse);
}

TEST_CASE("http backend: missing key") {
  HttpBackendOptions o;
  o.api_key = "";
  CHECK(pftest::code_of([&] { HttpBackend b(o); }) == ErrorCode::BackendUnavailable);
}

TEST_CASE("strip_at_stop cuts at the earliest stop") {
  std::string t = "a---b###c";
  CHECK(strip_at_stop(t, {"###", "---"}));
  CHECK(t == "a");
  std::string u = "plain";
  CHECK_FALSE(strip_at_stop(u, {"###"}));
}
