// Copyright 2026 The Intercomm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "doctest.h"
#include "intercomm/backend.h"
#include "intercomm/error.h"
#include "intercomm/json_fwd.h"

using namespace intercomm;

namespace {

std::string completion(const std::string& content) {
  ordered_json j;
  j["choices"] = ordered_json::array(
      {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}});
  return j.dump();
}

std::string logprob_response(const std::vector<std::pair<std::string, double>>& alts) {
  ordered_json top = ordered_json::array();
  for (const auto& [tok, p] : alts) {
    top.push_back({{"token", tok}, {"logprob", std::log(p)}});
  }
  ordered_json first = {{"token", alts.front().first},
                        {"logprob", std::log(alts.front().second)},
                        {"top_logprobs", top}};
  ordered_json j;
  j["choices"] = ordered_json::array(
      {{{"index", 0},
        {"message", {{"role", "assistant"}, {"content", alts.front().first}}},
        {"logprobs", {{"content", ordered_json::array({first})}}}}});
  return j.dump();
}

// Chat-completions stub on an ephemeral port.
class Stub {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit Stub(Handler h) : handler_(std::move(h)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   ++hits;
                   {
                     std::lock_guard<std::mutex> lock(mu);
                     bodies.push_back(req.body);
                     headers.push_back(req.headers);
                   }
                   handler_(req, res);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Stub() {
    server_.stop();
    thread_.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }

  std::atomic<int> hits{0};
  std::mutex mu;
  std::vector<std::string> bodies;
  std::vector<httplib::Headers> headers;

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

BackendConfig http_config(const std::string& url) {
  BackendConfig c;
  c.kind = BackendKind::kHttp;
  c.endpoint = url;
  c.model = "stub-model";
  c.timeout_ms = 2000;
  c.initial_backoff_ms = 250;
  c.max_backoff_ms = 1000;
  c.api_key_env = "INTERCOMM_TEST_KEY";
  return c;
}

ChatExchange hello() {
  ChatExchange ex;
  ex.system_prompt = "be brief";
  ex.messages = {{"user", "hello"}};
  return ex;
}

SpeakRequest speak(const ChatExchange& ex) {
  SpeakRequest r;
  r.agent = "a";
  r.exchange = ex;
  return r;
}

}  // namespace

TEST_CASE("completion text is tokenized on whitespace") {
  Stub stub([](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion("a loud  morning device"), "application/json");
  });
  HttpBackend b(http_config(stub.url()), [](auto) {});
  const auto tokens = generate_message(b, speak(hello()));
  CHECK(tokens == TokenList{"a", "loud", "morning", "device"});
  CHECK(tokens.size() == 4);
  CHECK(b.stats().requests == 1);
}

TEST_CASE("server errors are retried with capped exponential backoff") {
  std::atomic<int> calls{0};
  Stub stub([&](const httplib::Request&, httplib::Response& res) {
    if (++calls <= 3) {
      res.status = calls == 1 ? 429 : 503;
      return;
    }
    res.set_content(completion("ok"), "application/json");
  });
  std::vector<long> sleeps;
  auto cfg = http_config(stub.url());
  cfg.retries = 3;
  cfg.initial_backoff_ms = 300;
  cfg.max_backoff_ms = 700;
  HttpBackend b(cfg, [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); });
  CHECK(b.complete(speak(hello())) == "ok");
  CHECK(sleeps == std::vector<long>{300, 600, 700});
  CHECK(b.stats().requests == 4);
  CHECK(b.stats().retries == 3);
}

TEST_CASE("exhausted retries raise a backend error") {
  Stub stub([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  auto cfg = http_config(stub.url());
  cfg.retries = 2;
  HttpBackend b(cfg, [](auto) {});
  CHECK_THROWS_AS(b.complete(speak(hello())), BackendError);
  CHECK(stub.hits == 3);
}

TEST_CASE("client errors are not retried") {
  Stub stub([](const httplib::Request&, httplib::Response& res) { res.status = 400; });
  HttpBackend b(http_config(stub.url()), [](auto) {});
  CHECK_THROWS_AS(b.complete(speak(hello())), BackendError);
  CHECK(stub.hits == 1);
}

TEST_CASE("an unreachable server is a transport failure") {
  std::string url;
  {
    Stub gone([](const httplib::Request&, httplib::Response&) {});
    url = gone.url();
  }
  auto cfg = http_config(url);
  cfg.retries = 1;
  HttpBackend b(cfg, [](auto) {});
  CHECK_THROWS_AS(b.complete(speak(hello())), BackendError);
  CHECK(b.stats().requests == 2);
}

TEST_CASE("affirmative probability from log-probabilities") {
  Stub stub([](const httplib::Request& req, httplib::Response& res) {
    const auto j = ordered_json::parse(req.body);
    CHECK(j.at("logprobs") == true);
    CHECK(j.at("max_tokens") == 1);
    res.set_content(logprob_response({{"Yes", 0.73}, {"No", 0.27}}),
                    "application/json");
  });
  auto cfg = http_config(stub.url());
  cfg.request_logprobs = true;
  HttpBackend b(cfg, [](auto) {});
  const double p = b.score_affirmative(hello());
  CHECK(p == doctest::Approx(0.73).epsilon(1e-9));
}

TEST_CASE("probability parsing sums yes variants") {
  CHECK(*parse_affirmative_probability(
            logprob_response({{"No", 0.5}, {"Yes", 0.3}, {" yes", 0.1}})) ==
        doctest::Approx(0.4));
  CHECK(*parse_affirmative_probability(logprob_response({{"No", 0.9}})) ==
        doctest::Approx(0.0));
  CHECK_FALSE(parse_affirmative_probability(completion("Yes")));
  CHECK_THROWS_AS(parse_affirmative_probability("{"), BackendError);
}

TEST_CASE("scoring without log-probabilities reads the verdict") {
  Stub stub([](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion("Yes."), "application/json");
  });
  HttpBackend b(http_config(stub.url()), [](auto) {});
  CHECK(b.score_affirmative(hello()) == 1.0);
}

TEST_CASE("missing log-probabilities are a configuration error") {
  Stub stub([](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion("Yes"), "application/json");
  });
  auto cfg = http_config(stub.url());
  cfg.request_logprobs = true;
  HttpBackend b(cfg, [](auto) {});
  CHECK_THROWS_AS(b.score_affirmative(hello()), ConfigError);
}

TEST_CASE("responses are cached by request body") {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("intercomm_cache_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  Stub stub([](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion("cached words"), "application/json");
  });
  auto cfg = http_config(stub.url());
  cfg.cache_dir = dir;
  {
    HttpBackend b(cfg, [](auto) {});
    CHECK(b.complete(speak(hello())) == "cached words");
    CHECK(b.complete(speak(hello())) == "cached words");
    CHECK(b.stats().cache_hits == 1);
  }
  HttpBackend again(cfg, [](auto) {});
  CHECK(again.complete(speak(hello())) == "cached words");
  CHECK(stub.hits == 1);
  ChatExchange other = hello();
  other.messages[0].content = "different";
  CHECK(again.complete(speak(other)) == "cached words");
  CHECK(stub.hits == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cache digest is sha-256") {
  CHECK(ResponseCache::digest("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("request body is deterministic and carries the exchange") {
  HttpBackend b(http_config("http://127.0.0.1:9/v1/chat/completions"), [](auto) {});
  const auto body = b.request_body(hello(), false);
  CHECK(body == b.request_body(hello(), false));
  const auto j = ordered_json::parse(body);
  CHECK(j["model"] == "stub-model");
  CHECK(j["messages"][0]["role"] == "system");
  CHECK(j["messages"][1]["content"] == "hello");
  CHECK(j["max_tokens"] == 512);
  CHECK_FALSE(j.contains("logprobs"));
}

TEST_CASE("headers carry the key and a correlation id") {
  ::setenv("INTERCOMM_TEST_KEY", "sekret", 1);
  Stub stub([](const httplib::Request& req, httplib::Response& res) {
    res.set_header("X-Request-Id", req.get_header_value("X-Request-Id"));
    res.set_content(completion("fine"), "application/json");
  });
  HttpBackend b(http_config(stub.url()), [](auto) {});
  b.complete(speak(hello()));
  b.complete(speak(hello()));
  ::unsetenv("INTERCOMM_TEST_KEY");
  std::lock_guard<std::mutex> lock(stub.mu);
  REQUIRE(stub.headers.size() == 2);
  CHECK(stub.headers[0].find("Authorization")->second == "Bearer sekret");
  CHECK(stub.headers[0].find("X-Request-Id")->second !=
        stub.headers[1].find("X-Request-Id")->second);
}

TEST_CASE("a mismatched correlation id is rejected") {
  Stub stub([](const httplib::Request&, httplib::Response& res) {
    res.set_header("X-Request-Id", "someone-else");
    res.set_content(completion("fine"), "application/json");
  });
  HttpBackend b(http_config(stub.url()), [](auto) {});
  CHECK_THROWS_AS(b.complete(speak(hello())), BackendError);
}

TEST_CASE("in-flight requests are bounded") {
  std::atomic<int> now{0}, peak{0};
  Stub stub([&](const httplib::Request&, httplib::Response& res) {
    const int n = ++now;
    int p = peak.load();
    while (n > p && !peak.compare_exchange_weak(p, n)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    --now;
    res.set_content(completion("x"), "application/json");
  });
  auto cfg = http_config(stub.url());
  cfg.max_in_flight = 2;
  HttpBackend b(cfg, [](auto) {});
  std::vector<std::thread> pool;
  for (int k = 0; k < 8; ++k) {
    pool.emplace_back([&] { b.complete(speak(hello())); });
  }
  for (auto& t : pool) t.join();
  CHECK(stub.hits == 8);
  CHECK(peak.load() <= 2);
}

TEST_CASE("malformed completions") {
  CHECK_THROWS_AS(parse_completion_content("{}"), BackendError);
  CHECK_THROWS_AS(parse_completion_content("nope"), BackendError);
  CHECK(parse_completion_content(
            R"({"choices":[{"message":{"content":null}}]})") == "");
}

TEST_CASE("backend configuration checks") {
  BackendConfig c;
  c.kind = BackendKind::kHttp;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.endpoint = "http://x/y";
  c.model = "m";
  CHECK_NOTHROW(validate(c));
  auto bad = c;
  bad.max_backoff_ms = 1;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  bad.max_in_flight = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  bad.top_logprobs = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  BackendConfig scripted;
  CHECK_THROWS_AS(HttpBackend{scripted}, ConfigError);
}

TEST_CASE("chat exchange checks and merging") {
  ChatExchange ex;
  ex.messages = {{"user", "a"}, {"user", "b"}, {"assistant", "c"}};
  const auto merged = merge_consecutive_roles(ex);
  REQUIRE(merged.messages.size() == 2);
  CHECK(merged.messages[0].content == "a\n\nb");
  ex.messages.push_back({"robot", "?"});
  CHECK_THROWS(validate(ex));
  ChatExchange late;
  late.messages = {{"user", "a"}, {"system", "b"}};
  CHECK_THROWS(validate(late));
}

TEST_CASE("scripted backend scores cycle") {
  ScriptedBackend b([](const SpeakRequest&) { return std::string("No"); },
                    {0.2, 0.9});
  ChatExchange ex;
  CHECK(b.score_affirmative(ex) == 0.2);
  CHECK(b.score_affirmative(ex) == 0.9);
  CHECK(b.score_affirmative(ex) == 0.2);
  ScriptedBackend v([](const SpeakRequest&) { return std::string("yes please"); });
  CHECK(v.score_affirmative(ex) == 1.0);
  CHECK(generate_message(v, SpeakRequest{}) == TokenList{"yes", "please"});
}
