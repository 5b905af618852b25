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

#include "intercomm/backend.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "intercomm/error.h"
#include "intercomm/json_fwd.h"
#include "intercomm/policy.h"

namespace intercomm {

void validate(const ChatExchange& ex) {
  bool started = false;
  for (const auto& m : ex.messages) {
    if (m.role == "system") {
      if (started) {
        throw StructuralError("system message after the conversation began");
      }
    } else if (m.role == "user" || m.role == "assistant") {
      started = true;
    } else {
      throw StructuralError("unknown chat role: " + m.role);
    }
  }
}

ChatExchange merge_consecutive_roles(ChatExchange ex) {
  std::vector<ChatMessage> merged;
  for (auto& m : ex.messages) {
    if (!merged.empty() && merged.back().role == m.role) {
      merged.back().content += "\n\n";
      merged.back().content += m.content;
    } else {
      merged.push_back(std::move(m));
    }
  }
  ex.messages = std::move(merged);
  return ex;
}

TokenList generate_message(AgentBackend& backend, const SpeakRequest& request) {
  return backend.tokenizer().tokenize(backend.complete(request));
}

ScriptedBackend::ScriptedBackend(Script script, std::vector<double> scores)
    : script_(std::move(script)), scores_(std::move(scores)) {
  for (double s : scores_) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw ConfigError("declared scores must lie in [0, 1]");
    }
  }
}

std::string ScriptedBackend::complete(const SpeakRequest& request) {
  return script_(request);
}

double ScriptedBackend::score_affirmative(const ChatExchange& exchange) {
  if (!scores_.empty()) return scores_[next_score_++ % scores_.size()];
  SpeakRequest req;
  req.exchange = exchange;
  return parse_verdict(script_(req)).value_or(false) ? 1.0 : 0.0;
}

void validate(const BackendConfig& c) {
  if (c.kind == BackendKind::kHttp) {
    if (!c.endpoint || c.endpoint->empty()) {
      throw ConfigError("http backend needs an endpoint");
    }
    if (!c.model || c.model->empty()) {
      throw ConfigError("http backend needs a model");
    }
  }
  if (!(c.temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (c.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (c.timeout_ms < 1) throw ConfigError("timeout_ms must be >= 1");
  if (c.retries < 0) throw ConfigError("retries must be >= 0");
  if (c.initial_backoff_ms < 0 || c.max_backoff_ms < c.initial_backoff_ms) {
    throw ConfigError("backoff bounds are inconsistent");
  }
  if (c.top_logprobs < 1) throw ConfigError("top_logprobs must be >= 1");
  if (c.max_in_flight < 1 || c.max_in_flight > 1024) {
    throw ConfigError("max_in_flight must lie in [1, 1024]");
  }
}

// Response cache

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create cache dir " + dir_.string());
}

std::string ResponseCache::digest(const std::string& body) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(body.data(), body.size(), md, &len, EVP_sha256(), nullptr) !=
      1) {
    throw Error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::filesystem::path ResponseCache::path_for(
    const std::string& request_body) const {
  return dir_ / (digest(request_body) + ".json");
}

std::optional<std::string> ResponseCache::get(
    const std::string& request_body) const {
  const auto path = path_for(request_body);
  std::shared_lock lock(mu_);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ResponseCache::put(const std::string& request_body,
                        const std::string& response_body) {
  const auto path = path_for(request_body);
  auto tmp = path;
  tmp += ".tmp";
  std::unique_lock lock(mu_);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << response_body;
    if (!out) throw Error("cannot write cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// HTTP backend

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint must be an absolute URL: " + url);
  }
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpBackend::HttpBackend(BackendConfig config, SleepFn sleep)
    : config_(std::move(config)),
      sleep_(std::move(sleep)),
      in_flight_(std::clamp(config_.max_in_flight, 1, 1024)) {
  validate(config_);
  if (config_.kind != BackendKind::kHttp) {
    throw ConfigError("HttpBackend needs an http config");
  }
  if (!sleep_) {
    sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  if (config_.cache_dir) {
    cache_ = std::make_unique<ResponseCache>(*config_.cache_dir);
  }
}

std::string HttpBackend::request_body(const ChatExchange& exchange,
                                      bool with_logprobs) const {
  validate(exchange);
  ordered_json j;
  j["model"] = *config_.model;
  auto messages = ordered_json::array();
  if (!exchange.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", exchange.system_prompt}});
  }
  for (const auto& m : exchange.messages) {
    ordered_json mj;
    mj["role"] = m.role;
    mj["content"] = m.content;
    messages.push_back(std::move(mj));
  }
  j["messages"] = std::move(messages);
  j["temperature"] = config_.temperature;
  j["max_tokens"] = with_logprobs ? 1 : config_.max_tokens;
  if (with_logprobs) {
    j["logprobs"] = true;
    j["top_logprobs"] = config_.top_logprobs;
  }
  return j.dump();
}

std::string HttpBackend::post(const std::string& body) {
  if (cache_) {
    if (auto hit = cache_->get(body)) {
      ++cache_hits_;
      return *hit;
    }
  }
  const Url url = split_url(*config_.endpoint);
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str());
      key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  const auto correlation = std::to_string(next_correlation_id_++);
  headers.emplace("X-Request-Id", correlation);

  std::string last_error;
  auto backoff = std::chrono::milliseconds(config_.initial_backoff_ms);
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      ++retries_;
      spdlog::debug("request {}: retry {} after {} ms ({})", correlation,
                    attempt, backoff.count(), last_error);
      sleep_(backoff);
      backoff = std::min(backoff * 2,
                         std::chrono::milliseconds(config_.max_backoff_ms));
    }
    httplib::Client client(url.origin);
    const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    ++requests_;
    auto res = client.Post(url.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      if (res->has_header("X-Request-Id") &&
          res->get_header_value("X-Request-Id") != correlation) {
        throw BackendError("response correlation id mismatch for request " +
                           correlation);
      }
      if (cache_) cache_->put(body, res->body);
      return res->body;
    }
    last_error = "HTTP " + std::to_string(res->status);
    if (!retryable(res->status)) break;
  }
  throw BackendError("request " + correlation + " failed: " + last_error);
}

std::string parse_completion_content(const std::string& response_body) {
  try {
    const auto j = ordered_json::parse(response_body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return {};
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed completion response: ") +
                       e.what());
  }
}

namespace {

constexpr double kNoLogprob = -std::numeric_limits<double>::infinity();

bool is_yes_token(std::string tok) {
  tok.erase(std::remove_if(tok.begin(), tok.end(),
                           [](unsigned char c) {
                             return std::isspace(c) || std::ispunct(c);
                           }),
            tok.end());
  std::transform(tok.begin(), tok.end(), tok.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return tok == "yes";
}

}  // namespace

std::optional<double> parse_affirmative_probability(
    const std::string& response_body) {
  ordered_json j;
  try {
    j = ordered_json::parse(response_body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed completion response: ") +
                       e.what());
  }
  const auto* choice = j.contains("choices") && j["choices"].is_array() &&
                               !j["choices"].empty()
                           ? &j["choices"][0]
                           : nullptr;
  if (!choice || !choice->contains("logprobs") ||
      !(*choice)["logprobs"].is_object()) {
    return std::nullopt;
  }
  const auto& lp = (*choice)["logprobs"];
  if (!lp.contains("content") || !lp["content"].is_array() ||
      lp["content"].empty()) {
    return std::nullopt;
  }
  const auto& first = lp["content"][0];
  double p = 0.0;
  bool seen_first = false;
  const std::string first_token = first.value("token", "");
  if (first.contains("top_logprobs") && first["top_logprobs"].is_array()) {
    for (const auto& alt : first["top_logprobs"]) {
      const std::string tok = alt.value("token", "");
      if (tok == first_token) seen_first = true;
      if (is_yes_token(tok)) p += std::exp(alt.value("logprob", kNoLogprob));
    }
  }
  if (!seen_first && is_yes_token(first_token)) {
    p += std::exp(first.value("logprob", kNoLogprob));
  }
  return std::clamp(p, 0.0, 1.0);
}

std::string HttpBackend::complete(const SpeakRequest& request) {
  return parse_completion_content(post(request_body(request.exchange, false)));
}

double HttpBackend::score_affirmative(const ChatExchange& exchange) {
  if (!config_.request_logprobs) {
    const auto text =
        parse_completion_content(post(request_body(exchange, false)));
    return parse_verdict(text).value_or(false) ? 1.0 : 0.0;
  }
  const auto body = post(request_body(exchange, true));
  const auto p = parse_affirmative_probability(body);
  if (!p) {
    throw ConfigError(
        "backend returned no log-probabilities although they were requested");
  }
  return *p;
}

HttpStats HttpBackend::stats() const {
  return {requests_.load(), retries_.load(), cache_hits_.load()};
}

std::unique_ptr<AgentBackend> make_http_backend(const BackendConfig& config) {
  return std::make_unique<HttpBackend>(config);
}

}  // namespace intercomm
