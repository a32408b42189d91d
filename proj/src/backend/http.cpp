#include "som/backend/http.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace som::backend {

using nlohmann::json;

HttpConfig HttpConfig::from_environment(HttpConfig base) {
  if (base.base_url.empty()) {
    if (const char* v = std::getenv("SOM_API_BASE")) base.base_url = v;
  }
  if (base.model.empty()) {
    if (const char* v = std::getenv("SOM_MODEL")) base.model = v;
  }
  return base;
}

HttpReasoner::HttpReasoner(HttpConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw PreconditionError("HTTP backend needs a base URL");
  if (config_.model.empty()) throw PreconditionError("HTTP backend needs a model name");
  if (config_.max_attempts < 1) throw PreconditionError("max attempts must be at least 1");
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw PreconditionError("base URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  origin_ = slash == std::string::npos ? url : url.substr(0, slash);
  prefix_ = slash == std::string::npos ? "" : url.substr(slash);
  if (!config_.sleep) config_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string HttpReasoner::post_json(const std::string& path, const std::string& body) const {
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);

  int status = 0;
  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    httplib::Client client(origin_);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(prefix_ + path, headers, body, "application/json");
    bool retryable = true;
    if (!res) {
      status = 0;
      last_error = httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      return res->body;
    } else {
      status = res->status;
      last_error = "HTTP " + std::to_string(status);
      retryable = status == 429 || status >= 500;
    }
    if (!retryable) throw TransportError(last_error, status, attempt, false);
    if (attempt < config_.max_attempts) {
      config_.sleep(backoff);
      backoff *= 2;
    }
  }
  throw TransportError(last_error + " after " + std::to_string(config_.max_attempts) + " attempts", status,
                       config_.max_attempts, true);
}

std::string HttpReasoner::complete(const BackendRequest& request) const {
  request.validate();
  json body;
  body["model"] = config_.model;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  body["messages"] = json::array();
  for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

  const std::string raw = post_json("/chat/completions", body.dump());
  try {
    const auto parsed = json::parse(raw);
    const auto& content = parsed.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw TransportError("response content is not text", 200, 1, false);
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed completion response: ") + e.what(), 200, 1, false);
  }
}

HttpEmbeddingSimilarity::HttpEmbeddingSimilarity(HttpConfig config, std::string embedding_model)
    : client_(std::move(config)), model_(std::move(embedding_model)) {}

std::vector<double> HttpEmbeddingSimilarity::embed(std::string_view text) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(text); it != cache_.end()) return it->second;
  }
  json body{{"model", model_}, {"input", std::string(text)}};
  const std::string raw = client_.post_json("/embeddings", body.dump());
  std::vector<double> v;
  try {
    v = json::parse(raw).at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed embedding response: ") + e.what(), 200, 1, false);
  }
  std::lock_guard lock(mu_);
  cache_.emplace(std::string(text), v);
  return v;
}

double HttpEmbeddingSimilarity::operator()(std::string_view a, std::string_view b) const {
  if (a.empty() || b.empty()) return 0.0;
  const auto va = embed(a);
  const auto vb = embed(b);
  if (va.size() != vb.size() || va.empty()) return 0.0;
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    dot += va[i] * vb[i];
    na += va[i] * va[i];
    nb += vb[i] * vb[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  const double cosine = dot / std::sqrt(na * nb);
  return std::clamp((cosine + 1.0) / 2.0, 0.0, 1.0);
}

}  // namespace som::backend
