#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "som/backend/reasoner.hpp"

namespace som::backend {

struct HttpConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key_env = "SOM_API_KEY";
  std::chrono::milliseconds timeout{60000};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  /// Replaceable for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;

  /// Fills unset fields from SOM_API_BASE and SOM_MODEL.
  static HttpConfig from_environment(HttpConfig base);
};

/// Chat-completions client for OpenAI-compatible endpoints. Connection
/// errors, 429 and 5xx responses are retried with exponential backoff.
class HttpReasoner : public Reasoner {
 public:
  explicit HttpReasoner(HttpConfig config);

  std::string complete(const BackendRequest& request) const override;
  std::string name() const override { return "http:" + config_.model; }

  const HttpConfig& config() const { return config_; }

  /// POSTs `body` to base_url + path with retries; returns the response body.
  std::string post_json(const std::string& path, const std::string& body) const;

 private:
  HttpConfig config_;
  std::string origin_;
  std::string prefix_;
};

/// Cosine similarity of endpoint embeddings mapped into [0,1]. Vectors are
/// cached per text.
class HttpEmbeddingSimilarity {
 public:
  HttpEmbeddingSimilarity(HttpConfig config, std::string embedding_model);
  double operator()(std::string_view a, std::string_view b) const;

 private:
  std::vector<double> embed(std::string_view text) const;

  HttpReasoner client_;
  std::string model_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::vector<double>, std::less<>> cache_;
};

}  // namespace som::backend
