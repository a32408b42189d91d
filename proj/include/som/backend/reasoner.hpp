#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace som::backend {

enum class Purpose { reflect, extract, match, infer, act };

std::string_view to_string(Purpose p);
std::optional<Purpose> parse_purpose(std::string_view s);

struct Message {
  std::string role;  // "system" or "user"
  std::string content;
  bool operator==(const Message&) const = default;
};

struct BackendRequest {
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_output_tokens = 512;
  Purpose purpose = Purpose::act;

  /// Throws PreconditionError unless the request has a user message, a
  /// non-negative temperature and a positive token limit.
  void validate() const;
  /// Concatenated user message contents, newline separated.
  std::string user_text() const;
};

BackendRequest make_request(Purpose purpose, std::string system, std::string user,
                            double temperature = 0.0, int max_output_tokens = 512);

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Network or HTTP failure after the retry budget was spent.
class TransportError : public BackendError {
 public:
  TransportError(const std::string& what, int status, int attempts, bool retryable)
      : BackendError(what), status_(status), attempts_(attempts), retryable_(retryable) {}
  int status() const { return status_; }  // 0 when no HTTP response arrived
  int attempts() const { return attempts_; }
  bool retryable() const { return retryable_; }

 private:
  int status_;
  int attempts_;
  bool retryable_;
};

class NoRuleError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Text-generating reasoner. Implementations are safe for concurrent calls.
class Reasoner {
 public:
  virtual ~Reasoner() = default;
  virtual std::string complete(const BackendRequest& request) const = 0;
  virtual std::string name() const = 0;
};

}  // namespace som::backend
