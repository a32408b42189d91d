#include "som/backend/reasoner.hpp"

#include <array>

namespace som::backend {

namespace {
constexpr std::array<std::pair<Purpose, std::string_view>, 5> kPurposes{{
    {Purpose::reflect, "reflect"},
    {Purpose::extract, "extract"},
    {Purpose::match, "match"},
    {Purpose::infer, "infer"},
    {Purpose::act, "act"},
}};
}  // namespace

std::string_view to_string(Purpose p) {
  for (const auto& [value, name] : kPurposes) {
    if (value == p) return name;
  }
  return "act";
}

std::optional<Purpose> parse_purpose(std::string_view s) {
  for (const auto& [value, name] : kPurposes) {
    if (name == s) return value;
  }
  return std::nullopt;
}

void BackendRequest::validate() const {
  bool has_user = false;
  for (const auto& m : messages) {
    if (m.role != "system" && m.role != "user") throw PreconditionError("unknown message role '" + m.role + "'");
    has_user = has_user || m.role == "user";
  }
  if (!has_user) throw PreconditionError("request needs at least one user message");
  if (!(temperature >= 0.0)) throw PreconditionError("temperature must be non-negative");
  if (max_output_tokens <= 0) throw PreconditionError("max output tokens must be positive");
}

std::string BackendRequest::user_text() const {
  std::string out;
  for (const auto& m : messages) {
    if (m.role != "user") continue;
    if (!out.empty()) out += '\n';
    out += m.content;
  }
  return out;
}

BackendRequest make_request(Purpose purpose, std::string system, std::string user, double temperature,
                            int max_output_tokens) {
  BackendRequest r;
  r.purpose = purpose;
  if (!system.empty()) r.messages.push_back({"system", std::move(system)});
  r.messages.push_back({"user", std::move(user)});
  r.temperature = temperature;
  r.max_output_tokens = max_output_tokens;
  return r;
}

}  // namespace som::backend
