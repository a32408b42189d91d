#include "som/backend/prompts.hpp"

#include <stdexcept>

#include "som/common/text.hpp"

namespace som::backend {

namespace detail {
const std::map<std::string, std::string_view, std::less<>>& embedded_prompts();
}

std::vector<std::string> prompt_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : detail::embedded_prompts()) out.push_back(name);
  return out;
}

std::string_view prompt_template(std::string_view name) {
  const auto& table = detail::embedded_prompts();
  auto it = table.find(name);
  if (it == table.end()) throw std::out_of_range("unknown prompt template '" + std::string(name) + "'");
  return it->second;
}

std::string render_text(std::string_view text, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) throw std::invalid_argument("unterminated placeholder in prompt");
    out.append(text.substr(pos, open - pos));
    const std::string key(text.substr(open + 2, close - open - 2));
    auto it = vars.find(key);
    if (it == vars.end()) throw std::invalid_argument("prompt placeholder '" + key + "' is unbound");
    out += it->second;
    pos = close + 2;
  }
  out.append(text.substr(pos));
  // Templates end with a newline; the rendered message does not.
  while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
  return out;
}

std::string render_prompt(std::string_view name, const std::map<std::string, std::string>& vars) {
  return render_text(prompt_template(name), vars);
}

std::string prompt_digest(std::string_view name) { return hex_digest(prompt_template(name)); }

std::string value_lines(const std::map<std::string, std::string>& values) {
  if (values.empty()) return "(none)";
  std::vector<std::string> lines;
  for (const auto& [k, v] : values) {
    std::string flat = v;
    for (auto p = flat.find('\n'); p != std::string::npos; p = flat.find('\n', p)) flat.replace(p, 1, " | ");
    lines.push_back("  " + k + " = " + flat);
  }
  return join(lines, "\n");
}

}  // namespace som::backend
