#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace som::backend {

/// Names of the embedded prompt templates (file stems under prompts/).
std::vector<std::string> prompt_names();

/// Raw template text; throws std::out_of_range for an unknown name.
std::string_view prompt_template(std::string_view name);

/// Substitutes `{{name}}` placeholders. Every placeholder must be bound;
/// unused bindings are ignored.
std::string render_prompt(std::string_view name, const std::map<std::string, std::string>& vars);
std::string render_text(std::string_view text, const std::map<std::string, std::string>& vars);

/// Digest of a template, pinned by tests so prompt edits are deliberate.
std::string prompt_digest(std::string_view name);

/// "  key = value" lines in key order; "(none)" when empty.
std::string value_lines(const std::map<std::string, std::string>& values);

}  // namespace som::backend
