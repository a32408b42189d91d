#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "som/backend/reasoner.hpp"

namespace som::backend {

/// Parsed arithmetic template fragment; opaque outside scripted.cpp.
struct ExprNode;

class RulesError : public std::runtime_error {
 public:
  RulesError(std::size_t line, const std::string& what)
      : std::runtime_error("rules line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Response template: literal text with `{expr}` holes. `{{` and `}}` are
/// literal braces.
class ResponseTemplate {
 public:
  static ResponseTemplate parse(std::string_view text);

  /// Renders with the given variables, or nullopt if a referenced variable
  /// is missing or not numeric where arithmetic needs it.
  std::optional<std::string> render(const std::map<std::string, std::string>& vars) const;

  const std::string& source() const { return source_; }

 private:
  struct Piece {
    std::string literal;
    std::shared_ptr<const ExprNode> expr;
  };
  std::string source_;
  std::vector<Piece> pieces_;
};

struct ScriptedRule {
  std::optional<Purpose> purpose;  // nullopt matches every purpose
  std::string pattern;
  std::regex regex;
  ResponseTemplate response;
  std::size_t line = 0;
};

/// Ordered rules; the first applicable rule answers.
///
/// File format, one block per rule:
///   @<purpose|*> [regex searched in the user text]
///   template lines
///   @end
/// Lines starting with '#' outside blocks are comments.
class ScriptedRuleSet {
 public:
  static ScriptedRuleSet parse(std::string_view text);
  static ScriptedRuleSet load(const std::filesystem::path& path);

  const std::vector<ScriptedRule>& rules() const { return rules_; }
  void add(ScriptedRule rule) { rules_.push_back(std::move(rule)); }

 private:
  std::vector<ScriptedRule> rules_;
};

/// `name = number` and `name: number` lines, first occurrence wins. Names are
/// lower-cased with '-', '.' and spaces mapped to '_'.
std::map<std::string, std::string> extract_variables(std::string_view text);

std::string normalize_variable(std::string_view name);

/// Deterministic reasoner answering from a rule table.
class ScriptedReasoner : public Reasoner {
 public:
  explicit ScriptedReasoner(ScriptedRuleSet rules, std::string name = "scripted");

  std::string complete(const BackendRequest& request) const override;
  std::string name() const override { return name_; }

 private:
  ScriptedRuleSet rules_;
  std::string name_;
};

}  // namespace som::backend
