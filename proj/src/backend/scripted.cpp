#include "som/backend/scripted.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "som/common/text.hpp"

namespace som::backend {

struct ExprNode {
  enum class Kind { number, variable, unary_minus, binary, call } kind = Kind::number;
  double number = 0;
  std::string name;  // variable or function name
  char op = 0;
  std::vector<std::shared_ptr<const ExprNode>> args;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

struct FunctionSpec {
  std::size_t min_args;
  std::size_t max_args;
  std::function<double(const std::vector<double>&)> fn;
};

const std::map<std::string, FunctionSpec>& functions() {
  static const std::map<std::string, FunctionSpec> table{
      {"round", {1, 1, [](const auto& a) { return static_cast<double>(round_half_away(a[0])); }}},
      {"floor", {1, 1, [](const auto& a) { return std::floor(a[0]); }}},
      {"ceil", {1, 1, [](const auto& a) { return std::ceil(a[0]); }}},
      {"abs", {1, 1, [](const auto& a) { return std::fabs(a[0]); }}},
      {"min", {1, 16, [](const auto& a) { return *std::min_element(a.begin(), a.end()); }}},
      {"max", {1, 16, [](const auto& a) { return *std::max_element(a.begin(), a.end()); }}},
      {"clamp", {3, 3, [](const auto& a) { return std::clamp(a[0], a[1], a[2]); }}},
  };
  return table;
}

// Recursive descent over the expression grammar:
//   expr  := term (('+' | '-') term)*
//   term  := unary (('*' | '/') unary)*
//   unary := '-' unary | primary
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
// The multiplication sign, division sign and minus sign are accepted as
// their ASCII counterparts.
class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(normalize(src)) {}

  NodePtr parse() {
    auto e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  static std::string normalize(std::string_view s) {
    std::string out(s);
    const std::pair<std::string_view, char> subs[] = {{"\xC3\x97", '*'}, {"\xC3\xB7", '/'}, {"\xE2\x88\x92", '-'}};
    for (const auto& [from, to] : subs) {
      for (auto p = out.find(from); p != std::string::npos; p = out.find(from, p + 1)) {
        out.replace(p, from.size(), 1, to);
      }
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression '" + src_ + "': " + what);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr binary(char op, NodePtr l, NodePtr r) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::binary;
    n->op = op;
    n->args = {std::move(l), std::move(r)};
    return n;
  }

  NodePtr expr() {
    auto left = term();
    for (;;) {
      if (eat('+')) left = binary('+', left, term());
      else if (eat('-')) left = binary('-', left, term());
      else return left;
    }
  }

  NodePtr term() {
    auto left = unary();
    for (;;) {
      if (eat('*')) left = binary('*', left, unary());
      else if (eat('/')) left = binary('/', left, unary());
      else return left;
    }
  }

  NodePtr unary() {
    if (eat('-')) {
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::unary_minus;
      n->args = {unary()};
      return n;
    }
    return primary();
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end");
    if (eat('(')) {
      auto e = expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
      auto v = parse_number(std::string_view(src_).substr(start, pos_ - start));
      if (!v) fail("bad number");
      auto n = std::make_shared<ExprNode>();
      n->number = *v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size()) {
        const char d = src_[pos_];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_') {
          ++pos_;
        } else if (d == '-' && pos_ + 1 < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_ + 1])) &&
                   pos_ > start) {
          // Hyphenated names such as last-target; "a - b" needs spaces.
          ++pos_;
        } else {
          break;
        }
      }
      std::string name = src_.substr(start, pos_ - start);
      if (eat('(')) {
        auto it = functions().find(name);
        if (it == functions().end()) fail("unknown function '" + name + "'");
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprNode::Kind::call;
        n->name = name;
        if (!eat(')')) {
          do {
            n->args.push_back(expr());
          } while (eat(','));
          if (!eat(')')) fail("missing ')' after arguments");
        }
        if (n->args.size() < it->second.min_args || n->args.size() > it->second.max_args) {
          fail("wrong argument count for '" + name + "'");
        }
        return n;
      }
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::variable;
      n->name = normalize_variable(name);
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string src_;
  std::size_t pos_ = 0;
};

std::optional<double> evaluate(const ExprNode& n, const std::map<std::string, std::string>& vars) {
  switch (n.kind) {
    case ExprNode::Kind::number:
      return n.number;
    case ExprNode::Kind::variable: {
      auto it = vars.find(n.name);
      if (it == vars.end()) return std::nullopt;
      return parse_number(it->second);
    }
    case ExprNode::Kind::unary_minus: {
      auto v = evaluate(*n.args[0], vars);
      if (!v) return std::nullopt;
      return -*v;
    }
    case ExprNode::Kind::binary: {
      auto l = evaluate(*n.args[0], vars);
      auto r = evaluate(*n.args[1], vars);
      if (!l || !r) return std::nullopt;
      switch (n.op) {
        case '+': return *l + *r;
        case '-': return *l - *r;
        case '*': return *l * *r;
        default:
          if (*r == 0) return std::nullopt;
          return *l / *r;
      }
    }
    case ExprNode::Kind::call: {
      std::vector<double> args;
      for (const auto& a : n.args) {
        auto v = evaluate(*a, vars);
        if (!v) return std::nullopt;
        args.push_back(*v);
      }
      return functions().at(n.name).fn(args);
    }
  }
  return std::nullopt;
}

}  // namespace

std::string normalize_variable(std::string_view name) {
  std::string out = to_lower(trim(name));
  for (char& c : out) {
    if (c == '-' || c == '.' || c == ' ') c = '_';
  }
  return out;
}

std::map<std::string, std::string> extract_variables(std::string_view text) {
  static const std::regex line_re(R"(^\s*(?:[-*]\s+)?([A-Za-z][A-Za-z0-9 ._-]*?)\s*[=:]\s*(-?[0-9]+(?:\.[0-9]+)?)\s*$)");
  std::map<std::string, std::string> vars;
  for (const auto& line : split_lines(text)) {
    std::smatch m;
    if (std::regex_match(line, m, line_re)) vars.emplace(normalize_variable(m[1].str()), m[2].str());
  }
  return vars;
}

ResponseTemplate ResponseTemplate::parse(std::string_view text) {
  ResponseTemplate t;
  t.source_ = std::string(text);
  std::string literal;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '{' && i + 1 < text.size() && text[i + 1] == '{') {
      literal += '{';
      ++i;
    } else if (c == '}' && i + 1 < text.size() && text[i + 1] == '}') {
      literal += '}';
      ++i;
    } else if (c == '{') {
      const auto close = text.find('}', i);
      if (close == std::string_view::npos) throw std::invalid_argument("unterminated '{' in template");
      if (!literal.empty()) t.pieces_.push_back({std::move(literal), nullptr});
      literal.clear();
      t.pieces_.push_back({"", ExprParser(text.substr(i + 1, close - i - 1)).parse()});
      i = close;
    } else if (c == '}') {
      throw std::invalid_argument("unmatched '}' in template");
    } else {
      literal += c;
    }
  }
  if (!literal.empty()) t.pieces_.push_back({std::move(literal), nullptr});
  return t;
}

std::optional<std::string> ResponseTemplate::render(const std::map<std::string, std::string>& vars) const {
  std::string out;
  for (const auto& p : pieces_) {
    if (!p.expr) {
      out += p.literal;
      continue;
    }
    if (p.expr->kind == ExprNode::Kind::variable) {
      // A bare name may carry text, such as a regex capture.
      auto it = vars.find(p.expr->name);
      if (it == vars.end()) return std::nullopt;
      out += it->second;
      continue;
    }
    auto v = evaluate(*p.expr, vars);
    if (!v) return std::nullopt;
    out += format_number(*v);
  }
  return out;
}

ScriptedRuleSet ScriptedRuleSet::parse(std::string_view text) {
  ScriptedRuleSet set;
  const auto lines = split_lines(text);
  std::optional<ScriptedRule> open;
  std::vector<std::string> body;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const std::string& raw = lines[i];
    const std::string stripped = trim(raw);
    if (!open) {
      if (stripped.empty() || stripped[0] == '#') continue;
      if (stripped[0] != '@' || stripped == "@end") throw RulesError(lineno, "expected a rule header '@<purpose> <pattern>'");
      const auto space = stripped.find(' ');
      const std::string tag = stripped.substr(1, space == std::string::npos ? std::string::npos : space - 1);
      ScriptedRule rule;
      rule.line = lineno;
      if (tag != "*") {
        rule.purpose = parse_purpose(tag);
        if (!rule.purpose) throw RulesError(lineno, "unknown purpose '" + tag + "'");
      }
      rule.pattern = space == std::string::npos ? "" : trim(std::string_view(stripped).substr(space + 1));
      try {
        rule.regex = std::regex(rule.pattern, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw RulesError(lineno, "bad pattern: " + std::string(e.what()));
      }
      open = std::move(rule);
      body.clear();
      continue;
    }
    if (stripped == "@end") {
      try {
        open->response = ResponseTemplate::parse(join(body, "\n"));
      } catch (const std::invalid_argument& e) {
        throw RulesError(open->line, e.what());
      }
      set.rules_.push_back(std::move(*open));
      open.reset();
      continue;
    }
    body.push_back(raw);
  }
  if (open) throw RulesError(open->line, "rule is missing '@end'");
  return set;
}

ScriptedRuleSet ScriptedRuleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read rules file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

ScriptedReasoner::ScriptedReasoner(ScriptedRuleSet rules, std::string name)
    : rules_(std::move(rules)), name_(std::move(name)) {}

std::string ScriptedReasoner::complete(const BackendRequest& request) const {
  request.validate();
  const std::string text = request.user_text();
  const auto base_vars = extract_variables(text);
  for (const auto& rule : rules_.rules()) {
    if (rule.purpose && *rule.purpose != request.purpose) continue;
    std::smatch m;
    if (!std::regex_search(text, m, rule.regex)) continue;
    auto vars = base_vars;
    for (std::size_t g = 1; g < m.size(); ++g) vars["g" + std::to_string(g)] = m[g].str();
    if (auto out = rule.response.render(vars)) return *out;
  }
  throw NoRuleError("no scripted rule answers a " + std::string(to_string(request.purpose)) + " request");
}

}  // namespace som::backend
