#include "adinvar/rule_expr.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <string>

#include "adinvar/errors.hpp"

namespace adinvar {

// Recursive-descent parser for rule expressions:
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := primary ('^' unary)?
//   primary:= number | 'c' | 'u1' | 'u2' | keyword '(' args ')' | '(' expr ')'
class RuleParser {
 public:
  explicit RuleParser(std::string_view text) : text_(text) {}

  RuleExpr run() {
    RuleExpr expr;
    expr.text_ = std::string(text_);
    out_ = &expr;
    expr.root_ = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return expr;
  }

 private:
  using Node = RuleExpr::Node;
  using Tag = RuleExpr::Tag;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, 1, pos_ + 1); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int push(Node node) {
    out_->nodes_.push_back(node);
    return static_cast<int>(out_->nodes_.size()) - 1;
  }

  int constant(double value) {
    Node node;
    node.tag = Tag::Constant;
    node.value = value;
    return push(node);
  }

  int apply(ElementalKind kind, int a, int b = -1) {
    Node node;
    node.tag = Tag::Apply;
    node.kind = kind;
    node.child = {a, b};
    return push(node);
  }

  int powc(int base, int exponent) {
    if (depends_on_operands(exponent)) fail("exponent must not depend on u1/u2");
    Node node;
    node.tag = Tag::Apply;
    node.kind = ElementalKind::Powc;
    node.child = {base, -1};
    node.exponent = exponent;
    return push(node);
  }

  bool depends_on_operands(int index) const {
    const Node& node = out_->nodes_[static_cast<std::size_t>(index)];
    if (node.tag == Tag::Operand) return true;
    if (node.tag != Tag::Apply) return false;
    for (int c : node.child) {
      if (c >= 0 && depends_on_operands(c)) return true;
    }
    return false;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = apply(ElementalKind::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = apply(ElementalKind::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = apply(ElementalKind::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = apply(ElementalKind::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (accept('-')) {
      const int operand = parse_unary();
      Node& node = out_->nodes_[static_cast<std::size_t>(operand)];
      if (node.tag == Tag::Constant) {
        node.value = -node.value;
        return operand;
      }
      return apply(ElementalKind::Neg, operand);
    }
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (accept('^')) return powc(base, parse_unary());
    return base;
  }

  int parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const std::string buffer(text_.substr(pos_));
      const double value = std::strtod(buffer.c_str(), &end);
      const auto consumed = static_cast<std::size_t>(end - buffer.c_str());
      if (consumed == 0) fail("bad number");
      pos_ += consumed;
      return constant(value);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      const std::string_view word = text_.substr(start, pos_ - start);
      if (word == "c") {
        Node node;
        node.tag = Tag::Param;
        return push(node);
      }
      if (word == "u1" || word == "u2") {
        Node node;
        node.tag = Tag::Operand;
        node.operand = word == "u1" ? 0 : 1;
        out_->max_operand_ = std::max<std::size_t>(out_->max_operand_, static_cast<std::size_t>(node.operand) + 1);
        return push(node);
      }
      const auto kind = elemental_from_keyword(word);
      if (!kind) {
        pos_ = start;
        fail("unknown name '" + std::string(word) + "'");
      }
      return parse_call(*kind);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  int parse_call(ElementalKind kind) {
    expect('(');
    if (kind == ElementalKind::Const) {
      const int value = parse_expr();
      expect(')');
      if (depends_on_operands(value)) fail("const() argument must not depend on u1/u2");
      return value;
    }
    const int first = parse_expr();
    if (kind == ElementalKind::Powc) {
      expect(',');
      const int exponent = parse_expr();
      expect(')');
      return powc(first, exponent);
    }
    int second = -1;
    if (arity(kind) == 2) {
      expect(',');
      second = parse_expr();
    }
    expect(')');
    return apply(kind, first, second);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  RuleExpr* out_ = nullptr;
};

RuleExpr RuleExpr::parse(std::string_view text) { return RuleParser(text).run(); }

RuleExpr RuleExpr::constant(double value) {
  RuleExpr expr;
  Node node;
  node.tag = Tag::Constant;
  node.value = value;
  expr.nodes_.push_back(node);
  expr.root_ = 0;
  expr.text_ = std::to_string(value);
  return expr;
}

double RuleExpr::eval_exponent(int index, double param) const {
  return eval_node(PlainAlgebra{}, std::span<const double>(), param, index);
}

}  // namespace adinvar
