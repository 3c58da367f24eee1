#include "adinvar/elemental_table.hpp"

#include <string>

#include "adinvar/errors.hpp"

namespace adinvar {

namespace {

std::vector<RuleExpr> parse_all(std::initializer_list<const char*> texts) {
  std::vector<RuleExpr> out;
  for (const char* text : texts) out.push_back(RuleExpr::parse(text));
  return out;
}

ElementalTable make_standard() {
  ElementalTable table;
  auto both = [&table](ElementalKind kind, std::initializer_list<const char*> texts) {
    table.set_rules(kind, RuleMode::Tangent, parse_all(texts));
    table.set_rules(kind, RuleMode::Adjoint, parse_all(texts));
  };
  both(ElementalKind::Add, {"1", "1"});
  both(ElementalKind::Sub, {"1", "-1"});
  both(ElementalKind::Mul, {"u2", "u1"});
  both(ElementalKind::Div, {"1/u2", "-u1/(u2*u2)"});
  both(ElementalKind::Neg, {"-1"});
  both(ElementalKind::Id, {"1"});
  both(ElementalKind::Sin, {"cos(u1)"});
  both(ElementalKind::Cos, {"-sin(u1)"});
  both(ElementalKind::Exp, {"exp(u1)"});
  both(ElementalKind::Log, {"1/u1"});
  both(ElementalKind::Sqrt, {"0.5/sqrt(u1)"});
  both(ElementalKind::Tanh, {"1-tanh(u1)*tanh(u1)"});
  both(ElementalKind::Powc, {"c*u1^(c-1)"});
  both(ElementalKind::Const, {});
  return table;
}

}  // namespace

const ElementalTable& ElementalTable::standard() {
  static const ElementalTable table = make_standard();
  return table;
}

void ElementalTable::set_rules(ElementalKind kind, RuleMode mode, std::vector<RuleExpr> rules) {
  const std::size_t n = arity(kind);
  if (rules.size() != n) {
    throw UsageError(std::string(keyword(kind)) + " needs " + std::to_string(n) + " partial rule(s), got " +
                     std::to_string(rules.size()));
  }
  for (const RuleExpr& rule : rules) {
    if (rule.max_operand() > n) {
      throw UsageError("rule '" + rule.text() + "' references an operand " + std::string(keyword(kind)) +
                       " does not have");
    }
  }
  (mode == RuleMode::Tangent ? tangent_ : adjoint_)[index(kind)] = std::move(rules);
}

}  // namespace adinvar
