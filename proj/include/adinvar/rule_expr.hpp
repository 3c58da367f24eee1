#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adinvar/algebra.hpp"
#include "adinvar/elemental.hpp"

namespace adinvar {

/// A closed-form partial-derivative rule built from elementals.
///
/// Rules are written in infix form over the operands `u1`, `u2` and the
/// elemental parameter `c`, e.g. `-u1/(u2*u2)` or `c*u1^(c-1)`. Function
/// calls use the SAC keywords (`sqrt(u1)`, `mul(u1,u2)`, `powc(u1, 2)`).
/// The exponent of `^`/`powc` must not depend on the operands.
///
/// Because a rule is a composition of elementals it can be evaluated in any
/// Algebra; evaluating it on nested scalars differentiates the rule itself.
class RuleExpr {
 public:
  static RuleExpr parse(std::string_view text);
  static RuleExpr constant(double value);

  /// Highest 1-based operand index referenced (0 if none).
  std::size_t max_operand() const noexcept { return max_operand_; }
  const std::string& text() const noexcept { return text_; }

  template <Algebra A>
  typename A::Scalar eval(const A& alg, std::span<const typename A::Scalar> u, double param) const {
    return eval_node(alg, u, param, root_);
  }

 private:
  enum class Tag : std::uint8_t { Constant, Param, Operand, Apply };

  struct Node {
    Tag tag = Tag::Constant;
    double value = 0.0;
    int operand = 0;
    ElementalKind kind = ElementalKind::Id;
    std::array<int, 2> child{-1, -1};
    int exponent = -1;  // powc only; a node free of operands
  };

  friend class RuleParser;

  double eval_exponent(int index, double param) const;

  template <Algebra A>
  typename A::Scalar eval_node(const A& alg, std::span<const typename A::Scalar> u, double param, int index) const {
    using S = typename A::Scalar;
    const Node& node = nodes_[static_cast<std::size_t>(index)];
    switch (node.tag) {
      case Tag::Constant:
        return alg.constant(node.value);
      case Tag::Param:
        return alg.constant(param);
      case Tag::Operand:
        return u[static_cast<std::size_t>(node.operand)];
      case Tag::Apply:
        break;
    }
    if (node.kind == ElementalKind::Powc) {
      const double exponent = eval_exponent(node.exponent, param);
      if (exponent == 0.0) return alg.constant(1.0);
      const S base = eval_node(alg, u, param, node.child[0]);
      return alg.apply(ElementalKind::Powc, std::span<const S>(&base, 1), exponent);
    }
    const std::size_t n = arity(node.kind);
    if (n == 0) return alg.apply(node.kind, std::span<const S>(), node.value);
    std::array<S, 2> args;
    args[0] = eval_node(alg, u, param, node.child[0]);
    if (node.kind == ElementalKind::Mul && alg.is_zero(args[0])) return alg.constant(0.0);
    if (n == 2) {
      args[1] = eval_node(alg, u, param, node.child[1]);
      if (node.kind == ElementalKind::Mul && alg.is_zero(args[1])) return alg.constant(0.0);
    }
    return alg.apply(node.kind, std::span<const S>(args.data(), n), 0.0);
  }

  std::vector<Node> nodes_;
  int root_ = -1;
  std::size_t max_operand_ = 0;
  std::string text_;
};

}  // namespace adinvar
