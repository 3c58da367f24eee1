#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "adinvar/algebra.hpp"
#include "adinvar/elemental.hpp"
#include "adinvar/rule_expr.hpp"

namespace adinvar {

/// Which derivative code consumes a partial rule.
enum class RuleMode : std::uint8_t { Tangent, Adjoint };

/// First partials of every elemental, one set for tangent and one for
/// adjoint propagation.
///
/// Only first partials are tabulated. Higher derivatives come from
/// evaluating these rules on nested scalars.
class ElementalTable {
 public:
  /// The correct rules.
  static const ElementalTable& standard();

  const std::vector<RuleExpr>& rules(ElementalKind kind, RuleMode mode) const {
    return (mode == RuleMode::Tangent ? tangent_ : adjoint_)[index(kind)];
  }

  /// Replaces the rules of one side. Throws UsageError if the rule count
  /// differs from the elemental's arity or a rule references a missing operand.
  void set_rules(ElementalKind kind, RuleMode mode, std::vector<RuleExpr> rules);

  /// Partials d(kind)/d(operand i) evaluated in `alg`. Operands whose bit is
  /// clear in `mask` get a constant zero without evaluating their rule.
  template <Algebra A>
  std::vector<typename A::Scalar> partials(const A& alg, ElementalKind kind, RuleMode mode,
                                           std::span<const typename A::Scalar> u, double param,
                                           unsigned mask = ~0u) const {
    std::array<double, 2> primal{};
    for (std::size_t i = 0; i < u.size(); ++i) primal[i] = alg.primal(u[i]);
    require_differentiable(kind, std::span<const double>(primal.data(), u.size()), param);

    const auto& table = rules(kind, mode);
    std::vector<typename A::Scalar> out;
    out.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (mask & (1u << i)) {
        out.push_back(table[i].eval(alg, u, param));
      } else {
        out.push_back(alg.constant(0.0));
      }
    }
    return out;
  }

 private:
  static std::size_t index(ElementalKind kind) { return static_cast<std::size_t>(kind); }

  std::array<std::vector<RuleExpr>, kAllElementals.size()> tangent_;
  std::array<std::vector<RuleExpr>, kAllElementals.size()> adjoint_;
};

/// Value of an elemental in the active scalar type.
template <Algebra A>
typename A::Scalar elemental_value(const A& alg, ElementalKind kind, std::span<const typename A::Scalar> operands,
                                   double param = 0.0) {
  return alg.apply(kind, operands, param);
}

/// [d kind / d u_1, ..., d kind / d u_arity] in the active scalar type.
template <Algebra A>
std::vector<typename A::Scalar> elemental_partials(const A& alg, const ElementalTable& table, ElementalKind kind,
                                                   std::span<const typename A::Scalar> operands, double param = 0.0,
                                                   RuleMode mode = RuleMode::Tangent) {
  return table.partials(alg, kind, mode, operands, param);
}

}  // namespace adinvar
