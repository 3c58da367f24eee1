#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace adinvar {

/// Built-in scalar elementals. Every elemental has exactly one output.
enum class ElementalKind : std::uint8_t {
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Id,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
  Tanh,
  Powc,
  Const,
};

inline constexpr std::array<ElementalKind, 14> kAllElementals = {
    ElementalKind::Add,  ElementalKind::Sub, ElementalKind::Mul, ElementalKind::Div, ElementalKind::Neg,
    ElementalKind::Id,   ElementalKind::Sin, ElementalKind::Cos, ElementalKind::Exp, ElementalKind::Log,
    ElementalKind::Sqrt, ElementalKind::Tanh, ElementalKind::Powc, ElementalKind::Const};

/// Number of operands.
std::size_t arity(ElementalKind kind) noexcept;

/// Whether the elemental takes the `@ <real>` parameter (powc, const).
bool takes_param(ElementalKind kind) noexcept;

std::string_view keyword(ElementalKind kind) noexcept;
std::optional<ElementalKind> elemental_from_keyword(std::string_view word) noexcept;

/// Plain floating-point evaluation; throws DomainError outside the domain or
/// on a non-finite result.
double elemental_value(ElementalKind kind, std::span<const double> operands, double param = 0.0);

/// Throws DomainError when the elemental is not differentiable at the given
/// primal operands (sqrt at 0, powc with fractional exponent at 0, ...).
void require_differentiable(ElementalKind kind, std::span<const double> operands, double param = 0.0);

}  // namespace adinvar
