#include "adinvar/elemental.hpp"

#include <cmath>
#include <string>

#include "adinvar/errors.hpp"

namespace adinvar {

namespace {

bool is_integer(double c) { return std::nearbyint(c) == c; }

double checked(ElementalKind kind, double result) {
  if (!std::isfinite(result)) throw DomainError(std::string(keyword(kind)), "non-finite result");
  return result;
}

}  // namespace

std::size_t arity(ElementalKind kind) noexcept {
  switch (kind) {
    case ElementalKind::Add:
    case ElementalKind::Sub:
    case ElementalKind::Mul:
    case ElementalKind::Div:
      return 2;
    case ElementalKind::Const:
      return 0;
    default:
      return 1;
  }
}

bool takes_param(ElementalKind kind) noexcept { return kind == ElementalKind::Powc || kind == ElementalKind::Const; }

std::string_view keyword(ElementalKind kind) noexcept {
  switch (kind) {
    case ElementalKind::Add: return "add";
    case ElementalKind::Sub: return "sub";
    case ElementalKind::Mul: return "mul";
    case ElementalKind::Div: return "div";
    case ElementalKind::Neg: return "neg";
    case ElementalKind::Id: return "id";
    case ElementalKind::Sin: return "sin";
    case ElementalKind::Cos: return "cos";
    case ElementalKind::Exp: return "exp";
    case ElementalKind::Log: return "log";
    case ElementalKind::Sqrt: return "sqrt";
    case ElementalKind::Tanh: return "tanh";
    case ElementalKind::Powc: return "powc";
    case ElementalKind::Const: return "const";
  }
  return "?";
}

std::optional<ElementalKind> elemental_from_keyword(std::string_view word) noexcept {
  for (ElementalKind kind : kAllElementals) {
    if (keyword(kind) == word) return kind;
  }
  return std::nullopt;
}

double elemental_value(ElementalKind kind, std::span<const double> u, double param) {
  const std::string name(keyword(kind));
  switch (kind) {
    case ElementalKind::Add: return checked(kind, u[0] + u[1]);
    case ElementalKind::Sub: return checked(kind, u[0] - u[1]);
    case ElementalKind::Mul: return checked(kind, u[0] * u[1]);
    case ElementalKind::Div:
      if (u[1] == 0.0) throw DomainError(name, "division by zero");
      return checked(kind, u[0] / u[1]);
    case ElementalKind::Neg: return -u[0];
    case ElementalKind::Id: return u[0];
    case ElementalKind::Sin: return checked(kind, std::sin(u[0]));
    case ElementalKind::Cos: return checked(kind, std::cos(u[0]));
    case ElementalKind::Exp: return checked(kind, std::exp(u[0]));
    case ElementalKind::Log:
      if (!(u[0] > 0.0)) throw DomainError(name, "operand " + std::to_string(u[0]) + " is not positive");
      return std::log(u[0]);
    case ElementalKind::Sqrt:
      if (u[0] < 0.0) throw DomainError(name, "operand " + std::to_string(u[0]) + " is negative");
      return std::sqrt(u[0]);
    case ElementalKind::Tanh: return std::tanh(u[0]);
    case ElementalKind::Powc:
      if (param == 0.0) return 1.0;
      if (!is_integer(param) && !(u[0] > 0.0))
        throw DomainError(name, "fractional exponent needs a positive base, got " + std::to_string(u[0]));
      if (param < 0.0 && u[0] == 0.0) throw DomainError(name, "negative exponent at zero base");
      return checked(kind, std::pow(u[0], param));
    case ElementalKind::Const: return param;
  }
  throw DomainError(name, "unknown elemental");
}

void require_differentiable(ElementalKind kind, std::span<const double> u, double param) {
  const std::string name(keyword(kind));
  switch (kind) {
    case ElementalKind::Sqrt:
      if (!(u[0] > 0.0)) throw DomainError(name, "not differentiable at " + std::to_string(u[0]));
      break;
    case ElementalKind::Log:
      if (!(u[0] > 0.0)) throw DomainError(name, "not differentiable at " + std::to_string(u[0]));
      break;
    case ElementalKind::Div:
      if (u[1] == 0.0) throw DomainError(name, "not differentiable at zero divisor");
      break;
    case ElementalKind::Powc:
      // u^c is smooth at u = 0 only for non-negative integer c.
      if (u[0] == 0.0 && !(is_integer(param) && param >= 0.0))
        throw DomainError(name, "not differentiable at zero base");
      if (u[0] < 0.0 && !is_integer(param)) throw DomainError(name, "fractional exponent needs a positive base");
      break;
    default:
      break;
  }
}

}  // namespace adinvar
