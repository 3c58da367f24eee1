#pragma once

#include <concepts>
#include <span>

#include "adinvar/elemental.hpp"

namespace adinvar {

/// Scalar arithmetic contract shared by every differentiation level.
///
/// An algebra evaluates elementals on its `Scalar` type, lifts plain reals to
/// constants, and recovers the plain floating-point value of a scalar. Rule
/// expressions and SAC evaluation are written against this concept only, so
/// the same code runs on `double` and on nested derivative scalars.
template <class A>
concept Algebra = requires(const A& alg, ElementalKind kind, std::span<const typename A::Scalar> u, double c,
                           const typename A::Scalar& s) {
  typename A::Scalar;
  { alg.apply(kind, u, c) } -> std::same_as<typename A::Scalar>;
  { alg.constant(c) } -> std::same_as<typename A::Scalar>;
  { alg.primal(s) } -> std::convertible_to<double>;
  { alg.is_zero(s) } -> std::convertible_to<bool>;
};

/// IEEE double arithmetic with domain checks.
struct PlainAlgebra {
  using Scalar = double;

  double apply(ElementalKind kind, std::span<const double> u, double param) const {
    return elemental_value(kind, u, param);
  }
  double constant(double c) const { return c; }
  double primal(double s) const { return s; }
  bool is_zero(double s) const { return s == 0.0; }
};

static_assert(Algebra<PlainAlgebra>);

}  // namespace adinvar
