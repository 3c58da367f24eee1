#include <doctest.h>

#include <array>
#include <cmath>

#include "adinvar/elemental_table.hpp"
#include "adinvar/errors.hpp"
#include "adinvar/real.hpp"

using namespace adinvar;

namespace {

double value(ElementalKind k, std::initializer_list<double> u, double c = 0.0) {
  const std::vector<double> v(u);
  return elemental_value(k, v, c);
}

double partial(ElementalKind k, std::size_t i, std::initializer_list<double> u, double c = 0.0,
               RuleMode mode = RuleMode::Tangent) {
  const std::vector<double> v(u);
  return ElementalTable::standard().partials(PlainAlgebra{}, k, mode, std::span<const double>(v), c)[i];
}

}  // namespace

TEST_CASE("keywords round trip") {
  for (ElementalKind k : kAllElementals) {
    const auto back = elemental_from_keyword(keyword(k));
    REQUIRE(back);
    CHECK(*back == k);
  }
  CHECK_FALSE(elemental_from_keyword("sqr"));
  CHECK(arity(ElementalKind::Mul) == 2);
  CHECK(arity(ElementalKind::Const) == 0);
  CHECK(takes_param(ElementalKind::Powc));
  CHECK_FALSE(takes_param(ElementalKind::Sin));
}

TEST_CASE("values") {
  CHECK(value(ElementalKind::Sub, {3, 5}) == -2);
  CHECK(value(ElementalKind::Div, {3, 4}) == 0.75);
  CHECK(value(ElementalKind::Powc, {2}, 3) == 8);
  CHECK(value(ElementalKind::Powc, {-2}, 3) == -8);
  CHECK(value(ElementalKind::Powc, {0}, 0) == 1);
  CHECK(value(ElementalKind::Const, {}, 2.5) == 2.5);
  CHECK(value(ElementalKind::Tanh, {0.5}) == std::tanh(0.5));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(value(ElementalKind::Div, {1, 0}), DomainError);
  CHECK_THROWS_AS(value(ElementalKind::Log, {0}), DomainError);
  CHECK_THROWS_AS(value(ElementalKind::Sqrt, {-1e-300}), DomainError);
  CHECK_THROWS_AS(value(ElementalKind::Powc, {-2}, 0.5), DomainError);
  CHECK_THROWS_AS(value(ElementalKind::Powc, {0}, -1), DomainError);
  CHECK_THROWS_AS(value(ElementalKind::Exp, {1000}), DomainError);
  CHECK(value(ElementalKind::Sqrt, {0}) == 0);
  const std::array<double, 1> zero{0.0};
  CHECK_THROWS_AS(require_differentiable(ElementalKind::Sqrt, zero), DomainError);
  CHECK_THROWS_AS(require_differentiable(ElementalKind::Powc, zero, 1.5), DomainError);
  CHECK_NOTHROW(require_differentiable(ElementalKind::Powc, zero, 2.0));
}

TEST_CASE("standard partials") {
  CHECK(partial(ElementalKind::Mul, 0, {3, 5}) == 5);
  CHECK(partial(ElementalKind::Mul, 1, {3, 5}) == 3);
  CHECK(partial(ElementalKind::Div, 1, {3, 2}) == -0.75);
  CHECK(partial(ElementalKind::Sqrt, 0, {4}) == 0.25);
  CHECK(partial(ElementalKind::Sqrt, 0, {4}, 0, RuleMode::Adjoint) == 0.25);
  CHECK(partial(ElementalKind::Powc, 0, {2}, 3) == 12);
  CHECK(partial(ElementalKind::Powc, 0, {5}, 0) == 0);
  CHECK(partial(ElementalKind::Cos, 0, {0.3}) == -std::sin(0.3));
  CHECK(partial(ElementalKind::Tanh, 0, {0.3}) == doctest::Approx(1 - std::tanh(0.3) * std::tanh(0.3)));
  CHECK(partial(ElementalKind::Log, 0, {4}) == 0.25);
}

TEST_CASE("rule expressions") {
  const std::array<double, 2> u{3.0, 2.0};
  const PlainAlgebra alg;
  CHECK(RuleExpr::parse("-u1/(u2*u2)").eval(alg, std::span<const double>(u), 0) == -0.75);
  CHECK(RuleExpr::parse("c*u1^(c-1)").eval(alg, std::span<const double>(u), 2) == 6);
  CHECK(RuleExpr::parse("powc(u2, 3) + exp(0)").eval(alg, std::span<const double>(u), 0) == 9);
  CHECK(RuleExpr::parse("-0.5/sqrt(u1)").max_operand() == 1);
  CHECK(RuleExpr::parse("u1*u2").max_operand() == 2);
  CHECK(RuleExpr::parse("2e-1").eval(alg, std::span<const double>(u), 0) == 0.2);
  CHECK_THROWS_AS(RuleExpr::parse("u1^u2"), ParseError);
  CHECK_THROWS_AS(RuleExpr::parse("sin(u1"), ParseError);
  CHECK_THROWS_AS(RuleExpr::parse("u3"), ParseError);
  CHECK_THROWS_AS(RuleExpr::parse("foo(u1)"), ParseError);
}

TEST_CASE("set_rules validation") {
  ElementalTable t = ElementalTable::standard();
  CHECK_THROWS_AS(t.set_rules(ElementalKind::Sin, RuleMode::Adjoint, {RuleExpr::parse("u2")}), UsageError);
  CHECK_THROWS_AS(t.set_rules(ElementalKind::Mul, RuleMode::Adjoint, {RuleExpr::parse("u2")}), UsageError);
  t.set_rules(ElementalKind::Sqrt, RuleMode::Adjoint, {RuleExpr::parse("-0.5/sqrt(u1)")});
  const std::array<double, 1> four{4.0};
  CHECK(t.partials(PlainAlgebra{}, ElementalKind::Sqrt, RuleMode::Adjoint, std::span<const double>(four), 0)[0] ==
        -0.25);
  CHECK(t.partials(PlainAlgebra{}, ElementalKind::Sqrt, RuleMode::Tangent, std::span<const double>(four), 0)[0] ==
        0.25);
  CHECK(ElementalTable::standard().rules(ElementalKind::Sqrt, RuleMode::Adjoint)[0].text() == "0.5/sqrt(u1)");
}

TEST_CASE("nested scalars differentiate rules") {
  // d/dx of cos(x) via the tangent rule evaluated on a dual number
  const ActiveAlgebra alg;
  const Real x = Real::dual(1, 0.7, 1.0);
  const std::array<Real, 1> u{x};
  const Real d = elemental_partials(alg, ElementalTable::standard(), ElementalKind::Sin, std::span<const Real>(u))[0];
  CHECK(d.primal() == std::cos(0.7));
  CHECK(d.tangent_at(1).primal() == -std::sin(0.7));
}

TEST_CASE("tape records adjoint partials") {
  const ActiveAlgebra alg;
  Tape tape(1);
  const Real a = tape.input(3.0);
  const Real b = tape.input(5.0);
  const std::array<Real, 2> ab{a, b};
  const Real y = alg.apply(ElementalKind::Mul, ab, 0.0);
  REQUIRE(tape.size() == 3);
  CHECK(y.primal() == 15.0);
  REQUIRE(y.node_at(1));
  const std::pair<std::size_t, Real> seed{*y.node_at(1), Real(2.0)};
  const auto adj = alg.reverse(tape, std::span(&seed, 1), *y.node_at(1));
  CHECK(adj[0].primal() == 10.0);
  CHECK(adj[1].primal() == 6.0);
}
