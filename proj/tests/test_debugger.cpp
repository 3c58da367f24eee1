#include <doctest.h>

#include <map>

#include "adinvar/debugger.hpp"
#include "adinvar/errors.hpp"
#include "support.hpp"

using namespace adinvar;
using fixture::vec;

namespace {

ElementalTable from_file(const char* name) {
  return inject_faults(ElementalTable::standard(), load_fault_registry(fixture::faults_dir() / name));
}

}  // namespace

TEST_CASE("fault registry") {
  const auto faults = parse_fault_registry(
      R"j([{"elemental": "sqrt", "mode": "adjoint", "replacement": "-0.5/sqrt(u1)"},
          {"elemental": "mul", "mode": "both", "replacement": ["u2", "u1"]}])j");
  REQUIRE(faults.size() == 2);
  CHECK(faults[0].mode == FaultMode::AdjointOnly);
  CHECK(faults[1].replacement.size() == 2);
  CHECK_THROWS_AS(parse_fault_registry(R"j({"elemental": "sqr", "replacement": "1"})j"), UsageError);
  CHECK_THROWS_AS(parse_fault_registry(R"j({"elemental": "mul", "replacement": "u2"})j"), UsageError);
  CHECK_THROWS_AS(parse_fault_registry(R"j({"elemental": "sin", "mode": "sideways", "replacement": "1"})j"),
                  UsageError);
  CHECK_THROWS_AS(parse_fault_registry("[{"), UsageError);
  CHECK_THROWS(parse_fault_registry(R"j({"elemental": "sin", "replacement": "cos(u1"})j"));
}

TEST_CASE("inject_fault leaves the original untouched") {
  const ElementalTable bad = from_file("sqrt_adjoint.json");
  const auto p = fixture::entry("sqrt").program;
  CHECK(vjp(p, vec({4}), vec({1}), bad).xbar[0] == -0.25);
  CHECK(jvp(p, vec({4}), vec({1}), bad).ydot[0] == 0.25);
  CHECK(vjp(p, vec({4}), vec({1})).xbar[0] == 0.25);

  FaultSpec same;
  same.elemental = ElementalKind::Sin;
  same.replacement = {RuleExpr::parse("cos(u1)")};
  const ElementalTable t = inject_fault(ElementalTable::standard(), same);
  const auto pipe = fixture::entry("pipeline").program;
  CHECK(vjp(pipe, vec({2}), vec({1}), t).xbar == vjp(pipe, vec({2}), vec({1})).xbar);
}

TEST_CASE("clean programs pass every step") {
  for (const auto& e : fixture::corpus()) {
    Sampler s(mix_seed(99, {e.program.steps.size()}));
    for (int trial = 0; trial < 5; ++trial) {
      const Vector x = s.point(e.box);
      const Vector xd = s.direction(e.program.n_inputs());
      const auto r = debug_forward(e.program, ElementalTable::standard(), x, xd, 17 + trial);
      CHECK_MESSAGE(!r.first_failure, e.program.name);
      CHECK(r.steps.size() == e.program.steps.size());
      for (const auto& st : r.steps) CHECK(st.verdict != Verdict::Fail);
    }
  }
}

TEST_CASE("pipeline localization") {
  const auto p = fixture::entry("pipeline").program;
  const Vector x = vec({2.0}), xd = vec({0.7});
  SUBCASE("sqrt adjoint fault") {
    const auto r = debug_forward(p, from_file("sqrt_adjoint.json"), x, xd, 5);
    REQUIRE(r.first_failure);
    CHECK(*r.first_failure == 1);
    for (const auto& st : r.steps) CHECK(st.verdict == Verdict::Fail);
    CHECK(r.steps[0].lhs == doctest::Approx(-r.steps[0].rhs));
  }
  SUBCASE("sin adjoint fault") {
    const auto r = debug_forward(p, from_file("sin_adjoint.json"), x, xd, 5);
    CHECK(r.steps[0].verdict == Verdict::Pass);
    REQUIRE(r.first_failure);
    CHECK(*r.first_failure == 2);
  }
  SUBCASE("shared fault is invisible") {
    const ElementalTable both = from_file("sqrt_both.json");
    const auto r = debug_forward(p, both, x, xd, 5);
    CHECK_FALSE(r.first_failure);
    CHECK(fd_cross_check(p, both, x, xd).verdict == Verdict::Fail);
  }
  SUBCASE("step filter") {
    const std::vector<std::size_t> only{3};
    const auto r = debug_forward(p, from_file("sin_adjoint.json"), x, xd, 5, {}, only);
    REQUIRE(r.steps.size() == 1);
    CHECK(r.steps[0].step == 3);
    const std::vector<std::size_t> bad{4};
    CHECK_THROWS_AS(debug_forward(p, ElementalTable::standard(), x, xd, 5, {}, bad), UsageError);
  }
}

TEST_CASE("localization agrees with the sweep trace") {
  const auto e = fixture::entry("mixed");
  for (const char* name : {"sqrt_adjoint.json", "sin_adjoint.json"}) {
    const ElementalTable bad = from_file(name);
    const ElementalKind target = load_fault_registry(fixture::faults_dir() / name)[0].elemental;
    Sampler s(21);
    const Vector x = s.point(e.box);
    const Vector xd = s.direction(4);
    std::map<std::size_t, bool> crosses;
    const auto r = debug_forward(e.program, bad, x, xd, 8, {}, {},
                                 [&](std::size_t step, std::size_t, ElementalKind k, double adjoint) {
                                   if (k == target && adjoint != 0.0) crosses[step] = true;
                                 });
    REQUIRE(!crosses.empty());
    REQUIRE(r.first_failure);
    CHECK(*r.first_failure == crosses.begin()->first);
  }
}

TEST_CASE("reproducible") {
  const auto p = fixture::entry("mixed").program;
  const Vector x = vec({0.8, 1.2, 0.6, 1.1}), xd = vec({1, -1, 0.5, 0.25});
  const auto a = debug_forward(p, ElementalTable::standard(), x, xd, 3);
  const auto b = debug_forward(p, ElementalTable::standard(), x, xd, 3);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].adjoint_seed == b.steps[i].adjoint_seed);
    CHECK(a.steps[i].lhs == b.steps[i].lhs);
    CHECK(std::abs(a.steps[i].adjoint_seed) >= 1e-3);
  }
}

TEST_CASE("zero tangents are inconclusive") {
  const auto p = parse_program("inputs x\noutputs y\nc = const @ 2\ny = mul c x\n");
  const auto r = debug_forward(p, ElementalTable::standard(), vec({1}), vec({1}), 1);
  CHECK(r.steps[0].verdict == Verdict::Inconclusive);
  CHECK(r.steps[1].verdict == Verdict::Pass);
  CHECK(r.degenerate_tangent);
  CHECK_FALSE(r.first_failure);
}

TEST_CASE("fd_cross_check") {
  const auto sq = fixture::entry("square").program;
  const auto ok = fd_cross_check(sq, ElementalTable::standard(), vec({1.3}), vec({0.4}));
  CHECK(ok.verdict == Verdict::Pass);
  CHECK(ok.rel_err <= 1e-6);

  const auto s = fixture::entry("sqrt").program;
  const auto bad = fd_cross_check(s, from_file("sqrt_both.json"), vec({4}), vec({1}));
  CHECK(bad.jvp[0] == -0.25);
  CHECK(bad.fd[0] == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(bad.verdict == Verdict::Fail);
  CHECK(bad.rel_err >= 1e-2);

  CHECK(fd_cross_check(s, ElementalTable::standard(), vec({4}), vec({0})).verdict == Verdict::Inconclusive);
}
