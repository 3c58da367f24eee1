#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "adinvar/elemental_table.hpp"
#include "adinvar/invariants.hpp"
#include "adinvar/oracle.hpp"
#include "adinvar/program.hpp"

namespace adinvar {

enum class FaultMode : std::uint8_t { TangentOnly, AdjointOnly, Both };

/// Replaces the partial rules of one elemental on one or both sides.
struct FaultSpec {
  ElementalKind elemental = ElementalKind::Id;
  FaultMode mode = FaultMode::Both;
  std::vector<RuleExpr> replacement;
};

/// Copy of `table` with the fault applied. Throws UsageError on a
/// replacement whose size does not match the elemental's arity.
ElementalTable inject_fault(const ElementalTable& table, const FaultSpec& fault);
ElementalTable inject_faults(const ElementalTable& table, std::span<const FaultSpec> faults);

/// JSON registry: an object or a list of objects
///   {"elemental": "sqrt", "mode": "adjoint", "replacement": "-0.5/sqrt(u1)"}
/// with mode one of tangent, adjoint, both and replacement a rule string or
/// a list of them (one per operand). Throws ParseError / UsageError.
std::vector<FaultSpec> parse_fault_registry(std::string_view json_text);
std::vector<FaultSpec> load_fault_registry(const std::filesystem::path& path);

struct StepReport {
  std::size_t step = 0;        // 1-based
  double tangent = 0.0;        // v_s^(1)
  double adjoint_seed = 0.0;   // v_(1),s
  double lhs = 0.0;            // x_(1) . x^(1)
  double rhs = 0.0;            // v_(1),s * v_s^(1)
  double abs_err = 0.0;
  double rel_err = 0.0;
  Verdict verdict = Verdict::Pass;
};

struct DebugReport {
  std::vector<StepReport> steps;
  std::optional<std::size_t> first_failure;  // step number
  bool degenerate_tangent = false;           // some checked step had v^(1) == 0
};

/// Reverse-sweep event while re-checking `step`: `origin` is the SAC step
/// whose tape node the sweep passed (0 for inputs).
using SweepTrace = std::function<void(std::size_t step, std::size_t origin, ElementalKind elemental, double adjoint)>;

/// Checks the first-order invariant of every prefix program F_s (the SAC cut
/// after step s, output v_s) in increasing s, reusing one tangent run and one
/// tape. `steps` restricts the checks; empty means all steps.
DebugReport debug_forward(const Program& program, const ElementalTable& table, const Vector& x, const Vector& xdot,
                          std::uint64_t rng_seed = kDefaultRngSeed, const TolerancePolicy& tol = {},
                          std::span<const std::size_t> steps = {}, const SweepTrace& trace = {});

struct CrossCheckReport {
  Vector jvp;
  Vector fd;
  double abs_err = 0.0;  // max over components
  double rel_err = 0.0;
  Verdict verdict = Verdict::Pass;
};

/// Looser tolerance for comparisons against finite differences.
TolerancePolicy fd_tolerance();

/// Tangent result under `table` against fd_jvp. Inconclusive for xdot = 0.
CrossCheckReport fd_cross_check(const Program& program, const ElementalTable& table, const Vector& x,
                                const Vector& xdot, const FDConfig& config = {},
                                const TolerancePolicy& tol = fd_tolerance());

}  // namespace adinvar
