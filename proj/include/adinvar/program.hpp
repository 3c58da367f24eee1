#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adinvar/algebra.hpp"
#include "adinvar/elemental.hpp"
#include "adinvar/errors.hpp"

namespace adinvar {

using Vector = Eigen::VectorXd;

/// One SAC line: `target = elemental operand... [@ param]`.
struct Assignment {
  std::string target;
  ElementalKind elemental = ElementalKind::Id;
  std::vector<std::string> operands;
  std::optional<double> param;

  bool operator==(const Assignment&) const = default;
};

/// Single assignment code for F: R^n -> R^m. Immutable once parsed.
struct Program {
  std::string name = "program";
  std::vector<std::string> input_vars;
  std::vector<std::string> output_vars;
  std::vector<Assignment> steps;

  std::size_t n_inputs() const noexcept { return input_vars.size(); }
  std::size_t n_outputs() const noexcept { return output_vars.size(); }

  /// Structural identity (ignores the name).
  bool same_structure(const Program& other) const {
    return input_vars == other.input_vars && output_vars == other.output_vars && steps == other.steps;
  }
};

struct Violation {
  enum class Kind : std::uint8_t {
    NoInputs,
    NoOutputs,
    DuplicateInput,
    DuplicateOutput,
    OutputIsInput,
    OutputUndefined,
    InputAssigned,
    Reassigned,
    UseBeforeDef,
    ArityMismatch,
    MissingParam,
    UnexpectedParam,
  };

  Kind kind;
  std::optional<std::size_t> step;  // 1-based
  std::string variable;

  std::string message() const;
  bool operator==(const Violation&) const = default;
};

/// Every violated structural invariant; empty means valid.
std::vector<Violation> validate_program(const Program& program);

/// Parses SAC text. Throws ParseError carrying line and column.
Program parse_program(std::string_view text, std::string name = "program");

/// Reads a .sac file; the program is named after the file stem.
Program load_program(const std::filesystem::path& path);

/// Canonical text form; parse_program(to_text(p)) reproduces p.
std::string to_text(const Program& program);

/// A program with variable names resolved to slots, ready for evaluation.
class ResolvedProgram {
 public:
  struct Step {
    ElementalKind elemental;
    std::vector<std::size_t> operands;
    double param = 0.0;
    std::size_t target = 0;
  };

  /// Throws UsageError when the program does not validate.
  explicit ResolvedProgram(const Program& program);

  std::size_t n_inputs() const noexcept { return n_inputs_; }
  std::size_t n_outputs() const noexcept { return outputs_.size(); }
  std::size_t n_slots() const noexcept { return n_inputs_ + steps_.size(); }
  const std::vector<Step>& steps() const noexcept { return steps_; }
  std::span<const std::size_t> outputs() const noexcept { return outputs_; }

 private:
  std::size_t n_inputs_ = 0;
  std::vector<Step> steps_;
  std::vector<std::size_t> outputs_;
};

/// Evaluates the SAC step by step in the given algebra. `on_step(s, value)`
/// sees every step result (s is 1-based). Domain errors get the step attached.
template <Algebra A, class OnStep>
std::vector<typename A::Scalar> evaluate(const ResolvedProgram& program, const A& alg,
                                         std::span<const typename A::Scalar> x, OnStep&& on_step) {
  using S = typename A::Scalar;
  if (x.size() != program.n_inputs()) {
    throw ShapeError("expected " + std::to_string(program.n_inputs()) + " inputs, got " + std::to_string(x.size()));
  }
  std::vector<S> slots(program.n_slots());
  std::copy(x.begin(), x.end(), slots.begin());
  std::vector<S> args;
  std::size_t s = 0;
  for (const auto& step : program.steps()) {
    ++s;
    args.clear();
    for (std::size_t slot : step.operands) args.push_back(slots[slot]);
    try {
      slots[step.target] = alg.apply(step.elemental, std::span<const S>(args), step.param);
    } catch (const DomainError& e) {
      if (e.step()) throw;
      throw e.at_step(s);
    }
    on_step(s, slots[step.target]);
  }
  std::vector<S> y;
  y.reserve(program.n_outputs());
  for (std::size_t slot : program.outputs()) y.push_back(slots[slot]);
  return y;
}

template <Algebra A>
std::vector<typename A::Scalar> evaluate(const ResolvedProgram& program, const A& alg,
                                         std::span<const typename A::Scalar> x) {
  return evaluate(program, alg, x, [](std::size_t, const typename A::Scalar&) {});
}

/// y = F(x) in plain floating point.
Vector eval_primal(const Program& program, const Vector& x);
Vector eval_primal(const ResolvedProgram& program, const Vector& x);

}  // namespace adinvar
