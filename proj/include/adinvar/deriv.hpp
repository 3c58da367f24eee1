#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "adinvar/elemental_table.hpp"
#include "adinvar/program.hpp"

namespace adinvar {

enum class Mode : std::uint8_t { Tangent, Adjoint };

/// Sequence of differentiation modes in application order: element 0 is the
/// first differentiation applied to the primal. The conventional name reads
/// the other way round, so [A, T] is the "tangent of adjoint" program.
class ModeWord {
 public:
  ModeWord() = default;
  ModeWord(std::initializer_list<Mode> modes) : modes_(modes) {}
  explicit ModeWord(std::vector<Mode> modes) : modes_(std::move(modes)) {}

  /// Letters over {t, a} in application order, e.g. "ataat". Throws UsageError.
  static ModeWord parse(std::string_view letters);

  std::size_t order() const noexcept { return modes_.size(); }
  bool empty() const noexcept { return modes_.empty(); }
  Mode operator[](std::size_t i) const { return modes_[i]; }
  Mode back() const { return modes_.back(); }
  auto begin() const noexcept { return modes_.begin(); }
  auto end() const noexcept { return modes_.end(); }

  /// This word followed by `mode`.
  ModeWord then(Mode mode) const;
  /// The first `length` modes.
  ModeWord prefix(std::size_t length) const;

  std::string letters() const;
  /// "tangent of adjoint of ..." read outside-in; "primal" for the empty word.
  std::string outside_in_name() const;

  bool operator==(const ModeWord&) const = default;
  auto operator<=>(const ModeWord&) const = default;

 private:
  std::vector<Mode> modes_;
};

/// The single free index carried by a derivative program's result.
/// free_index == 0 stands for k (y-shaped, dim m); i > 0 for j_i (dim n).
struct Shape {
  enum class Kind : std::uint8_t { X, Y };

  Kind kind = Kind::Y;
  std::size_t dim = 0;
  std::size_t free_index = 0;

  static Shape y(std::size_t m) { return {Kind::Y, m, 0}; }
  static Shape x(std::size_t n, std::size_t level) { return {Kind::X, n, level}; }

  /// "k" or "j_<i>".
  std::string index_name() const;
  std::string to_string() const;
  bool operator==(const Shape&) const = default;
};

struct ShapePlan {
  std::vector<Shape> seeds;  // one per level
  Shape output;
};

ShapePlan infer_shapes(std::size_t n, std::size_t m, const ModeWord& word);
ShapePlan infer_shapes(const Program& program, const ModeWord& word);

/// Direction vectors per level: x^(i) for tangent levels, v_(i) for adjoint
/// levels (matching the shape of the level below).
using SeedBundle = std::vector<Vector>;

struct DerivResult {
  Vector value;           // order-nu result
  Shape shape;            // shape of value
  Vector primal_y;        // F(x), bit-identical to eval_primal
  Vector intermediate_v;  // order-(nu-1) result at x; empty for nu = 0
};

/// Order cap from ADINVAR_ORDER_CAP, else 8.
std::size_t default_order_cap();

struct DeriveOptions {
  std::size_t order_cap = default_order_cap();
  const ElementalTable* table = &ElementalTable::standard();
};

/// Evaluates the derivative program selected by `word` by recursive nesting:
/// the last mode wraps plain doubles, each earlier mode wraps the layer
/// after it, and the primal SAC runs on the outermost scalars.
DerivResult derive(const ResolvedProgram& program, const ModeWord& word, const Vector& x, const SeedBundle& seeds,
                   const DeriveOptions& options = {});
DerivResult derive(const Program& program, const ModeWord& word, const Vector& x, const SeedBundle& seeds,
                   const DeriveOptions& options = {});

struct TangentResult {
  Vector y;
  Vector ydot;
};

struct AdjointResult {
  Vector y;
  Vector xbar;
};

/// (F(x), F'(x) xdot).
TangentResult jvp(const Program& program, const Vector& x, const Vector& xdot,
                  const ElementalTable& table = ElementalTable::standard());
/// (F(x), F'(x)^T ybar) via a per-call tape.
AdjointResult vjp(const Program& program, const Vector& x, const Vector& ybar,
                  const ElementalTable& table = ElementalTable::standard());

/// The four second-order programs, named outside-in.
enum class SecondOrderKind : std::uint8_t { TT, AT, TA, AA };

/// TT -> [T,T], AT -> [T,A], TA -> [A,T], AA -> [A,A].
ModeWord word_of(SecondOrderKind kind);

DerivResult second_order(const Program& program, SecondOrderKind kind, const Vector& x, const SeedBundle& seeds,
                         const DeriveOptions& options = {});

}  // namespace adinvar
