#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "adinvar/algebra.hpp"
#include "adinvar/elemental.hpp"
#include "adinvar/elemental_table.hpp"

namespace adinvar {

enum class LayerKind : std::uint8_t { Tangent, Adjoint };

class Tape;

/// A scalar that may carry any stack of tangent and adjoint layers.
///
/// Layer tags are positive integers; a value at tag L holds components at
/// tags < L. A tangent layer stores (value, tangent); an adjoint layer
/// stores the value and a node on that layer's tape. Tag 0 is a plain
/// double. Values are immutable and cheap to copy.
class Real {
 public:
  Real() = default;
  Real(double value) : primal_(value) {}  // NOLINT(google-explicit-constructor)

  static Real dual(int tag, Real value, Real tangent);
  static Real variable(int tag, Real value, Tape* tape, std::size_t node);

  int tag() const noexcept;
  double primal() const noexcept { return primal_; }
  bool passive() const noexcept { return !cell_; }
  /// Structural zero: a passive exact 0.
  bool is_zero() const noexcept { return !cell_ && primal_ == 0.0; }

  /// Layer kind of the outermost layer; only for non-passive values.
  LayerKind kind() const;
  /// Component one layer down; only for non-passive values.
  const Real& value() const;

  /// The value with layer `tag` stripped, or itself if it has no such layer.
  Real below(int tag) const;
  /// Tangent component at `tag`, or 0 if the value is constant there.
  Real tangent_at(int tag) const;
  /// Tape node at `tag`, if the value is recorded on that tape.
  const std::size_t* node_at(int tag) const;
  /// Tape of the adjoint layer `tag`, if the value is recorded there.
  Tape* tape_at(int tag) const;

 private:
  struct Cell;

  double primal_ = 0.0;
  std::shared_ptr<const Cell> cell_;
};

struct Real::Cell {
  int tag = 0;
  LayerKind kind = LayerKind::Tangent;
  Real value;
  Real tangent;
  Tape* tape = nullptr;
  std::size_t node = 0;
};

struct TapeNode {
  ElementalKind elemental = ElementalKind::Id;
  bool input = false;
  std::uint8_t arity = 0;
  std::array<std::size_t, 2> operand{};
  std::array<Real, 2> partial{};
};

/// Per-evaluation record for one adjoint layer. Node partials are stored in
/// the scalar type of the layers below, so reverse sweeps are themselves
/// differentiable by enclosing layers.
class Tape {
 public:
  explicit Tape(int tag) : tag_(tag) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  int tag() const noexcept { return tag_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const TapeNode& operator[](std::size_t i) const { return nodes_[i]; }

  /// Registers an independent variable.
  Real input(Real value);
  std::size_t record(TapeNode node) {
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

 private:
  int tag_;
  std::vector<TapeNode> nodes_;
};

/// Called for every node the reverse sweep propagates through with a
/// non-zero adjoint.
using ReverseObserver = std::function<void(std::size_t node, const TapeNode&, const Real& adjoint)>;

/// Algebra over Real. Tangent layers propagate tangent pairs using the
/// table's tangent rules; adjoint layers record tape nodes whose partials
/// come from the table's adjoint rules.
class ActiveAlgebra {
 public:
  using Scalar = Real;

  explicit ActiveAlgebra(const ElementalTable& table = ElementalTable::standard()) : table_(&table) {}

  Real apply(ElementalKind kind, std::span<const Real> u, double param) const;
  Real constant(double c) const { return Real(c); }
  double primal(const Real& s) const { return s.primal(); }
  bool is_zero(const Real& s) const { return s.is_zero(); }

  Real add(const Real& a, const Real& b) const;
  Real mul(const Real& a, const Real& b) const;

  /// Adjoints of all nodes of `tape` after seeding `seeds` (node, adjoint)
  /// and sweeping nodes `last`, last-1, ..., 0.
  std::vector<Real> reverse(const Tape& tape, std::span<const std::pair<std::size_t, Real>> seeds, std::size_t last,
                            const ReverseObserver& observer = {}) const;

  const ElementalTable& table() const noexcept { return *table_; }

 private:
  const ElementalTable* table_;
};

static_assert(Algebra<ActiveAlgebra>);

}  // namespace adinvar
