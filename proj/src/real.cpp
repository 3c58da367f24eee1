#include "adinvar/real.hpp"

#include <stdexcept>

namespace adinvar {

Real Real::dual(int tag, Real value, Real tangent) {
  Real r;
  r.primal_ = value.primal();
  auto cell = std::make_shared<Cell>();
  cell->tag = tag;
  cell->kind = LayerKind::Tangent;
  cell->value = std::move(value);
  cell->tangent = std::move(tangent);
  r.cell_ = std::move(cell);
  return r;
}

Real Real::variable(int tag, Real value, Tape* tape, std::size_t node) {
  Real r;
  r.primal_ = value.primal();
  auto cell = std::make_shared<Cell>();
  cell->tag = tag;
  cell->kind = LayerKind::Adjoint;
  cell->value = std::move(value);
  cell->tape = tape;
  cell->node = node;
  r.cell_ = std::move(cell);
  return r;
}

int Real::tag() const noexcept { return cell_ ? cell_->tag : 0; }

LayerKind Real::kind() const {
  if (!cell_) throw std::logic_error("passive Real has no layer");
  return cell_->kind;
}

const Real& Real::value() const {
  if (!cell_) throw std::logic_error("passive Real has no layer");
  return cell_->value;
}

Real Real::below(int tag) const { return cell_ && cell_->tag == tag ? cell_->value : *this; }

Real Real::tangent_at(int tag) const {
  if (cell_ && cell_->tag == tag && cell_->kind == LayerKind::Tangent) return cell_->tangent;
  return Real(0.0);
}

const std::size_t* Real::node_at(int tag) const {
  if (cell_ && cell_->tag == tag && cell_->kind == LayerKind::Adjoint) return &cell_->node;
  return nullptr;
}

Tape* Real::tape_at(int tag) const {
  if (cell_ && cell_->tag == tag && cell_->kind == LayerKind::Adjoint) return cell_->tape;
  return nullptr;
}

Real Tape::input(Real value) {
  TapeNode node;
  node.input = true;
  const std::size_t index = record(std::move(node));
  return Real::variable(tag_, std::move(value), this, index);
}

Real ActiveAlgebra::apply(ElementalKind kind, std::span<const Real> u, double param) const {
  int top = 0;
  const Real* lead = nullptr;
  for (const Real& r : u) {
    if (r.tag() > top) {
      top = r.tag();
      lead = &r;
    }
  }
  if (top == 0) {
    std::array<double, 2> plain{};
    for (std::size_t i = 0; i < u.size(); ++i) plain[i] = u[i].primal();
    return Real(elemental_value(kind, std::span<const double>(plain.data(), u.size()), param));
  }

  std::array<Real, 2> inner;
  unsigned mask = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i].tag() == top) {
      inner[i] = u[i].value();
      mask |= 1u << i;
    } else {
      inner[i] = u[i];
    }
  }
  const std::span<const Real> args(inner.data(), u.size());
  Real value = apply(kind, args, param);

  if (lead->kind() == LayerKind::Tangent) {
    const auto d = table_->partials(*this, kind, RuleMode::Tangent, args, param, mask);
    Real tangent(0.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (mask & (1u << i)) tangent = add(tangent, mul(d[i], u[i].tangent_at(top)));
    }
    if (tangent.is_zero()) return value;
    return Real::dual(top, std::move(value), std::move(tangent));
  }

  const auto d = table_->partials(*this, kind, RuleMode::Adjoint, args, param, mask);
  Tape* tape = nullptr;
  TapeNode node;
  node.elemental = kind;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(mask & (1u << i))) continue;
    const std::size_t* operand = u[i].node_at(top);
    if (tape == nullptr) tape = u[i].tape_at(top);
    node.operand[node.arity] = *operand;
    node.partial[node.arity] = d[i];
    ++node.arity;
  }
  const std::size_t index = tape->record(std::move(node));
  return Real::variable(top, std::move(value), tape, index);
}

Real ActiveAlgebra::add(const Real& a, const Real& b) const {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const std::array<Real, 2> args{a, b};
  return apply(ElementalKind::Add, args, 0.0);
}

Real ActiveAlgebra::mul(const Real& a, const Real& b) const {
  if (a.is_zero() || b.is_zero()) return Real(0.0);
  if (a.passive() && a.primal() == 1.0) return b;
  if (b.passive() && b.primal() == 1.0) return a;
  const std::array<Real, 2> args{a, b};
  return apply(ElementalKind::Mul, args, 0.0);
}

std::vector<Real> ActiveAlgebra::reverse(const Tape& tape, std::span<const std::pair<std::size_t, Real>> seeds,
                                         std::size_t last, const ReverseObserver& observer) const {
  std::vector<Real> adjoint(tape.size());
  for (const auto& [node, seed] : seeds) adjoint[node] = add(adjoint[node], seed);
  if (tape.size() == 0) return adjoint;
  for (std::size_t i = last + 1; i-- > 0;) {
    if (adjoint[i].is_zero()) continue;
    const TapeNode& node = tape[i];
    if (observer) observer(i, node, adjoint[i]);
    for (std::size_t k = 0; k < node.arity; ++k) {
      adjoint[node.operand[k]] = add(adjoint[node.operand[k]], mul(node.partial[k], adjoint[i]));
    }
  }
  return adjoint;
}

}  // namespace adinvar
