#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "adinvar/deriv.hpp"
#include "adinvar/program.hpp"

namespace adinvar {

/// Finite-difference settings. The step for a derivative of order nu
/// extrapolated over L step sizes is base_step^(3 / (nu + 2L)); for nu = 1,
/// L = 1 this is base_step itself.
struct FDConfig {
  double base_step = std::cbrt(std::numeric_limits<double>::epsilon());
  bool relative_scaling = true;         // h_j = h * max(1, |x_j|)
  std::size_t richardson_levels = 2;    // number of step sizes h, h/2, ...

  double step_for_order(std::size_t order) const;
  void validate() const;
};

/// Dense F^[nu](x) stored as an m x n^nu row-major matrix; the column index
/// flattens (j_1, ..., j_nu) with j_1 most significant.
class DerivTensor {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  DerivTensor(std::size_t order, std::size_t m, std::size_t n);

  std::size_t order() const noexcept { return order_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t n() const noexcept { return n_; }

  double& operator()(std::size_t k, std::span<const std::size_t> j);
  double operator()(std::size_t k, std::span<const std::size_t> j) const;

  const Matrix& entries() const noexcept { return entries_; }
  Matrix& entries() noexcept { return entries_; }

  /// Largest |T(k, pi(j)) - T(k, j)| before symmetrization (0 if built directly).
  double asymmetry() const noexcept { return asymmetry_; }
  void set_asymmetry(double value) noexcept { asymmetry_ = value; }

  std::size_t column(std::span<const std::size_t> j) const;

 private:
  std::size_t order_;
  std::size_t m_;
  std::size_t n_;
  Matrix entries_;
  double asymmetry_ = 0.0;
};

/// Central-difference directional derivative with Richardson extrapolation.
/// Never touches the derivative table.
Vector fd_jvp(const Program& program, const Vector& x, const Vector& xdot, const FDConfig& config = {});

/// Largest tensor fd_tensor accepts (m * n^nu).
inline constexpr std::size_t kTensorSizeGuard = 10'000;
inline constexpr std::size_t kTensorOrderCap = 3;

/// All entries of F^[nu](x) by nested central differences, symmetrized over
/// permutations of the j indices.
DerivTensor fd_tensor(const Program& program, const Vector& x, std::size_t order, const FDConfig& config = {});

/// An index slot of a derivative tensor: k, or j_i with i in 1..nu.
struct Slot {
  bool is_k = true;
  std::size_t index = 0;

  static Slot k() { return {true, 0}; }
  static Slot j(std::size_t i) { return {false, i}; }
  std::string name() const { return is_k ? "k" : "j_" + std::to_string(index); }
  bool operator==(const Slot&) const = default;
};

struct Binding {
  Slot slot;
  Vector vector;
};

/// Contracts the bound slots in the given order, each with ascending
/// summation. At most one slot may stay free; the result has its length
/// (length 1 when every slot is bound).
Vector contract(const DerivTensor& tensor, std::span<const Binding> bindings);

/// The same contraction on |T| and |vectors|: the natural rounding scale.
double contraction_scale(const DerivTensor& tensor, std::span<const Binding> bindings);

/// max |contract(bindings) - contract(bindings permuted)|; `permutation[i]`
/// names the binding applied i-th in the second order.
double check_contraction_commutativity(const DerivTensor& tensor, std::span<const Binding> bindings,
                                       std::span<const std::size_t> permutation);

/// Bindings under which contract(F^[nu], ...) equals derive(word, seeds):
/// a tangent level i binds j_i to its seed; an adjoint level binds the
/// current free slot and frees j_i.
std::vector<Binding> bindings_for(const ModeWord& word, const SeedBundle& seeds);

}  // namespace adinvar
