#include "adinvar/oracle.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "adinvar/errors.hpp"

namespace adinvar {

double FDConfig::step_for_order(std::size_t order) const {
  const double exponent = 3.0 / static_cast<double>(order + 2 * richardson_levels);
  return std::pow(base_step, exponent);
}

void FDConfig::validate() const {
  if (!(base_step > 0.0) || base_step >= 1.0) throw UsageError("FD base step must lie in (0, 1)");
  if (richardson_levels < 1) throw UsageError("FD needs at least one Richardson level");
}

DerivTensor::DerivTensor(std::size_t order, std::size_t m, std::size_t n) : order_(order), m_(m), n_(n) {
  std::size_t cols = 1;
  for (std::size_t i = 0; i < order; ++i) cols *= n;
  entries_ = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(cols));
}

std::size_t DerivTensor::column(std::span<const std::size_t> j) const {
  std::size_t col = 0;
  for (std::size_t i = 0; i < order_; ++i) col = col * n_ + j[i];
  return col;
}

double& DerivTensor::operator()(std::size_t k, std::span<const std::size_t> j) {
  return entries_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(column(j)));
}

double DerivTensor::operator()(std::size_t k, std::span<const std::size_t> j) const {
  return entries_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(column(j)));
}

namespace {

// Richardson table for central differences (error expansion in h^2).
template <class Difference>
Vector richardson(std::size_t levels, double h, Difference&& difference) {
  std::vector<Vector> table;
  table.reserve(levels);
  for (std::size_t l = 0; l < levels; ++l) table.push_back(difference(h / std::ldexp(1.0, static_cast<int>(l))));
  for (std::size_t i = 1; i < levels; ++i) {
    const double factor = std::ldexp(1.0, static_cast<int>(2 * i)) - 1.0;
    for (std::size_t l = levels - 1; l >= i; --l) table[l] = table[l] + (table[l] - table[l - 1]) / factor;
  }
  return table.back();
}

}  // namespace

Vector fd_jvp(const Program& program, const Vector& x, const Vector& xdot, const FDConfig& config) {
  config.validate();
  const ResolvedProgram resolved(program);
  if (x.size() != xdot.size() || static_cast<std::size_t>(x.size()) != resolved.n_inputs()) {
    throw ShapeError("fd_jvp: x and xdot must have length " + std::to_string(resolved.n_inputs()));
  }
  const double direction_norm = xdot.lpNorm<Eigen::Infinity>();
  if (direction_norm == 0.0) return Vector::Zero(static_cast<Eigen::Index>(resolved.n_outputs()));
  const double scale = config.relative_scaling ? std::max(1.0, x.lpNorm<Eigen::Infinity>()) : 1.0;
  const double h = config.step_for_order(1) * scale / direction_norm;
  return richardson(config.richardson_levels, h, [&](double step) {
    const Vector plus = eval_primal(resolved, x + step * xdot);
    const Vector minus = eval_primal(resolved, x - step * xdot);
    return Vector((plus - minus) / (2.0 * step));
  });
}

DerivTensor fd_tensor(const Program& program, const Vector& x, std::size_t order, const FDConfig& config) {
  config.validate();
  const ResolvedProgram resolved(program);
  const std::size_t n = resolved.n_inputs();
  const std::size_t m = resolved.n_outputs();
  if (static_cast<std::size_t>(x.size()) != n) throw ShapeError("fd_tensor: x must have length " + std::to_string(n));
  if (order > kTensorOrderCap) {
    throw UsageError("fd_tensor supports orders up to " + std::to_string(kTensorOrderCap) + ", got " +
                     std::to_string(order));
  }
  std::size_t size = m;
  for (std::size_t i = 0; i < order; ++i) size *= n;
  if (size > kTensorSizeGuard) {
    throw UsageError("tensor of " + std::to_string(size) + " entries exceeds the guard of " +
                     std::to_string(kTensorSizeGuard));
  }

  const double h = config.step_for_order(std::max<std::size_t>(order, 1));
  std::vector<double> steps(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double xj = x[static_cast<Eigen::Index>(j)];
    steps[j] = config.relative_scaling ? h * std::max(1.0, std::abs(xj)) : h;
  }

  // d/dx_{dirs[0]} ... d/dx_{dirs[r-1]} F at point, innermost direction last.
  std::function<Vector(const Vector&, std::span<const std::size_t>)> nested =
      [&](const Vector& point, std::span<const std::size_t> dirs) -> Vector {
    if (dirs.empty()) return eval_primal(resolved, point);
    const std::size_t j = dirs.front();
    const auto rest = dirs.subspan(1);
    return richardson(config.richardson_levels, steps[j], [&](double step) {
      Vector plus = point;
      Vector minus = point;
      plus[static_cast<Eigen::Index>(j)] += step;
      minus[static_cast<Eigen::Index>(j)] -= step;
      return Vector((nested(plus, rest) - nested(minus, rest)) / (2.0 * step));
    });
  };

  DerivTensor raw(order, m, n);
  std::vector<std::size_t> j(order, 0);
  const std::size_t cols = static_cast<std::size_t>(raw.entries().cols());
  for (std::size_t col = 0; col < cols; ++col) {
    std::size_t rem = col;
    for (std::size_t i = order; i-- > 0;) {
      j[i] = rem % n;
      rem /= n;
    }
    raw.entries().col(static_cast<Eigen::Index>(col)) = nested(x, j);
  }
  if (order < 2) return raw;

  // Symmetrize by averaging over all permutations of (j_1..j_nu).
  std::vector<std::vector<std::size_t>> perms;
  std::vector<std::size_t> perm(order);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  DerivTensor sym(order, m, n);
  double asymmetry = 0.0;
  std::vector<std::size_t> permuted(order);
  for (std::size_t col = 0; col < cols; ++col) {
    std::size_t rem = col;
    for (std::size_t i = order; i-- > 0;) {
      j[i] = rem % n;
      rem /= n;
    }
    for (std::size_t k = 0; k < m; ++k) {
      const double base = raw(k, j);
      double sum = 0.0;
      for (const auto& p : perms) {
        for (std::size_t i = 0; i < order; ++i) permuted[i] = j[p[i]];
        const double value = raw(k, permuted);
        asymmetry = std::max(asymmetry, std::abs(value - base));
        sum += value;
      }
      sym(k, j) = sum / static_cast<double>(perms.size());
    }
  }
  sym.set_asymmetry(asymmetry);
  return sym;
}

namespace {

struct Working {
  std::vector<Slot> slots;
  std::vector<std::size_t> dims;
  std::vector<double> data;  // row-major over dims
};

Working working_copy(const DerivTensor& t, bool absolute) {
  Working w;
  w.slots.push_back(Slot::k());
  w.dims.push_back(t.m());
  for (std::size_t i = 1; i <= t.order(); ++i) {
    w.slots.push_back(Slot::j(i));
    w.dims.push_back(t.n());
  }
  const auto& e = t.entries();
  w.data.assign(e.data(), e.data() + e.size());
  if (absolute) {
    for (double& v : w.data) v = std::abs(v);
  }
  return w;
}

void bind(Working& w, const Binding& b, bool absolute) {
  const auto it = std::find(w.slots.begin(), w.slots.end(), b.slot);
  if (it == w.slots.end()) throw UsageError("slot " + b.slot.name() + " is unknown or already bound");
  const auto p = static_cast<std::size_t>(it - w.slots.begin());
  const std::size_t d = w.dims[p];
  if (static_cast<std::size_t>(b.vector.size()) != d) {
    throw ShapeError("slot " + b.slot.name() + " needs a vector of length " + std::to_string(d) + ", got " +
                     std::to_string(b.vector.size()));
  }
  std::size_t outer = 1;
  for (std::size_t i = 0; i < p; ++i) outer *= w.dims[i];
  std::size_t inner = 1;
  for (std::size_t i = p + 1; i < w.dims.size(); ++i) inner *= w.dims[i];

  std::vector<double> out(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t r = 0; r < inner; ++r) {
      double acc = 0.0;
      for (std::size_t s = 0; s < d; ++s) {
        const double u = b.vector[static_cast<Eigen::Index>(s)];
        acc += w.data[(o * d + s) * inner + r] * (absolute ? std::abs(u) : u);
      }
      out[o * inner + r] = acc;
    }
  }
  w.data = std::move(out);
  w.slots.erase(it);
  w.dims.erase(w.dims.begin() + static_cast<std::ptrdiff_t>(p));
}

Vector run_contraction(const DerivTensor& t, std::span<const Binding> bindings, bool absolute) {
  Working w = working_copy(t, absolute);
  for (const Binding& b : bindings) bind(w, b, absolute);
  if (w.slots.size() > 1) {
    throw UsageError("contraction leaves " + std::to_string(w.slots.size()) + " free slots; at most one allowed");
  }
  return Eigen::Map<const Vector>(w.data.data(), static_cast<Eigen::Index>(w.data.size()));
}

}  // namespace

Vector contract(const DerivTensor& tensor, std::span<const Binding> bindings) {
  return run_contraction(tensor, bindings, false);
}

double contraction_scale(const DerivTensor& tensor, std::span<const Binding> bindings) {
  return run_contraction(tensor, bindings, true).lpNorm<Eigen::Infinity>();
}

double check_contraction_commutativity(const DerivTensor& tensor, std::span<const Binding> bindings,
                                       std::span<const std::size_t> permutation) {
  if (permutation.size() != bindings.size()) throw UsageError("permutation length differs from binding count");
  std::vector<bool> seen(bindings.size(), false);
  std::vector<Binding> reordered;
  for (std::size_t i : permutation) {
    if (i >= bindings.size() || seen[i]) throw UsageError("not a permutation");
    seen[i] = true;
    reordered.push_back(bindings[i]);
  }
  const Vector a = contract(tensor, bindings);
  const Vector b = contract(tensor, reordered);
  return (a - b).lpNorm<Eigen::Infinity>();
}

std::vector<Binding> bindings_for(const ModeWord& word, const SeedBundle& seeds) {
  if (seeds.size() != word.order()) throw ShapeError("one seed per level expected");
  std::vector<Binding> out;
  Slot free = Slot::k();
  for (std::size_t i = 0; i < word.order(); ++i) {
    if (word[i] == Mode::Tangent) {
      out.push_back({Slot::j(i + 1), seeds[i]});
    } else {
      out.push_back({free, seeds[i]});
      free = Slot::j(i + 1);
    }
  }
  return out;
}

}  // namespace adinvar
