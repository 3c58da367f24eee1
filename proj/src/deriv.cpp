#include "adinvar/deriv.hpp"

#include <cstdlib>
#include <string>
#include <utility>

#include "adinvar/errors.hpp"
#include "adinvar/real.hpp"

namespace adinvar {

ModeWord ModeWord::parse(std::string_view letters) {
  std::vector<Mode> modes;
  for (char c : letters) {
    if (c == 't' || c == 'T') {
      modes.push_back(Mode::Tangent);
    } else if (c == 'a' || c == 'A') {
      modes.push_back(Mode::Adjoint);
    } else {
      throw UsageError("mode word '" + std::string(letters) + "' may only contain t and a");
    }
  }
  return ModeWord(std::move(modes));
}

ModeWord ModeWord::then(Mode mode) const {
  ModeWord out = *this;
  out.modes_.push_back(mode);
  return out;
}

ModeWord ModeWord::prefix(std::size_t length) const {
  return ModeWord(std::vector<Mode>(modes_.begin(), modes_.begin() + static_cast<std::ptrdiff_t>(length)));
}

std::string ModeWord::letters() const {
  std::string out;
  for (Mode m : modes_) out += m == Mode::Tangent ? 't' : 'a';
  return out;
}

std::string ModeWord::outside_in_name() const {
  if (modes_.empty()) return "primal";
  std::string out;
  for (auto it = modes_.rbegin(); it != modes_.rend(); ++it) {
    if (!out.empty()) out += " of ";
    out += *it == Mode::Tangent ? "tangent" : "adjoint";
  }
  return out;
}

std::string Shape::index_name() const { return kind == Kind::Y ? "k" : "j_" + std::to_string(free_index); }

std::string Shape::to_string() const {
  return index_name() + (kind == Kind::Y ? " (m=" : " (n=") + std::to_string(dim) + ")";
}

ShapePlan infer_shapes(std::size_t n, std::size_t m, const ModeWord& word) {
  ShapePlan plan;
  Shape current = Shape::y(m);
  for (std::size_t i = 0; i < word.order(); ++i) {
    if (word[i] == Mode::Tangent) {
      plan.seeds.push_back(Shape::x(n, i + 1));
    } else {
      plan.seeds.push_back(current);
      current = Shape::x(n, i + 1);
    }
  }
  plan.output = current;
  return plan;
}

ShapePlan infer_shapes(const Program& program, const ModeWord& word) {
  return infer_shapes(program.n_inputs(), program.n_outputs(), word);
}

std::size_t default_order_cap() {
  if (const char* env = std::getenv("ADINVAR_ORDER_CAP"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (*end != '\0' || cap < 1) throw UsageError(std::string("ADINVAR_ORDER_CAP must be a positive integer, got ") + env);
    return static_cast<std::size_t>(cap);
  }
  return 8;
}

namespace {

std::vector<double> primals(const std::vector<Real>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (const Real& r : values) out.push_back(r.primal());
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

class Nesting {
 public:
  Nesting(const ResolvedProgram& program, const ModeWord& word, const SeedBundle& seeds, const ElementalTable& table)
      : program_(program), word_(word), seeds_(seeds), alg_(table) {}

  // Result of the program made of the first `level` modes, as a function of x.
  std::vector<Real> run(std::size_t level, std::vector<Real> x) {
    if (level == 0) {
      auto y = evaluate(program_, alg_, std::span<const Real>(x));
      primal_y_ = primals(y);
      return y;
    }
    const int tag = static_cast<int>(word_.order() - level + 1);
    const Vector& seed = seeds_[level - 1];
    const bool top = level == word_.order();

    if (word_[level - 1] == Mode::Tangent) {
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double direction = seed[static_cast<Eigen::Index>(j)];
        if (direction != 0.0) x[j] = Real::dual(tag, std::move(x[j]), Real(direction));
      }
      std::vector<Real> out = run(level - 1, std::move(x));
      if (top) intermediate_ = primals(out);
      std::vector<Real> result;
      result.reserve(out.size());
      for (const Real& r : out) result.push_back(r.tangent_at(tag));
      return result;
    }

    Tape tape(tag);
    std::vector<std::size_t> input_nodes;
    for (Real& xj : x) {
      xj = tape.input(std::move(xj));
      input_nodes.push_back(*xj.node_at(tag));
    }
    std::vector<Real> out = run(level - 1, std::move(x));
    if (top) intermediate_ = primals(out);
    std::vector<std::pair<std::size_t, Real>> output_seeds;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const std::size_t* node = out[k].node_at(tag);
      const double direction = seed[static_cast<Eigen::Index>(k)];
      if (node != nullptr && direction != 0.0) output_seeds.emplace_back(*node, Real(direction));
    }
    const auto adjoint = alg_.reverse(tape, output_seeds, tape.size() - 1);
    std::vector<Real> result;
    result.reserve(input_nodes.size());
    for (std::size_t node : input_nodes) result.push_back(adjoint[node]);
    return result;
  }

  const std::vector<double>& primal_y() const { return primal_y_; }
  const std::vector<double>& intermediate() const { return intermediate_; }

 private:
  const ResolvedProgram& program_;
  const ModeWord& word_;
  const SeedBundle& seeds_;
  ActiveAlgebra alg_;
  std::vector<double> primal_y_;
  std::vector<double> intermediate_;
};

}  // namespace

DerivResult derive(const ResolvedProgram& program, const ModeWord& word, const Vector& x, const SeedBundle& seeds,
                   const DeriveOptions& options) {
  if (word.order() > options.order_cap) {
    throw OrderCapError("derivative order " + std::to_string(word.order()) + " exceeds the cap of " +
                        std::to_string(options.order_cap));
  }
  const std::size_t n = program.n_inputs();
  if (static_cast<std::size_t>(x.size()) != n) {
    throw ShapeError("x has length " + std::to_string(x.size()) + ", expected " + std::to_string(n));
  }
  const ShapePlan plan = infer_shapes(n, program.n_outputs(), word);
  if (seeds.size() != word.order()) {
    throw ShapeError("mode word '" + word.letters() + "' needs " + std::to_string(word.order()) + " seed(s), got " +
                     std::to_string(seeds.size()));
  }
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (static_cast<std::size_t>(seeds[i].size()) != plan.seeds[i].dim) {
      throw ShapeError("seed " + std::to_string(i + 1) + " has length " + std::to_string(seeds[i].size()) +
                       ", expected " + std::to_string(plan.seeds[i].dim) + " for index " + plan.seeds[i].index_name());
    }
  }

  Nesting nesting(program, word, seeds, *options.table);
  std::vector<Real> inputs(x.data(), x.data() + x.size());
  const std::vector<Real> out = nesting.run(word.order(), std::move(inputs));

  DerivResult result;
  result.value = to_vector(primals(out));
  result.shape = plan.output;
  result.primal_y = to_vector(nesting.primal_y());
  result.intermediate_v = to_vector(nesting.intermediate());
  return result;
}

DerivResult derive(const Program& program, const ModeWord& word, const Vector& x, const SeedBundle& seeds,
                   const DeriveOptions& options) {
  return derive(ResolvedProgram(program), word, x, seeds, options);
}

TangentResult jvp(const Program& program, const Vector& x, const Vector& xdot, const ElementalTable& table) {
  DeriveOptions options;
  options.table = &table;
  DerivResult r = derive(program, ModeWord{Mode::Tangent}, x, {xdot}, options);
  return {std::move(r.primal_y), std::move(r.value)};
}

AdjointResult vjp(const Program& program, const Vector& x, const Vector& ybar, const ElementalTable& table) {
  DeriveOptions options;
  options.table = &table;
  DerivResult r = derive(program, ModeWord{Mode::Adjoint}, x, {ybar}, options);
  return {std::move(r.primal_y), std::move(r.value)};
}

ModeWord word_of(SecondOrderKind kind) {
  switch (kind) {
    case SecondOrderKind::TT: return {Mode::Tangent, Mode::Tangent};
    case SecondOrderKind::AT: return {Mode::Tangent, Mode::Adjoint};
    case SecondOrderKind::TA: return {Mode::Adjoint, Mode::Tangent};
    case SecondOrderKind::AA: return {Mode::Adjoint, Mode::Adjoint};
  }
  return {};
}

DerivResult second_order(const Program& program, SecondOrderKind kind, const Vector& x, const SeedBundle& seeds,
                         const DeriveOptions& options) {
  return derive(program, word_of(kind), x, seeds, options);
}

}  // namespace adinvar
