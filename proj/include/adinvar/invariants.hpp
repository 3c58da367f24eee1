#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adinvar/corpus.hpp"
#include "adinvar/deriv.hpp"
#include "adinvar/program.hpp"

namespace adinvar {

inline constexpr std::uint64_t kDefaultRngSeed = 20200101;

/// Acceptance thresholds. Both grow by `order_growth` per order above one.
struct TolerancePolicy {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double order_growth = 10.0;

  double abs_at(std::size_t nu) const;
  double rel_at(std::size_t nu) const;
  void validate() const;
};

enum class Verdict : std::uint8_t { Pass, Fail, Inconclusive, Error };

std::string_view to_string(Verdict verdict);

/// Fixed ascending summation order.
double dot(const Vector& a, const Vector& b);

struct Comparison {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  Verdict verdict = Verdict::Pass;
};

/// rel_err = abs_err / max(|lhs|, |rhs|, tiny). Passes when either error is
/// within the order-nu tolerance.
Comparison compare(double lhs, double rhs, const TolerancePolicy& tol, std::size_t nu);

struct InvariantReport {
  std::string program;
  ModeWord prefix;  // order nu - 1
  std::size_t nu = 1;
  double lhs = 0.0;  // x_(nu) . x^(nu)
  double rhs = 0.0;  // v_(nu) . v^(nu)
  double abs_err = 0.0;
  double rel_err = 0.0;
  Verdict verdict = Verdict::Pass;
  double tol_abs = 0.0;
  double tol_rel = 0.0;
  std::uint64_t rng_seed = 0;
  std::uint64_t case_seed = 0;
  std::string message;  // set for Error verdicts
};

/// One JSON object, stable field order, no trailing newline.
std::string to_json_line(const InvariantReport& report);

/// Tables used for the tangent and adjoint extensions of the prefix
/// program. Different tables model a fault on one side only.
struct CheckOptions {
  const ElementalTable* tangent_side = &ElementalTable::standard();
  const ElementalTable* adjoint_side = &ElementalTable::standard();
  std::size_t order_cap = default_order_cap();

  static CheckOptions with_table(const ElementalTable& table) {
    CheckOptions o;
    o.tangent_side = &table;
    o.adjoint_side = &table;
    return o;
  }
};

/// x_(nu) . x^(nu) = v_(nu) . v^(nu) for the program `prefix` of order
/// nu - 1: runs prefix+[T] seeded with x_nu_seed and prefix+[A] seeded with
/// v_nu_seed.
InvariantReport check_order(const ResolvedProgram& program, const ModeWord& prefix, const Vector& x,
                            const SeedBundle& prefix_seeds, const Vector& x_nu_seed, const Vector& v_nu_seed,
                            const TolerancePolicy& tol = {}, const CheckOptions& options = {});
InvariantReport check_order(const Program& program, const ModeWord& prefix, const Vector& x,
                            const SeedBundle& prefix_seeds, const Vector& x_nu_seed, const Vector& v_nu_seed,
                            const TolerancePolicy& tol = {}, const CheckOptions& options = {});

/// xbar . xdot = ybar . ydot.
InvariantReport check_first_order(const Program& program, const Vector& x, const Vector& xdot, const Vector& ybar,
                                  const TolerancePolicy& tol = {}, const CheckOptions& options = {});

enum class SecondOrderPair : std::uint8_t {
  TT_vs_AT,  // seeds: x^(1), x^(2), y^(1)_(2)
  TA_vs_AA,  // seeds: y_(1), x^(2), x_(1,2)
};

InvariantReport check_second_order(const Program& program, SecondOrderPair pair, const Vector& x,
                                   const SeedBundle& seeds, const TolerancePolicy& tol = {},
                                   const CheckOptions& options = {});

/// Prefix words of order nu - 1 grouped by the free index of their result.
struct InvariantClass {
  Shape free_index;
  std::vector<ModeWord> representative_words;
};

/// All 2^(nu-1) prefixes in ascending binary order (t = 0, a = 1, level 1
/// most significant), grouped into nu classes ordered k, j_1, ..., j_{nu-1}.
std::vector<InvariantClass> enumerate_invariant_classes(std::size_t nu, std::size_t order_cap = default_order_cap());

/// Every prefix word of length `length`, in the same order.
std::vector<ModeWord> all_words(std::size_t length);

struct SuiteConfig {
  std::size_t max_order = 3;
  std::size_t trials = 10;
  std::uint64_t rng_seed = kDefaultRngSeed;
  TolerancePolicy tol;
  const ElementalTable* table = &ElementalTable::standard();
  bool all_prefixes = false;  // otherwise the first word of each class
  std::size_t threads = 0;    // 0 = hardware concurrency
  std::size_t order_cap = default_order_cap();
};

/// Reports ordered by (program, nu, prefix, trial) regardless of threading.
/// Per-case exceptions become Error reports.
std::vector<InvariantReport> run_suite(std::span<const CorpusEntry> corpus, const SuiteConfig& config);

}  // namespace adinvar
