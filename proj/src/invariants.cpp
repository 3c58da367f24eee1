#include "adinvar/invariants.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include <json.hpp>

#include "adinvar/errors.hpp"

namespace adinvar {

double TolerancePolicy::abs_at(std::size_t nu) const {
  return abs_tol * std::pow(order_growth, static_cast<double>(nu > 0 ? nu - 1 : 0));
}

double TolerancePolicy::rel_at(std::size_t nu) const {
  return rel_tol * std::pow(order_growth, static_cast<double>(nu > 0 ? nu - 1 : 0));
}

void TolerancePolicy::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !(order_growth >= 1.0)) {
    throw UsageError("tolerances must be positive and order growth at least 1");
  }
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Error: return "error";
  }
  return "?";
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("dot of vectors with different lengths");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

Comparison compare(double lhs, double rhs, const TolerancePolicy& tol, std::size_t nu) {
  Comparison c;
  c.lhs = lhs;
  c.rhs = rhs;
  c.abs_err = std::abs(lhs - rhs);
  const double scale = std::max({std::abs(lhs), std::abs(rhs), std::numeric_limits<double>::min()});
  c.rel_err = c.abs_err / scale;
  const bool ok = c.abs_err <= tol.abs_at(nu) || c.rel_err <= tol.rel_at(nu);
  c.verdict = ok && std::isfinite(c.abs_err) ? Verdict::Pass : Verdict::Fail;
  return c;
}

std::string to_json_line(const InvariantReport& r) {
  nlohmann::ordered_json j;
  j["program"] = r.program;
  j["prefix"] = r.prefix.letters();
  j["nu"] = r.nu;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["abs_err"] = r.abs_err;
  j["rel_err"] = r.rel_err;
  j["verdict"] = std::string(to_string(r.verdict));
  j["rng_seed"] = r.rng_seed;
  j["case_seed"] = r.case_seed;
  j["tol_abs"] = r.tol_abs;
  j["tol_rel"] = r.tol_rel;
  if (!r.message.empty()) j["message"] = r.message;
  return j.dump();
}

InvariantReport check_order(const ResolvedProgram& program, const ModeWord& prefix, const Vector& x,
                            const SeedBundle& prefix_seeds, const Vector& x_nu_seed, const Vector& v_nu_seed,
                            const TolerancePolicy& tol, const CheckOptions& options) {
  const std::size_t nu = prefix.order() + 1;

  DeriveOptions tangent_options;
  tangent_options.order_cap = options.order_cap;
  tangent_options.table = options.tangent_side;
  SeedBundle tangent_seeds = prefix_seeds;
  tangent_seeds.push_back(x_nu_seed);
  const DerivResult tangent = derive(program, prefix.then(Mode::Tangent), x, tangent_seeds, tangent_options);

  DeriveOptions adjoint_options = tangent_options;
  adjoint_options.table = options.adjoint_side;
  SeedBundle adjoint_seeds = prefix_seeds;
  adjoint_seeds.push_back(v_nu_seed);
  const DerivResult adjoint = derive(program, prefix.then(Mode::Adjoint), x, adjoint_seeds, adjoint_options);

  const Comparison c = compare(dot(adjoint.value, x_nu_seed), dot(v_nu_seed, tangent.value), tol, nu);
  InvariantReport r;
  r.prefix = prefix;
  r.nu = nu;
  r.lhs = c.lhs;
  r.rhs = c.rhs;
  r.abs_err = c.abs_err;
  r.rel_err = c.rel_err;
  r.verdict = c.verdict;
  r.tol_abs = tol.abs_at(nu);
  r.tol_rel = tol.rel_at(nu);
  return r;
}

InvariantReport check_order(const Program& program, const ModeWord& prefix, const Vector& x,
                            const SeedBundle& prefix_seeds, const Vector& x_nu_seed, const Vector& v_nu_seed,
                            const TolerancePolicy& tol, const CheckOptions& options) {
  InvariantReport r =
      check_order(ResolvedProgram(program), prefix, x, prefix_seeds, x_nu_seed, v_nu_seed, tol, options);
  r.program = program.name;
  return r;
}

InvariantReport check_first_order(const Program& program, const Vector& x, const Vector& xdot, const Vector& ybar,
                                  const TolerancePolicy& tol, const CheckOptions& options) {
  return check_order(program, ModeWord{}, x, {}, xdot, ybar, tol, options);
}

InvariantReport check_second_order(const Program& program, SecondOrderPair pair, const Vector& x,
                                   const SeedBundle& seeds, const TolerancePolicy& tol, const CheckOptions& options) {
  if (seeds.size() != 3) throw ShapeError("second-order checks take three seeds");
  const ModeWord prefix = pair == SecondOrderPair::TT_vs_AT ? ModeWord{Mode::Tangent} : ModeWord{Mode::Adjoint};
  return check_order(program, prefix, x, {seeds[0]}, seeds[1], seeds[2], tol, options);
}

std::vector<ModeWord> all_words(std::size_t length) {
  std::vector<ModeWord> words;
  const std::size_t count = std::size_t{1} << length;
  for (std::size_t bits = 0; bits < count; ++bits) {
    std::vector<Mode> modes(length);
    for (std::size_t i = 0; i < length; ++i) {
      modes[i] = (bits >> (length - 1 - i)) & 1u ? Mode::Adjoint : Mode::Tangent;
    }
    words.emplace_back(std::move(modes));
  }
  return words;
}

std::vector<InvariantClass> enumerate_invariant_classes(std::size_t nu, std::size_t order_cap) {
  if (nu < 1 || nu > order_cap) {
    throw OrderCapError("order " + std::to_string(nu) + " outside 1.." + std::to_string(order_cap));
  }
  // Dimensions are placeholders; only the free index matters here.
  std::vector<InvariantClass> classes(nu);
  classes[0].free_index = Shape::y(1);
  for (std::size_t i = 1; i < nu; ++i) classes[i].free_index = Shape::x(1, i);
  for (const ModeWord& prefix : all_words(nu - 1)) {
    const Shape out = infer_shapes(1, 1, prefix).output;
    classes[out.kind == Shape::Kind::Y ? 0 : out.free_index].representative_words.push_back(prefix);
  }
  return classes;
}

namespace {

struct SuiteCase {
  std::size_t program = 0;
  std::size_t nu = 0;
  ModeWord prefix;
  std::size_t prefix_key = 0;
  std::size_t trial = 0;
};

}  // namespace

std::vector<InvariantReport> run_suite(std::span<const CorpusEntry> corpus, const SuiteConfig& config) {
  if (corpus.empty()) throw UsageError("run_suite needs a non-empty corpus");
  if (config.trials < 1) throw UsageError("run_suite needs at least one trial");
  if (config.max_order < 1 || config.max_order > config.order_cap) {
    throw OrderCapError("max order " + std::to_string(config.max_order) + " outside 1.." +
                        std::to_string(config.order_cap));
  }
  config.tol.validate();

  std::vector<ResolvedProgram> resolved;
  resolved.reserve(corpus.size());
  for (const auto& entry : corpus) resolved.emplace_back(entry.program);

  std::vector<SuiteCase> cases;
  for (std::size_t p = 0; p < corpus.size(); ++p) {
    for (std::size_t nu = 1; nu <= config.max_order; ++nu) {
      std::vector<ModeWord> prefixes;
      if (config.all_prefixes) {
        prefixes = all_words(nu - 1);
      } else {
        for (const auto& cls : enumerate_invariant_classes(nu, config.order_cap)) {
          prefixes.push_back(cls.representative_words.front());
        }
      }
      for (const ModeWord& prefix : prefixes) {
        std::size_t key = 0;
        for (Mode m : prefix) key = key * 2 + (m == Mode::Adjoint ? 1 : 0);
        for (std::size_t t = 0; t < config.trials; ++t) cases.push_back({p, nu, prefix, key, t});
      }
    }
  }

  std::vector<InvariantReport> reports(cases.size());
  const CheckOptions options = [&] {
    CheckOptions o = CheckOptions::with_table(*config.table);
    o.order_cap = config.order_cap;
    return o;
  }();

  auto run_case = [&](std::size_t index) {
    const SuiteCase& c = cases[index];
    const CorpusEntry& entry = corpus[c.program];
    const std::uint64_t case_seed = mix_seed(config.rng_seed, {c.program, c.nu, c.prefix_key, c.trial});
    InvariantReport r;
    try {
      Sampler sampler(case_seed);
      const std::size_t n = entry.program.n_inputs();
      const std::size_t m = entry.program.n_outputs();
      const Vector x = sampler.point(entry.box);
      const SeedBundle prefix_seeds = sampler.seeds(n, m, c.prefix);
      const Vector x_nu = sampler.direction(n);
      const Vector v_nu = sampler.direction(infer_shapes(n, m, c.prefix).output.dim);
      r = check_order(resolved[c.program], c.prefix, x, prefix_seeds, x_nu, v_nu, config.tol, options);
    } catch (const std::exception& e) {
      r.prefix = c.prefix;
      r.nu = c.nu;
      r.verdict = Verdict::Error;
      r.tol_abs = config.tol.abs_at(c.nu);
      r.tol_rel = config.tol.rel_at(c.nu);
      r.message = e.what();
    }
    r.program = entry.program.name;
    r.rng_seed = config.rng_seed;
    r.case_seed = case_seed;
    reports[index] = std::move(r);
  };

  std::size_t threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cases.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < cases.size(); ++i) run_case(i);
    return reports;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cases.size(); i = next++) run_case(i);
      });
    }
  }
  return reports;
}

}  // namespace adinvar
