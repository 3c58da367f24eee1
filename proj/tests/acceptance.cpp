// One line per acceptance criterion; exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "adinvar/cli.hpp"
#include "adinvar/corpus.hpp"
#include "adinvar/debugger.hpp"
#include "adinvar/deriv.hpp"
#include "adinvar/invariants.hpp"
#include "adinvar/oracle.hpp"

using namespace adinvar;

namespace {

const std::filesystem::path kCorpus = ADINVAR_CORPUS_DIR;
const std::filesystem::path kFaults = ADINVAR_FAULTS_DIR;

std::vector<CorpusEntry> corpus() {
  const std::vector<std::filesystem::path> paths{kCorpus};
  return load_corpus(paths);
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

bool has_sqrt(const Program& p) {
  return std::any_of(p.steps.begin(), p.steps.end(),
                     [](const Assignment& a) { return a.elemental == ElementalKind::Sqrt; });
}

std::size_t first_sqrt_step(const Program& p) {
  for (std::size_t s = 0; s < p.steps.size(); ++s) {
    if (p.steps[s].elemental == ElementalKind::Sqrt) return s + 1;
  }
  return 0;
}

ElementalTable table_from(const char* file) {
  return inject_faults(ElementalTable::standard(), load_fault_registry(kFaults / file));
}

Outcome first_order() {
  TolerancePolicy tol;
  tol.abs_tol = 1e-10;
  tol.rel_tol = 1e-12;
  std::size_t checks = 0, failures = 0;
  double worst = 0.0;
  for (const auto& e : corpus()) {
    Sampler s(mix_seed(kDefaultRngSeed, {1, checks}));
    for (int draw = 0; draw < 100; ++draw) {
      const Vector x = s.point(e.box);
      const Vector xd = s.direction(e.program.n_inputs());
      const Vector yb = s.direction(e.program.n_outputs());
      const auto r = check_first_order(e.program, x, xd, yb, tol);
      ++checks;
      worst = std::max(worst, r.abs_err);
      if (r.verdict != Verdict::Pass) ++failures;
    }
  }
  return {failures == 0, std::to_string(checks) + " checks, " + std::to_string(failures) + " failed, max abs err " +
                             fmt(worst)};
}

Outcome second_order_pairs() {
  TolerancePolicy tol;
  tol.abs_tol = std::numeric_limits<double>::min();
  tol.rel_tol = 1e-10;
  std::size_t checks = 0, failures = 0;
  double worst = 0.0;
  for (const auto& e : corpus()) {
    const std::size_t n = e.program.n_inputs(), m = e.program.n_outputs();
    Sampler s(mix_seed(kDefaultRngSeed, {2, checks}));
    for (int draw = 0; draw < 25; ++draw) {
      const Vector x = s.point(e.box);
      const SeedBundle tt{s.direction(n), s.direction(n), s.direction(m)};
      const SeedBundle ta{s.direction(m), s.direction(n), s.direction(n)};
      for (const auto& r : {check_second_order(e.program, SecondOrderPair::TT_vs_AT, x, tt, tol),
                            check_second_order(e.program, SecondOrderPair::TA_vs_AA, x, ta, tol)}) {
        ++checks;
        worst = std::max(worst, r.rel_err);
        if (r.verdict != Verdict::Pass) ++failures;
      }
    }
  }
  return {failures == 0, std::to_string(checks) + " checks (both pairings), " + std::to_string(failures) +
                             " failed, max rel err " + fmt(worst)};
}

Outcome general_order() {
  const TolerancePolicy tol;
  std::size_t checks = 0, failures = 0;
  bool saw_tt = false, saw_fifth = false, saw_sixth = false;
  const ModeWord tt = ModeWord::parse("tt"), fifth = ModeWord::parse("ataat");
  const auto entries = corpus();
  for (std::size_t nu = 3; nu <= 6; ++nu) {
    for (const ModeWord& prefix : all_words(nu - 1)) {
      saw_tt = saw_tt || prefix == tt;
      saw_fifth = saw_fifth || prefix.then(Mode::Tangent) == fifth || prefix.then(Mode::Adjoint) == fifth;
      saw_sixth = saw_sixth || prefix == fifth;
      for (std::size_t p = 0; p < entries.size(); ++p) {
        const auto& e = entries[p];
        const std::size_t n = e.program.n_inputs(), m = e.program.n_outputs();
        Sampler s(mix_seed(kDefaultRngSeed, {3, nu, p, checks}));
        for (int draw = 0; draw < 5; ++draw) {
          const Vector x = s.point(e.box);
          const SeedBundle seeds = s.seeds(n, m, prefix);
          const Vector xn = s.direction(n);
          const Vector vn = s.direction(infer_shapes(n, m, prefix).output.dim);
          const auto r = check_order(e.program, prefix, x, seeds, xn, vn, tol);
          ++checks;
          if (r.verdict != Verdict::Pass) ++failures;
        }
      }
    }
  }
  const bool ok = failures == 0 && saw_tt && saw_fifth && saw_sixth && entries.size() >= 3;
  return {ok, std::to_string(checks) + " checks over " + std::to_string(entries.size()) +
                  " programs, orders 3-6, every prefix, " + std::to_string(failures) + " failed"};
}

Outcome classes() {
  bool ok = true;
  for (std::size_t nu = 1; nu <= 6; ++nu) {
    const auto c = enumerate_invariant_classes(nu);
    std::size_t covered = 0;
    for (const auto& k : c) covered += k.representative_words.size();
    ok = ok && c.size() == nu && covered == (std::size_t{1} << (nu - 1));
  }
  const auto c3 = enumerate_invariant_classes(3);
  ok = ok && c3[0].free_index.index_name() == "k" && c3[0].representative_words == std::vector{ModeWord::parse("tt")};
  ok = ok && c3[1].free_index.index_name() == "j_1" &&
       c3[1].representative_words == std::vector{ModeWord::parse("at")};
  ok = ok && c3[2].free_index.index_name() == "j_2" &&
       c3[2].representative_words == std::vector{ModeWord::parse("ta"), ModeWord::parse("aa")};
  return {ok, "nu = 1..6 give 1..6 classes; nu = 3: k {tt}, j_1 {at}, j_2 {ta, aa}"};
}

Outcome oracle_equivalence() {
  std::size_t checks = 0, failures = 0;
  double worst = 0.0;
  const auto entries = corpus();
  for (std::size_t p = 0; p < entries.size(); ++p) {
    const auto& e = entries[p];
    const std::size_t n = e.program.n_inputs(), m = e.program.n_outputs();
    Sampler s(mix_seed(kDefaultRngSeed, {5, p}));
    const Vector x = s.point(e.box);
    for (std::size_t nu = 1; nu <= 3; ++nu) {
      const DerivTensor t = fd_tensor(e.program, x, nu);
      for (const ModeWord& w : all_words(nu)) {
        const SeedBundle seeds = s.seeds(n, m, w);
        const Vector d = derive(e.program, w, x, seeds).value;
        const Vector c = contract(t, bindings_for(w, seeds));
        for (Eigen::Index i = 0; i < d.size(); ++i) {
          const double err = std::abs(d[i] - c[i]);
          const double scale = std::max(std::abs(d[i]), std::abs(c[i]));
          worst = std::max(worst, err / std::max(1.0, scale));
          if (err > std::max(1e-4, 1e-4 * scale)) ++failures;
        }
        ++checks;
      }
    }
  }
  return {failures == 0, std::to_string(checks) + " mode words (all 14 per program), " + std::to_string(failures) +
                             " mismatches, max scaled err " + fmt(worst)};
}

Outcome triad() {
  const ElementalTable adjoint_fault = table_from("sqrt_adjoint.json");
  const ElementalTable shared_fault = table_from("sqrt_both.json");
  const auto entries = corpus();
  bool detected = true, localized = true, blind = true, fd_caught = true;
  double min_rel = 1e300, min_fd = 1e300;
  std::size_t sqrt_programs = 0;
  for (std::size_t p = 0; p < entries.size(); ++p) {
    const auto& e = entries[p];
    Sampler s(mix_seed(kDefaultRngSeed, {6, p}));
    for (int draw = 0; draw < 5; ++draw) {
      const Vector x = s.point(e.box);
      const Vector xd = s.direction(e.program.n_inputs());
      const Vector yb = s.direction(e.program.n_outputs());
      const auto shared = check_first_order(e.program, x, xd, yb, {}, CheckOptions::with_table(shared_fault));
      blind = blind && shared.verdict == Verdict::Pass;
      const auto steps = debug_forward(e.program, shared_fault, x, xd, kDefaultRngSeed + draw);
      blind = blind && !steps.first_failure;
      if (!has_sqrt(e.program)) continue;

      const auto r = debug_forward(e.program, adjoint_fault, x, xd, kDefaultRngSeed + draw);
      localized = localized && r.first_failure && *r.first_failure == first_sqrt_step(e.program);
      if (e.program.steps.size() <= 3) {
        // sqrt dominates the whole program here
        const auto inv = check_first_order(e.program, x, xd, yb, {}, CheckOptions::with_table(adjoint_fault));
        detected = detected && inv.verdict == Verdict::Fail && inv.rel_err >= 1e-2;
        min_rel = std::min(min_rel, inv.rel_err);
        const auto fd = fd_cross_check(e.program, shared_fault, x, xd);
        fd_caught = fd_caught && fd.verdict == Verdict::Fail && fd.rel_err >= 1e-2;
        min_fd = std::min(min_fd, fd.rel_err);
      }
    }
    if (has_sqrt(e.program)) ++sqrt_programs;
  }
  SuiteConfig suite;
  suite.max_order = 3;
  suite.trials = 3;
  suite.table = &shared_fault;
  for (const auto& r : run_suite(entries, suite)) blind = blind && r.verdict == Verdict::Pass;

  // y = sqrt(x) at x = 4
  const Program root = load_program(kCorpus / "sqrt.sac");
  Vector four(1), one(1);
  four << 4.0;
  one << 1.0;
  const auto root_check = fd_cross_check(root, shared_fault, four, one);
  const bool root_ok = root_check.jvp[0] == -0.25 && std::abs(root_check.fd[0] - 0.25) < 1e-8;
  const bool ok = detected && localized && blind && fd_caught && root_ok && sqrt_programs > 0;
  return {ok, "adjoint fault: detected=" + std::string(detected ? "yes" : "no") + " (min rel " + fmt(min_rel) +
                  "), localized=" + (localized ? "yes" : "no") + "; shared fault: invariants blind=" +
                  (blind ? "yes" : "no") + ", fd fails=" + (fd_caught ? "yes" : "no") + " (min rel " + fmt(min_fd) +
                  "); sqrt(4): jvp " + fmt(root_check.jvp[0]) + ", fd " + fmt(root_check.fd[0])};
}

Outcome commutativity() {
  double worst = 0.0;
  std::size_t checks = 0;
  const auto entries = corpus();
  for (std::size_t p = 0; p < entries.size(); ++p) {
    const auto& e = entries[p];
    const std::size_t n = e.program.n_inputs(), m = e.program.n_outputs();
    Sampler s(mix_seed(kDefaultRngSeed, {7, p}));
    const Vector x = s.point(e.box);
    for (std::size_t nu = 2; nu <= 3; ++nu) {
      const DerivTensor t = fd_tensor(e.program, x, nu);
      std::vector<Binding> bindings{{Slot::k(), s.direction(m)}};
      for (std::size_t i = 1; i <= nu; ++i) bindings.push_back({Slot::j(i), s.direction(n)});
      const double scale = contraction_scale(t, bindings);
      std::vector<std::size_t> perm(bindings.size());
      std::iota(perm.begin(), perm.end(), 0);
      do {
        const double diff = check_contraction_commutativity(t, bindings, perm);
        worst = std::max(worst, scale > 0 ? diff / scale : diff);
        ++checks;
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
  return {worst <= 1e-13, std::to_string(checks) + " contraction orders, max rel diff " + fmt(worst)};
}

Outcome structural() {
  bool primal_ok = true, derive_ok = true;
  double worst = 0.0;
  const auto entries = corpus();
  for (std::size_t p = 0; p < entries.size(); ++p) {
    const auto& e = entries[p];
    const std::size_t n = e.program.n_inputs(), m = e.program.n_outputs();
    Sampler s(mix_seed(kDefaultRngSeed, {8, p}));
    for (int draw = 0; draw < 10; ++draw) {
      const Vector x = s.point(e.box);
      const Vector xd = s.direction(n), yb = s.direction(m);
      const Vector y = eval_primal(e.program, x);
      const auto t = jvp(e.program, x, xd);
      const auto a = vjp(e.program, x, yb);
      primal_ok = primal_ok && t.y == y && a.y == y;
      derive_ok = derive_ok && derive(e.program, ModeWord::parse("t"), x, {xd}).value == t.ydot &&
                  derive(e.program, ModeWord::parse("a"), x, {yb}).value == a.xbar;

      const Vector u = s.direction(n), w = s.direction(n);
      const Vector h1 = derive(e.program, ModeWord::parse("tt"), x, {u, w}).value;
      const Vector h2 = derive(e.program, ModeWord::parse("tt"), x, {w, u}).value;
      for (Eigen::Index k = 0; k < h1.size(); ++k) {
        const double scale = std::max({std::abs(h1[k]), std::abs(h2[k]), 1e-300});
        worst = std::max(worst, std::abs(h1[k] - h2[k]) / scale);
      }
    }
  }
  return {primal_ok && derive_ok && worst <= 1e-12,
          std::string("primal bit-identical=") + (primal_ok ? "yes" : "no") + ", [t]/[a] bit-identical=" +
              (derive_ok ? "yes" : "no") + ", Hessian seed swap max rel " + fmt(worst)};
}

Outcome reproducible() {
  const std::vector<std::string> args{"adinvar", "check", kCorpus.string(), "--max-order", "3", "--format", "json"};
  std::ostringstream a, b, err;
  const int ca = cli::run(args, a, err);
  const int cb = cli::run(args, b, err);
  const bool ok = ca == 0 && cb == 0 && !a.str().empty() && a.str() == b.str();
  return {ok, std::to_string(a.str().size()) + " bytes, identical=" + (a.str() == b.str() ? "yes" : "no") +
                  ", exit codes " + std::to_string(ca) + "/" + std::to_string(cb)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"first-order invariant", first_order},
      {"second-order invariants", second_order_pairs},
      {"general invariant, orders 3-6", general_order},
      {"class enumeration", classes},
      {"oracle equivalence", oracle_equivalence},
      {"triad detection matrix", triad},
      {"contraction commutativity", commutativity},
      {"structural identities", structural},
      {"reproducibility", reproducible},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %zu %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), secs);
    if (!o.pass) ++failed;
  }
  return failed;
}
