#include "adinvar/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "adinvar/corpus.hpp"
#include "adinvar/debugger.hpp"
#include "adinvar/errors.hpp"
#include "adinvar/oracle.hpp"

namespace adinvar::cli {

namespace {

using nlohmann::ordered_json;

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string vec(const Vector& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += num(v[i]);
  }
  return s + "]";
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

const ElementalTable& table_for(const RunConfig& cfg, ElementalTable& storage) {
  if (!cfg.faults) return ElementalTable::standard();
  const auto faults = load_fault_registry(*cfg.faults);
  storage = inject_faults(ElementalTable::standard(), faults);
  return storage;
}

CorpusEntry single_program(const RunConfig& cfg) {
  if (cfg.programs.size() != 1) throw UsageError(cfg.command + " takes exactly one program");
  return load_entry(cfg.programs.front());
}

// Reports go to --out when given, otherwise to `out`.
class Sink {
 public:
  Sink(const RunConfig& cfg, std::ostream& out) : stream_(&out) {
    if (cfg.out) {
      file_.open(*cfg.out, std::ios::binary);
      if (!file_) throw UsageError("cannot write " + cfg.out->string());
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

}  // namespace

TolerancePolicy RunConfig::tolerance(TolerancePolicy base) const {
  if (abs_tol) base.abs_tol = *abs_tol;
  if (rel_tol) base.rel_tol = *rel_tol;
  base.validate();
  return base;
}

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto corpus = load_corpus(cfg.programs);
  ElementalTable storage;
  SuiteConfig suite;
  suite.max_order = cfg.max_order;
  suite.trials = cfg.trials;
  suite.rng_seed = cfg.rng_seed;
  suite.tol = cfg.tolerance();
  suite.table = &table_for(cfg, storage);
  suite.all_prefixes = cfg.all_prefixes;
  suite.threads = cfg.threads;
  const auto reports = run_suite(corpus, suite);

  Sink sink(cfg, out);
  std::size_t pass = 0, fail = 0, error = 0;
  for (const auto& r : reports) {
    if (cfg.format == Format::Json) {
      *sink << to_json_line(r) << '\n';
    } else {
      *sink << r.program << ' ' << (r.prefix.empty() ? "-" : r.prefix.letters()) << " nu=" << r.nu << ' '
            << to_string(r.verdict) << " lhs=" << num(r.lhs) << " rhs=" << num(r.rhs) << " abs_err=" << num(r.abs_err)
            << " rel_err=" << num(r.rel_err);
      if (!r.message.empty()) *sink << " (" << r.message << ')';
      *sink << '\n';
    }
    switch (r.verdict) {
      case Verdict::Pass: ++pass; break;
      case Verdict::Fail: ++fail; break;
      default: ++error; break;
    }
  }
  err << reports.size() << " reports: " << pass << " pass, " << fail << " fail, " << error << " error\n";
  return pass == reports.size() ? kPass : kFailure;
}

int cmd_derive(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const CorpusEntry entry = single_program(cfg);
  const Program& p = entry.program;
  const ModeWord word = ModeWord::parse(cfg.word);
  const ShapePlan plan = infer_shapes(p, word);

  Vector x;
  SeedBundle seeds;
  if (cfg.random_seeds) {
    Sampler sampler(mix_seed(cfg.rng_seed, {}));
    x = sampler.point(entry.box);
    seeds = sampler.seeds(p.n_inputs(), p.n_outputs(), word);
  } else if (cfg.seeds == "ones") {
    x = Vector::Ones(static_cast<Eigen::Index>(p.n_inputs()));
    for (const Shape& s : plan.seeds) seeds.push_back(Vector::Ones(static_cast<Eigen::Index>(s.dim)));
  } else if (!cfg.seeds.empty()) {
    std::ifstream in(cfg.seeds);
    if (!in) throw UsageError("cannot read seed file " + cfg.seeds);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
      if (doc.contains("x")) x = from_std(doc.at("x").get<std::vector<double>>());
      for (const auto& s : doc.at("seeds")) seeds.push_back(from_std(s.get<std::vector<double>>()));
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("malformed seed file: " + std::string(e.what()));
    }
    if (x.size() == 0) x = Vector::Ones(static_cast<Eigen::Index>(p.n_inputs()));
  } else {
    throw UsageError("derive needs --seeds or --random-seeds");
  }
  if (!cfg.x.empty()) x = from_std(cfg.x);

  const DerivResult r = derive(p, word, x, seeds);
  const std::string shape = r.shape.to_string();
  if (cfg.format == Format::Json) {
    ordered_json j;
    j["program"] = p.name;
    j["word"] = word.letters();
    j["name"] = word.outside_in_name();
    j["shape"] = shape;
    j["value"] = to_std(r.value);
    j["primal_y"] = to_std(r.primal_y);
    out << j.dump() << '\n';
  } else {
    out << "program: " << p.name << '\n'
        << "word:    " << word.letters() << '\n'
        << "name:    " << word.outside_in_name() << '\n'
        << "shape:   " << shape << '\n'
        << "y:       " << vec(r.primal_y) << '\n'
        << "value:   ";
    for (Eigen::Index i = 0; i < r.value.size(); ++i) out << (i ? " " : "") << num(r.value[i]);
    out << '\n';
  }
  return kPass;
}

int cmd_debug(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const CorpusEntry entry = single_program(cfg);
  const Program& p = entry.program;
  ElementalTable storage;
  const ElementalTable& table = table_for(cfg, storage);

  Sampler sampler(mix_seed(cfg.rng_seed, {}));
  Vector x = sampler.point(entry.box);
  Vector xdot = sampler.direction(p.n_inputs());
  if (!cfg.x.empty()) x = from_std(cfg.x);
  if (!cfg.xdot.empty()) xdot = from_std(cfg.xdot);

  const DebugReport report = debug_forward(p, table, x, xdot, cfg.rng_seed, cfg.tolerance(), cfg.steps);
  const CrossCheckReport fd = fd_cross_check(p, table, x, xdot);

  const bool invariants_ok = !report.first_failure;
  std::string diagnosis;
  if (!invariants_ok) {
    diagnosis = "tangent and adjoint disagree from step " + std::to_string(*report.first_failure);
  } else if (fd.verdict == Verdict::Fail) {
    diagnosis = "shared conceptual error suspected";
  } else {
    diagnosis = "tangent, adjoint and finite differences agree";
  }

  if (cfg.format == Format::Json) {
    ordered_json j;
    j["program"] = p.name;
    j["x"] = to_std(x);
    j["xdot"] = to_std(xdot);
    j["rng_seed"] = cfg.rng_seed;
    ordered_json rows = ordered_json::array();
    for (const auto& s : report.steps) {
      const auto& a = p.steps[s.step - 1];
      rows.push_back({{"step", s.step},
                      {"target", a.target},
                      {"elemental", std::string(keyword(a.elemental))},
                      {"tangent", s.tangent},
                      {"adjoint_seed", s.adjoint_seed},
                      {"lhs", s.lhs},
                      {"rhs", s.rhs},
                      {"abs_err", s.abs_err},
                      {"rel_err", s.rel_err},
                      {"verdict", std::string(to_string(s.verdict))}});
    }
    j["steps"] = rows;
    j["first_failure"] = report.first_failure ? ordered_json(*report.first_failure) : ordered_json(nullptr);
    j["fd"] = {{"jvp", to_std(fd.jvp)},
               {"fd", to_std(fd.fd)},
               {"abs_err", fd.abs_err},
               {"rel_err", fd.rel_err},
               {"verdict", std::string(to_string(fd.verdict))}};
    j["diagnosis"] = diagnosis;
    out << j.dump() << '\n';
  } else {
    out << "program " << p.name << "  x=" << vec(x) << "  xdot=" << vec(xdot) << '\n';
    out << std::left << std::setw(6) << "step" << std::setw(10) << "target" << std::setw(8) << "op" << std::setw(26)
        << "lhs" << std::setw(26) << "rhs" << std::setw(12) << "rel_err"
        << "verdict\n";
    for (const auto& s : report.steps) {
      const auto& a = p.steps[s.step - 1];
      std::ostringstream rel;
      rel << std::setprecision(3) << s.rel_err;
      out << std::setw(6) << s.step << std::setw(10) << a.target << std::setw(8) << keyword(a.elemental)
          << std::setw(26) << num(s.lhs) << std::setw(26) << num(s.rhs) << std::setw(12) << rel.str()
          << to_string(s.verdict) << '\n';
    }
    if (report.degenerate_tangent) out << "warning: zero tangent at some steps (inconclusive)\n";
    out << "first failure: "
        << (report.first_failure ? "step " + std::to_string(*report.first_failure) : std::string("none")) << '\n';
    out << "finite differences: " << to_string(fd.verdict) << " (jvp " << vec(fd.jvp) << ", fd " << vec(fd.fd)
        << ", rel_err " << num(fd.rel_err) << ")\n";
    out << diagnosis << '\n';
  }
  return invariants_ok && fd.verdict != Verdict::Fail ? kPass : kFailure;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const CorpusEntry entry = single_program(cfg);
  const Program& p = entry.program;
  if (cfg.order < 1 || cfg.order > kTensorOrderCap) {
    throw OrderCapError("oracle order must be in 1.." + std::to_string(kTensorOrderCap));
  }
  Sampler sampler(mix_seed(cfg.rng_seed, {}));
  Vector x = sampler.point(entry.box);
  if (!cfg.x.empty()) x = from_std(cfg.x);

  const DerivTensor t = fd_tensor(p, x, cfg.order);
  TolerancePolicy base;
  base.abs_tol = 1e-4;
  base.rel_tol = 1e-4;
  base.order_growth = 1.0;
  const TolerancePolicy tol = cfg.tolerance(base);

  struct Row {
    ModeWord word;
    double abs_err = 0.0;
    double rel_err = 0.0;
    Verdict verdict = Verdict::Pass;
  };
  std::vector<Row> rows;
  bool ok = true;
  const ResolvedProgram resolved(p);
  for (const ModeWord& w : all_words(cfg.order)) {
    const SeedBundle seeds = sampler.seeds(p.n_inputs(), p.n_outputs(), w);
    const Vector d = derive(resolved, w, x, seeds).value;
    const Vector c = contract(t, bindings_for(w, seeds));
    Row row{w};
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const Comparison cmp = compare(c[i], d[i], tol, 1);
      row.abs_err = std::max(row.abs_err, cmp.abs_err);
      row.rel_err = std::max(row.rel_err, cmp.rel_err);
      if (cmp.verdict != Verdict::Pass) row.verdict = Verdict::Fail;
    }
    ok = ok && row.verdict == Verdict::Pass;
    rows.push_back(row);
  }

  if (cfg.format == Format::Json) {
    ordered_json j;
    j["program"] = p.name;
    j["order"] = cfg.order;
    j["x"] = to_std(x);
    ordered_json entries = ordered_json::array();
    for (Eigen::Index k = 0; k < t.entries().rows(); ++k) {
      const Vector row = t.entries().row(k).transpose();
      entries.push_back(to_std(row));
    }
    j["tensor"] = entries;
    j["symmetry_residual"] = t.asymmetry();
    ordered_json words = ordered_json::array();
    for (const auto& r : rows) {
      words.push_back({{"word", r.word.letters()},
                       {"abs_err", r.abs_err},
                       {"rel_err", r.rel_err},
                       {"verdict", std::string(to_string(r.verdict))}});
    }
    j["derive_vs_contract"] = words;
    out << j.dump() << '\n';
  } else {
    out << "program " << p.name << "  order " << cfg.order << "  x=" << vec(x) << '\n';
    for (Eigen::Index k = 0; k < t.entries().rows(); ++k) {
      const Vector row = t.entries().row(k).transpose();
      out << "k=" << k + 1 << ": " << vec(row) << '\n';
    }
    out << "symmetry residual: " << num(t.asymmetry()) << '\n';
    for (const auto& r : rows) {
      out << std::left << std::setw(6) << r.word.letters() << " residual " << std::setw(24) << num(r.abs_err)
          << to_string(r.verdict) << "  " << r.word.outside_in_name() << '\n';
    }
  }
  return ok ? kPass : kFailure;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string format = "text";
  CLI::App app{"Differential-invariant checks for nested tangent/adjoint derivative programs", "adinvar"};
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check", "Run the invariant suite over programs or corpus directories");
  auto* derive_cmd = app.add_subcommand("derive", "Evaluate one derivative program");
  auto* debug = app.add_subcommand("debug", "Step through a program checking each prefix");
  auto* oracle = app.add_subcommand("oracle", "Finite-difference derivative tensor and cross-checks");

  for (auto* sub : {check, derive_cmd, debug, oracle}) {
    sub->add_option("--rng-seed", cfg.rng_seed, "Random seed")->capture_default_str();
    sub->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--out", cfg.out, "Write the report to a file");
    sub->add_option("--abs-tol", cfg.abs_tol, "Absolute tolerance");
    sub->add_option("--rel-tol", cfg.rel_tol, "Relative tolerance");
  }
  check->add_option("paths", cfg.programs, ".sac files or directories")->required();
  check->add_option("--max-order", cfg.max_order, "Highest order checked")->capture_default_str();
  check->add_option("--trials", cfg.trials, "Random seed bundles per case")->capture_default_str();
  check->add_option("--faults", cfg.faults, "Fault registry (JSON)");
  check->add_flag("--all-prefixes", cfg.all_prefixes, "Check every prefix word, not one per class");
  check->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");

  derive_cmd->add_option("program", cfg.programs, ".sac file")->required()->expected(1);
  derive_cmd->add_option("--word", cfg.word, "Mode word over {t,a}, first applied first")->required();
  derive_cmd->add_option("--seeds", cfg.seeds, "'ones' or a JSON file {\"x\": [...], \"seeds\": [[...], ...]}");
  derive_cmd->add_flag("--random-seeds", cfg.random_seeds, "Draw x and seeds from --rng-seed");
  derive_cmd->add_option("--x", cfg.x, "Primal point")->delimiter(',');

  debug->add_option("program", cfg.programs, ".sac file")->required()->expected(1);
  debug->add_option("--faults", cfg.faults, "Fault registry (JSON)");
  debug->add_option("--x", cfg.x, "Primal point")->delimiter(',');
  debug->add_option("--xdot", cfg.xdot, "Tangent direction")->delimiter(',');
  debug->add_option("--steps", cfg.steps, "Only check these steps")->delimiter(',');

  oracle->add_option("program", cfg.programs, ".sac file")->required()->expected(1);
  oracle->add_option("--order", cfg.order, "Tensor order (1-3)")->capture_default_str();
  oracle->add_option("--x", cfg.x, "Primal point")->delimiter(',');

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsage;
  }
  cfg.format = format == "json" ? Format::Json : Format::Text;

  try {
    if (check->parsed()) {
      cfg.command = "check";
      return cmd_check(cfg, out, err);
    }
    if (derive_cmd->parsed()) {
      cfg.command = "derive";
      return cmd_derive(cfg, out, err);
    }
    if (debug->parsed()) {
      cfg.command = "debug";
      return cmd_debug(cfg, out, err);
    }
    cfg.command = "oracle";
    return cmd_oracle(cfg, out, err);
  } catch (const std::exception& e) {
    err << "adinvar: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace adinvar::cli
