#include "adinvar/debugger.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "adinvar/corpus.hpp"
#include "adinvar/errors.hpp"
#include "adinvar/real.hpp"

namespace adinvar {

ElementalTable inject_fault(const ElementalTable& table, const FaultSpec& fault) {
  ElementalTable out = table;
  if (fault.mode != FaultMode::AdjointOnly) out.set_rules(fault.elemental, RuleMode::Tangent, fault.replacement);
  if (fault.mode != FaultMode::TangentOnly) out.set_rules(fault.elemental, RuleMode::Adjoint, fault.replacement);
  return out;
}

ElementalTable inject_faults(const ElementalTable& table, std::span<const FaultSpec> faults) {
  ElementalTable out = table;
  for (const auto& f : faults) out = inject_fault(out, f);
  return out;
}

namespace {

FaultSpec fault_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("fault entry must be an object");
  FaultSpec f;
  const std::string name = j.at("elemental").get<std::string>();
  const auto kind = elemental_from_keyword(name);
  if (!kind) throw UsageError("unknown elemental '" + name + "' in fault registry");
  f.elemental = *kind;

  const std::string mode = j.value("mode", std::string("both"));
  if (mode == "tangent") {
    f.mode = FaultMode::TangentOnly;
  } else if (mode == "adjoint") {
    f.mode = FaultMode::AdjointOnly;
  } else if (mode == "both") {
    f.mode = FaultMode::Both;
  } else {
    throw UsageError("fault mode must be tangent, adjoint or both, got '" + mode + "'");
  }

  const auto& rep = j.at("replacement");
  if (rep.is_string()) {
    f.replacement.push_back(RuleExpr::parse(rep.get<std::string>()));
  } else if (rep.is_array()) {
    for (const auto& r : rep) f.replacement.push_back(RuleExpr::parse(r.get<std::string>()));
  } else {
    throw UsageError("fault replacement must be a string or a list of strings");
  }
  if (f.replacement.size() != arity(f.elemental)) {
    throw UsageError("fault for " + name + " needs " + std::to_string(arity(f.elemental)) + " replacement rule(s)");
  }
  return f;
}

}  // namespace

std::vector<FaultSpec> parse_fault_registry(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("fault registry is not valid JSON: ") + e.what());
  }
  std::vector<FaultSpec> faults;
  try {
    if (doc.is_array()) {
      for (const auto& entry : doc) faults.push_back(fault_from_json(entry));
    } else {
      faults.push_back(fault_from_json(doc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed fault registry: ") + e.what());
  }
  return faults;
}

std::vector<FaultSpec> load_fault_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read fault registry " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_fault_registry(buf.str());
}

DebugReport debug_forward(const Program& program, const ElementalTable& table, const Vector& x, const Vector& xdot,
                          std::uint64_t rng_seed, const TolerancePolicy& tol, std::span<const std::size_t> steps,
                          const SweepTrace& trace) {
  const ResolvedProgram resolved(program);
  const std::size_t n = resolved.n_inputs();
  const std::size_t count = resolved.steps().size();
  if (static_cast<std::size_t>(x.size()) != n || static_cast<std::size_t>(xdot.size()) != n) {
    throw ShapeError("x and xdot must have length " + std::to_string(n));
  }
  for (std::size_t s : steps) {
    if (s < 1 || s > count) throw UsageError("step " + std::to_string(s) + " outside 1.." + std::to_string(count));
  }
  tol.validate();
  const ActiveAlgebra alg(table);

  // Tangents of every step.
  std::vector<double> tangent(count + 1, 0.0);
  {
    std::vector<Real> in;
    for (std::size_t i = 0; i < n; ++i) in.push_back(Real::dual(1, x[i], xdot[i]));
    evaluate(resolved, alg, std::span<const Real>(in), [&](std::size_t s, const Real& v) {
      tangent[s] = v.tangent_at(1).primal();
    });
  }

  // One tape; each step's node, if it has one.
  Tape tape(1);
  std::vector<Real> in;
  for (std::size_t i = 0; i < n; ++i) in.push_back(tape.input(x[i]));
  std::vector<std::optional<std::size_t>> node_of(count + 1);
  evaluate(resolved, alg, std::span<const Real>(in), [&](std::size_t s, const Real& v) {
    if (const std::size_t* node = v.node_at(1)) node_of[s] = *node;
  });
  std::vector<std::size_t> origin(tape.size(), 0);
  for (std::size_t s = 1; s <= count; ++s) {
    if (node_of[s]) origin[*node_of[s]] = s;
  }

  std::vector<std::size_t> selected(steps.begin(), steps.end());
  if (selected.empty()) {
    for (std::size_t s = 1; s <= count; ++s) selected.push_back(s);
  }
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());

  DebugReport report;
  for (std::size_t s : selected) {
    StepReport r;
    r.step = s;
    r.tangent = tangent[s];
    r.adjoint_seed = Sampler(mix_seed(rng_seed, {s})).scalar(1e-3);

    Vector xbar = Vector::Zero(static_cast<Eigen::Index>(n));
    if (node_of[s]) {
      const std::pair<std::size_t, Real> seed{*node_of[s], Real(r.adjoint_seed)};
      ReverseObserver observer;
      if (trace) {
        observer = [&](std::size_t node, const TapeNode& tn, const Real& adj) {
          trace(s, origin[node], tn.elemental, adj.primal());
        };
      }
      const std::vector<Real> adj = alg.reverse(tape, std::span(&seed, 1), *node_of[s], observer);
      for (std::size_t i = 0; i < n; ++i) xbar[static_cast<Eigen::Index>(i)] = adj[i].primal();
    }

    const Comparison c = compare(dot(xbar, xdot), r.adjoint_seed * r.tangent, tol, 1);
    r.lhs = c.lhs;
    r.rhs = c.rhs;
    r.abs_err = c.abs_err;
    r.rel_err = c.rel_err;
    r.verdict = c.verdict;
    if (r.tangent == 0.0) {
      report.degenerate_tangent = true;
      if (r.verdict == Verdict::Pass) r.verdict = Verdict::Inconclusive;
    }
    if (r.verdict == Verdict::Fail && !report.first_failure) report.first_failure = s;
    report.steps.push_back(r);
  }
  return report;
}

TolerancePolicy fd_tolerance() {
  TolerancePolicy tol;
  tol.abs_tol = 1e-8;
  tol.rel_tol = 1e-6;
  return tol;
}

CrossCheckReport fd_cross_check(const Program& program, const ElementalTable& table, const Vector& x,
                                const Vector& xdot, const FDConfig& config, const TolerancePolicy& tol) {
  CrossCheckReport r;
  r.jvp = jvp(program, x, xdot, table).ydot;
  r.fd = fd_jvp(program, x, xdot, config);
  if (xdot.size() == 0 || xdot.lpNorm<Eigen::Infinity>() == 0.0) {
    r.verdict = Verdict::Inconclusive;
    return r;
  }
  r.verdict = Verdict::Pass;
  for (Eigen::Index k = 0; k < r.jvp.size(); ++k) {
    const Comparison c = compare(r.fd[k], r.jvp[k], tol, 1);
    r.abs_err = std::max(r.abs_err, c.abs_err);
    r.rel_err = std::max(r.rel_err, c.rel_err);
    if (c.verdict != Verdict::Pass) r.verdict = Verdict::Fail;
  }
  return r;
}

}  // namespace adinvar
