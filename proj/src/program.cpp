#include "adinvar/program.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace adinvar {

std::string Violation::message() const {
  std::string where = step ? "step " + std::to_string(*step) + ": " : std::string();
  switch (kind) {
    case Kind::NoInputs: return "program declares no inputs";
    case Kind::NoOutputs: return "program declares no outputs";
    case Kind::DuplicateInput: return "input '" + variable + "' declared twice";
    case Kind::DuplicateOutput: return "output '" + variable + "' declared twice";
    case Kind::OutputIsInput: return "'" + variable + "' is both input and output";
    case Kind::OutputUndefined: return "output '" + variable + "' is never assigned";
    case Kind::InputAssigned: return where + "assignment to input '" + variable + "'";
    case Kind::Reassigned: return where + "'" + variable + "' is assigned more than once";
    case Kind::UseBeforeDef: return where + "'" + variable + "' used before definition";
    case Kind::ArityMismatch: return where + "wrong number of operands";
    case Kind::MissingParam: return where + "missing '@' parameter";
    case Kind::UnexpectedParam: return where + "elemental takes no '@' parameter";
  }
  return where + "invalid";
}

std::vector<Violation> validate_program(const Program& p) {
  using K = Violation::Kind;
  std::vector<Violation> out;
  if (p.input_vars.empty()) out.push_back({K::NoInputs, std::nullopt, {}});
  if (p.output_vars.empty()) out.push_back({K::NoOutputs, std::nullopt, {}});

  std::unordered_set<std::string> inputs;
  for (const auto& v : p.input_vars) {
    if (!inputs.insert(v).second) out.push_back({K::DuplicateInput, std::nullopt, v});
  }
  std::unordered_set<std::string> outputs;
  for (const auto& v : p.output_vars) {
    if (!outputs.insert(v).second) out.push_back({K::DuplicateOutput, std::nullopt, v});
    if (inputs.contains(v)) out.push_back({K::OutputIsInput, std::nullopt, v});
  }

  std::unordered_set<std::string> defined = inputs;
  std::unordered_set<std::string> assigned;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const Assignment& a = p.steps[i];
    const std::size_t s = i + 1;
    if (a.operands.size() != arity(a.elemental)) out.push_back({K::ArityMismatch, s, a.target});
    if (takes_param(a.elemental) && !a.param) out.push_back({K::MissingParam, s, a.target});
    if (!takes_param(a.elemental) && a.param) out.push_back({K::UnexpectedParam, s, a.target});
    for (const auto& operand : a.operands) {
      if (!defined.contains(operand)) out.push_back({K::UseBeforeDef, s, operand});
    }
    if (inputs.contains(a.target)) {
      out.push_back({K::InputAssigned, s, a.target});
    } else if (!assigned.insert(a.target).second) {
      out.push_back({K::Reassigned, s, a.target});
    }
    defined.insert(a.target);
  }
  for (const auto& v : p.output_vars) {
    if (!inputs.contains(v) && !assigned.contains(v)) out.push_back({K::OutputUndefined, std::nullopt, v});
  }
  return out;
}

namespace {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '=' || c == '@') {
      tokens.push_back({std::string(1, c), i + 1});
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#' &&
           line[i] != '=' && line[i] != '@') {
      ++i;
    }
    tokens.push_back({std::string(line.substr(start, i - start)), start + 1});
  }
  return tokens;
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

std::vector<std::string> declaration(const std::vector<Token>& tokens, const char* keyword, std::size_t line) {
  if (tokens.empty() || tokens[0].text != keyword) {
    throw ParseError(std::string("expected '") + keyword + "' declaration", line, tokens.empty() ? 1 : tokens[0].column);
  }
  std::vector<std::string> names;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (!is_identifier(tokens[i].text)) throw ParseError("bad identifier '" + tokens[i].text + "'", line, tokens[i].column);
    names.push_back(tokens[i].text);
  }
  if (names.empty()) throw ParseError(std::string("'") + keyword + "' needs at least one variable", line, 1);
  return names;
}

}  // namespace

Program parse_program(std::string_view text, std::string name) {
  Program program;
  program.name = std::move(name);

  std::unordered_set<std::string> defined;
  std::unordered_set<std::string> inputs;
  std::size_t declarations = 0;
  std::size_t outputs_line = 0;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;

    const std::vector<Token> tokens = tokenize(line);
    if (tokens.empty()) continue;

    if (declarations == 0) {
      program.input_vars = declaration(tokens, "inputs", line_no);
      for (const auto& v : program.input_vars) {
        if (!inputs.insert(v).second) throw ParseError("input '" + v + "' declared twice", line_no, 1);
      }
      defined = inputs;
      ++declarations;
      continue;
    }
    if (declarations == 1) {
      program.output_vars = declaration(tokens, "outputs", line_no);
      outputs_line = line_no;
      ++declarations;
      continue;
    }

    // target = elemental operand... [@ param]
    if (tokens.size() < 3 || tokens[1].text != "=") {
      throw ParseError("expected '<id> = <elemental> ...'", line_no, tokens.size() > 1 ? tokens[1].column : tokens[0].column);
    }
    Assignment a;
    a.target = tokens[0].text;
    if (!is_identifier(a.target)) throw ParseError("bad identifier '" + a.target + "'", line_no, tokens[0].column);
    const auto kind = elemental_from_keyword(tokens[2].text);
    if (!kind) throw ParseError("unknown elemental '" + tokens[2].text + "'", line_no, tokens[2].column);
    a.elemental = *kind;

    std::size_t i = 3;
    for (; i < tokens.size() && tokens[i].text != "@"; ++i) {
      const Token& t = tokens[i];
      if (!is_identifier(t.text)) throw ParseError("bad operand '" + t.text + "'", line_no, t.column);
      if (!defined.contains(t.text)) throw ParseError("'" + t.text + "' used before definition", line_no, t.column);
      a.operands.push_back(t.text);
    }
    if (a.operands.size() != arity(a.elemental)) {
      throw ParseError(std::string(keyword(a.elemental)) + " takes " + std::to_string(arity(a.elemental)) +
                           " operand(s), got " + std::to_string(a.operands.size()),
                       line_no, tokens[2].column);
    }
    if (i < tokens.size()) {
      if (i + 2 != tokens.size()) throw ParseError("expected one real after '@'", line_no, tokens[i].column);
      const Token& t = tokens[i + 1];
      char* stop = nullptr;
      const double value = std::strtod(t.text.c_str(), &stop);
      if (stop != t.text.c_str() + t.text.size() || !std::isfinite(value)) {
        throw ParseError("bad real '" + t.text + "'", line_no, t.column);
      }
      if (!takes_param(a.elemental)) {
        throw ParseError(std::string(keyword(a.elemental)) + " takes no '@' parameter", line_no, tokens[i].column);
      }
      a.param = value;
    } else if (takes_param(a.elemental)) {
      throw ParseError(std::string(keyword(a.elemental)) + " needs '@ <real>'", line_no, tokens[2].column);
    }

    if (inputs.contains(a.target)) throw ParseError("assignment to input '" + a.target + "'", line_no, tokens[0].column);
    if (defined.contains(a.target)) {
      throw ParseError("'" + a.target + "' reassigned (single assignment violated)", line_no, tokens[0].column);
    }
    defined.insert(a.target);
    program.steps.push_back(std::move(a));
  }

  if (declarations < 2) throw ParseError(declarations == 0 ? "missing 'inputs' line" : "missing 'outputs' line", line_no, 1);
  const auto violations = validate_program(program);
  if (!violations.empty()) throw ParseError(violations.front().message(), outputs_line, 1);
  return program;
}

Program load_program(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_program(buffer.str(), path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line(), e.column());
  }
}

std::string to_text(const Program& p) {
  std::ostringstream out;
  out.precision(17);
  out << "inputs";
  for (const auto& v : p.input_vars) out << ' ' << v;
  out << "\noutputs";
  for (const auto& v : p.output_vars) out << ' ' << v;
  out << '\n';
  for (const auto& a : p.steps) {
    out << a.target << " = " << keyword(a.elemental);
    for (const auto& o : a.operands) out << ' ' << o;
    if (a.param) out << " @ " << *a.param;
    out << '\n';
  }
  return out.str();
}

ResolvedProgram::ResolvedProgram(const Program& p) {
  const auto violations = validate_program(p);
  if (!violations.empty()) throw UsageError(p.name + ": " + violations.front().message());
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& v : p.input_vars) slot.emplace(v, slot.size());
  n_inputs_ = p.input_vars.size();
  steps_.reserve(p.steps.size());
  for (const auto& a : p.steps) {
    Step step;
    step.elemental = a.elemental;
    step.param = a.param.value_or(0.0);
    for (const auto& o : a.operands) step.operands.push_back(slot.at(o));
    step.target = slot.size();
    slot.emplace(a.target, step.target);
    steps_.push_back(std::move(step));
  }
  for (const auto& v : p.output_vars) outputs_.push_back(slot.at(v));
}

Vector eval_primal(const ResolvedProgram& program, const Vector& x) {
  const auto y = evaluate(program, PlainAlgebra{}, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  return Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
}

Vector eval_primal(const Program& program, const Vector& x) { return eval_primal(ResolvedProgram(program), x); }

}  // namespace adinvar
