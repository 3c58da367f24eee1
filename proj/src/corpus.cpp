#include "adinvar/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "adinvar/errors.hpp"

namespace adinvar {

Box Box::uniform(std::size_t n, double lower, double upper) {
  const auto size = static_cast<Eigen::Index>(n);
  return {Vector::Constant(size, lower), Vector::Constant(size, upper)};
}

Box Box::parse(std::string_view text, const Program& program) {
  Box box = uniform(program.n_inputs(), kDefaultLower, kDefaultUpper);
  std::vector<bool> explicit_bound(program.n_inputs(), false);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string var;
    double lower = 0.0;
    double upper = 0.0;
    if (!(fields >> var)) continue;
    if (!(fields >> lower >> upper) || !(lower < upper)) {
      throw ParseError("expected '<var> <lower> <upper>' with lower < upper", line_no, 1);
    }
    if (var == "*") {
      for (std::size_t j = 0; j < program.n_inputs(); ++j) {
        if (explicit_bound[j]) continue;
        box.lower[static_cast<Eigen::Index>(j)] = lower;
        box.upper[static_cast<Eigen::Index>(j)] = upper;
      }
      continue;
    }
    const auto it = std::find(program.input_vars.begin(), program.input_vars.end(), var);
    if (it == program.input_vars.end()) throw ParseError("'" + var + "' is not an input", line_no, 1);
    const auto j = static_cast<std::size_t>(it - program.input_vars.begin());
    explicit_bound[j] = true;
    box.lower[static_cast<Eigen::Index>(j)] = lower;
    box.upper[static_cast<Eigen::Index>(j)] = upper;
  }
  return box;
}

Box Box::load(const std::filesystem::path& path, const Program& program) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse(buffer.str(), program);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line(), e.column());
  }
}

CorpusEntry load_entry(const std::filesystem::path& sac_path) {
  CorpusEntry entry;
  entry.path = sac_path;
  entry.program = load_program(sac_path);
  std::filesystem::path box_path = sac_path;
  box_path.replace_extension(".box");
  entry.box = std::filesystem::exists(box_path)
                  ? Box::load(box_path, entry.program)
                  : Box::uniform(entry.program.n_inputs(), Box::kDefaultLower, Box::kDefaultUpper);
  return entry;
}

std::vector<CorpusEntry> load_corpus(std::span<const std::filesystem::path> paths) {
  std::vector<std::filesystem::path> files;
  for (const auto& path : paths) {
    if (std::filesystem::is_directory(path)) {
      std::vector<std::filesystem::path> found;
      for (const auto& e : std::filesystem::directory_iterator(path)) {
        if (e.is_regular_file() && e.path().extension() == ".sac") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (std::filesystem::exists(path)) {
      files.push_back(path);
    } else {
      throw UsageError("no such file or directory: " + path.string());
    }
  }
  if (files.empty()) throw UsageError("corpus is empty");
  std::vector<CorpusEntry> corpus;
  corpus.reserve(files.size());
  for (const auto& f : files) corpus.push_back(load_entry(f));
  return corpus;
}

std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = splitmix(base);
  for (std::uint64_t k : keys) h = splitmix(h ^ splitmix(k));
  return h;
}

double Sampler::uniform(double lower, double upper) {
  const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lower + (upper - lower) * unit;
}

Vector Sampler::point(const Box& box) {
  Vector x(box.lower.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = uniform(box.lower[j], box.upper[j]);
  return x;
}

Vector Sampler::direction(std::size_t n) {
  Vector v(static_cast<Eigen::Index>(n));
  do {
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = uniform(-1.0, 1.0);
  } while (v.norm() <= 1e-6);
  return v;
}

double Sampler::scalar(double min_magnitude) {
  double v = 0.0;
  do {
    v = uniform(-1.0, 1.0);
  } while (std::abs(v) < min_magnitude);
  return v;
}

SeedBundle Sampler::seeds(std::size_t n, std::size_t m, const ModeWord& word) {
  SeedBundle bundle;
  for (const Shape& shape : infer_shapes(n, m, word).seeds) bundle.push_back(direction(shape.dim));
  return bundle;
}

}  // namespace adinvar
