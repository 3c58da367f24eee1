#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "adinvar/corpus.hpp"
#include "adinvar/program.hpp"

namespace fixture {

inline std::filesystem::path corpus_dir() { return ADINVAR_CORPUS_DIR; }
inline std::filesystem::path faults_dir() { return ADINVAR_FAULTS_DIR; }

inline adinvar::CorpusEntry entry(const std::string& name) {
  return adinvar::load_entry(corpus_dir() / (name + ".sac"));
}

inline std::vector<adinvar::CorpusEntry> corpus() {
  const std::vector<std::filesystem::path> paths{corpus_dir()};
  return adinvar::load_corpus(paths);
}

inline adinvar::Vector vec(std::initializer_list<double> v) {
  adinvar::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline bool close(double a, double b, double rel = 1e-12, double abs = 1e-14) {
  return std::abs(a - b) <= std::max(abs, rel * std::max(std::abs(a), std::abs(b)));
}

}  // namespace fixture
