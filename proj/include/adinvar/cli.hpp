#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "adinvar/invariants.hpp"

namespace adinvar::cli {

enum ExitCode : int { kPass = 0, kFailure = 1, kUsage = 2 };

enum class Format : std::uint8_t { Text, Json };

struct RunConfig {
  std::string command;
  std::vector<std::filesystem::path> programs;
  std::string word;
  std::size_t max_order = 3;
  std::size_t trials = 10;
  std::uint64_t rng_seed = kDefaultRngSeed;
  std::optional<double> abs_tol;
  std::optional<double> rel_tol;
  std::optional<std::filesystem::path> faults;
  Format format = Format::Text;
  std::optional<std::filesystem::path> out;

  std::string seeds;  // "ones" or a JSON file {"x": [...], "seeds": [[...], ...]}
  bool random_seeds = false;
  std::vector<double> x;
  std::vector<double> xdot;
  std::vector<std::size_t> steps;
  std::size_t order = 2;
  bool all_prefixes = false;
  std::size_t threads = 0;

  TolerancePolicy tolerance(TolerancePolicy base = {}) const;
};

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_derive(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_debug(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (argv[0] is the program name) and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adinvar::cli
