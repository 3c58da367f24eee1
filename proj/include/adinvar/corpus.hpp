#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "adinvar/deriv.hpp"
#include "adinvar/program.hpp"

namespace adinvar {

/// Axis-aligned box of primal points on which a program is known to be
/// smooth. Read from the optional `<name>.box` sidecar of a `.sac` file:
///
///     # var lower upper      (`*` sets every input not listed)
///     * 0.5 2.0
///     x2 -1 1
struct Box {
  Vector lower;
  Vector upper;

  static constexpr double kDefaultLower = 0.5;
  static constexpr double kDefaultUpper = 1.5;

  static Box uniform(std::size_t n, double lower, double upper);
  static Box parse(std::string_view text, const Program& program);
  static Box load(const std::filesystem::path& path, const Program& program);
};

struct CorpusEntry {
  Program program;
  Box box;
  std::filesystem::path path;
};

/// Loads `.sac` files; directories contribute their `.sac` files in name
/// order. Throws UsageError on an empty result.
std::vector<CorpusEntry> load_corpus(std::span<const std::filesystem::path> paths);
CorpusEntry load_entry(const std::filesystem::path& sac_path);

/// splitmix64 combination of a base seed with case keys.
std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys);

/// Reproducible draws of primal points and seed directions.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [lower, upper), computed from raw 64-bit draws so results do
  /// not depend on the standard library's distributions.
  double uniform(double lower, double upper);
  Vector point(const Box& box);
  /// Components uniform in [-1, 1]; redrawn while the norm is <= 1e-6.
  Vector direction(std::size_t n);
  /// Uniform in [-1, 1]; redrawn while |value| < min_magnitude.
  double scalar(double min_magnitude);

  /// One direction per level of `word`, shaped by infer_shapes.
  SeedBundle seeds(std::size_t n, std::size_t m, const ModeWord& word);

 private:
  std::mt19937_64 engine_;
};

}  // namespace adinvar
