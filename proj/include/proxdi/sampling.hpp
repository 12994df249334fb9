#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "proxdi/geometry.hpp"

namespace proxdi {

/// How to draw evaluation points from a set. Grid mode lays a cell-centered
/// lattice over the window (step = density * largest window extent) and
/// keeps members / projections; random mode draws `count` uniform points.
struct SamplerSpec {
  enum class Mode { Grid, Random };
  Mode mode = Mode::Grid;
  double density = 0.01;
  int count = 500;
  std::uint64_t seed = 42;
  std::optional<std::pair<Vec, Vec>> window;
};

/// Points of the set covering window ∩ set: lattice members stay where they
/// are, off-set lattice points contribute their projection (boundary
/// coverage). Tube violations are skipped silently.
std::vector<Vec> sample_set(const ProxSet& set, const SamplerSpec& spec);

/// Boundary points obtained by projecting random off-set points.
std::vector<Vec> sample_boundary(const ProxSet& set, int count,
                                 std::uint64_t seed,
                                 std::optional<std::pair<Vec, Vec>> window = {});

Vec random_in_box(std::mt19937_64& rng, const Vec& lo, const Vec& hi);

/// Random unit vector.
Vec random_direction(std::mt19937_64& rng, int dim);

}  // namespace proxdi
