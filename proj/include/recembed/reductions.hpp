#pragma once

#include <cstddef>

#include "recembed/point_set.hpp"
#include "recembed/random.hpp"

namespace recembed {

struct HolderResult {
  PointSet points;
  /// True when d == 1 and the map degenerated to a plain re-tag.
  bool degenerate = false;
};

/// Target exponent max(2, log2 d) of the Holder reduction.
double holder_target_exponent(std::size_t dim);

/// Re-tags points living in l_p with p > log2 d (or p = inf) as points of
/// l_{p'}, p' = max(2, log2 d). Coordinates are untouched; every distance
/// grows by a factor in [1, d^(1/p' - 1/p)] <= 2.
HolderResult holder_map(const PointSet& s);

/// Whether the Holder reduction applies to this set (p = inf or p > log2 d).
bool holder_applies(const PointSet& s);

struct JlOptions {
  /// With target_dim == d, skip randomness and return the input unchanged.
  bool identity_check = false;
};

/// Gaussian random projection x -> G x / sqrt(target_dim) for l_2 data.
PointSet jl_project(const PointSet& s, std::size_t target_dim, RandomSeed seed,
                    const JlOptions& options = {});

}  // namespace recembed
