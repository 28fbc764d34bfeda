#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "recembed/point_set.hpp"
#include "recembed/random.hpp"

namespace recembed {

enum class DatasetKind { uniform_cube, gaussian, hypercube_corners, planted_clusters };

DatasetKind parse_dataset_kind(std::string_view name);
std::string to_string(DatasetKind kind);

/// Ground truth recorded by the planted-clusters generator.
struct PlantedTruth {
  PointSet centers;
  /// Each query lies within `radius` (in the dataset norm) of the dataset
  /// row named by `anchor_ids`.
  PointSet queries;
  std::vector<PointId> anchor_ids;
  double radius;
};

struct Dataset {
  PointSet points;
  std::optional<PlantedTruth> planted;
};

struct PlantedOptions {
  std::size_t queries = 200;
  double radius = 1.0;
  std::size_t points_per_cluster = 20;
  /// Side of the cube holding cluster centers, in units of `radius`.
  double center_spread = 40.0;
  /// Per-coordinate std deviation of cluster members, in units of `radius`.
  double member_sigma = 0.5;
};

/// Deterministic in `seed`.
///  - uniform-cube: coordinates uniform in [0, 1)
///  - gaussian: standard normal coordinates
///  - hypercube-corners: uniform random corners of {0,1}^d
///  - planted-clusters: gaussian blobs around uniform centers, plus a planted
///    query set within `radius` of dataset points
Dataset generate_dataset(DatasetKind kind, std::size_t n, std::size_t d,
                         NormExponent p, RandomSeed seed,
                         const PlantedOptions& planted = {});

}  // namespace recembed
