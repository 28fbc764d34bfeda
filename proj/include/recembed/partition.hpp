#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "recembed/point_set.hpp"
#include "recembed/random.hpp"

namespace recembed {

/// Which mechanism produced a layer of a (possibly nested) partition.
struct ProvenanceTag {
  int level = 0;
  std::string mechanism;

  friend bool operator==(const ProvenanceTag&, const ProvenanceTag&) = default;
};

/// Cluster labels at scale delta. labels[i] belongs to the point set row i,
/// whose id is ids[i]. Labels are compact (0..k-1) in order of first
/// appearance.
struct Partition {
  std::vector<std::size_t> labels;
  std::vector<PointId> ids;
  double delta = 0.0;
  RandomSeed seed;
  std::vector<ProvenanceTag> provenance;

  std::size_t cluster_count() const;

  /// Row indices per cluster, clusters in label order, rows ascending.
  std::vector<std::vector<std::size_t>> clusters() const;

  nlohmann::json to_json() const;
  static Partition from_json(const nlohmann::json& j);
};

/// Relabels to first-appearance order 0..k-1.
void compact_labels(std::vector<std::size_t>& labels);

/// Single cluster holding every row of `s`.
Partition single_cluster(const PointSet& s, double delta, RandomSeed seed,
                         std::string mechanism, int level = 0);

/// Largest cluster diameter under the set's own norm.
double max_cluster_diameter(const PointSet& s, const Partition& partition);

/// Throws DomainError when some cluster is wider than delta (1 + rel_tol) or
/// the labels do not cover exactly the rows of `s`.
void audit_partition(const PointSet& s, const Partition& partition, double rel_tol = 1e-9);

/// Every cluster of `fine` sits inside a single cluster of `coarse`.
bool refines(const Partition& fine, const Partition& coarse);

}  // namespace recembed
