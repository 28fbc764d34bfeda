#include "recembed/dataset.hpp"

#include <cmath>

#include "recembed/error.hpp"

namespace recembed {

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "uniform-cube") return DatasetKind::uniform_cube;
  if (name == "gaussian") return DatasetKind::gaussian;
  if (name == "hypercube-corners") return DatasetKind::hypercube_corners;
  if (name == "planted-clusters") return DatasetKind::planted_clusters;
  throw DomainError("unknown dataset kind '" + std::string(name) +
                    "' (expected uniform-cube, gaussian, hypercube-corners, planted-clusters)");
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::uniform_cube: return "uniform-cube";
    case DatasetKind::gaussian: return "gaussian";
    case DatasetKind::hypercube_corners: return "hypercube-corners";
    case DatasetKind::planted_clusters: return "planted-clusters";
  }
  return "unknown";
}

namespace {

Dataset planted_clusters(std::size_t n, std::size_t d, NormExponent p, RandomSeed seed,
                         const PlantedOptions& opt) {
  if (opt.queries == 0) throw DomainError("planted-clusters needs at least one query");
  if (!(opt.radius > 0.0)) throw DomainError("planted radius must be positive");
  if (opt.points_per_cluster == 0) throw DomainError("points_per_cluster must be >= 1");

  const std::size_t m = (n + opt.points_per_cluster - 1) / opt.points_per_cluster;
  Rng center_rng = make_rng(derive_seed(seed, 1));
  std::vector<double> centers(m * d);
  for (double& c : centers) c = uniform(center_rng, 0.0, opt.center_spread * opt.radius);

  Rng member_rng = make_rng(derive_seed(seed, 2));
  std::vector<double> data(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % m;
    for (std::size_t j = 0; j < d; ++j) {
      data[i * d + j] =
          centers[c * d + j] + opt.member_sigma * opt.radius * standard_normal(member_rng);
    }
  }
  PointSet points(std::move(data), d, p);

  Rng query_rng = make_rng(derive_seed(seed, 3));
  std::vector<double> qdata(opt.queries * d);
  std::vector<PointId> anchors(opt.queries);
  std::vector<double> dir(d);
  for (std::size_t k = 0; k < opt.queries; ++k) {
    const std::size_t anchor = uniform_index(query_rng, n);
    anchors[k] = points.id(anchor);
    double norm = 0.0;
    while (norm == 0.0) {
      for (double& v : dir) v = standard_normal(query_rng);
      norm = lp_norm(dir, p);
    }
    // Strictly inside the ball so rounding cannot push it past r.
    const double length = uniform(query_rng, 0.5, 0.999) * opt.radius;
    auto x = points.row(anchor);
    for (std::size_t j = 0; j < d; ++j) qdata[k * d + j] = x[j] + dir[j] / norm * length;
  }

  Dataset out{std::move(points), std::nullopt};
  out.planted = PlantedTruth{PointSet(std::move(centers), d, p),
                             PointSet(std::move(qdata), d, p), std::move(anchors), opt.radius};
  return out;
}

}  // namespace

Dataset generate_dataset(DatasetKind kind, std::size_t n, std::size_t d, NormExponent p,
                         RandomSeed seed, const PlantedOptions& planted) {
  if (n == 0 || d == 0) throw DomainError("generate_dataset needs n, d >= 1");
  if (kind == DatasetKind::planted_clusters) return planted_clusters(n, d, p, seed, planted);

  Rng rng = make_rng(seed);
  std::vector<double> data(n * d);
  for (double& v : data) {
    switch (kind) {
      case DatasetKind::uniform_cube: v = uniform01(rng); break;
      case DatasetKind::gaussian: v = standard_normal(rng); break;
      case DatasetKind::hypercube_corners: v = static_cast<double>(rng() >> 63); break;
      case DatasetKind::planted_clusters: break;
    }
  }
  return Dataset{PointSet(std::move(data), d, p), std::nullopt};
}

}  // namespace recembed
