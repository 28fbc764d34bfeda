#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "recembed/mazur.hpp"
#include "recembed/point_set.hpp"
#include "recembed/random.hpp"

namespace recembed {

/// Exact nearest neighbor under V's norm, ties to the smallest id.
std::pair<PointId, double> brute_force_nn(const PointSet& v, std::span<const double> q);

/// Row index variant of brute_force_nn.
std::size_t brute_force_nn_row(const PointSet& v, std::span<const double> q);

enum class AnnBaseStrategy { exact_oracle, crude_grid };
enum class TSchedule { halving, geometric };

AnnBaseStrategy parse_ann_base(std::string_view name);
std::string to_string(AnnBaseStrategy strategy);
TSchedule parse_t_schedule(std::string_view name);
std::string to_string(TSchedule schedule);

// ---------------------------------------------------------------------------
// Point stores: the serialized form of every index
// ---------------------------------------------------------------------------

/// Rows of coordinates tagged with (owner, id); one CSV per store.
struct PointStore {
  std::size_t dim = 0;
  std::vector<PointId> owners;
  std::vector<PointId> ids;
  std::vector<double> data;

  std::size_t size() const { return ids.size(); }
};

/// JSON manifest plus named point stores.
struct AnnDump {
  nlohmann::json manifest;
  std::map<std::string, PointStore> stores;

  /// Writes manifest.json and one <store>.csv per store into `dir`.
  void write(const std::filesystem::path& dir) const;
  static AnnDump read(const std::filesystem::path& dir);
};

// ---------------------------------------------------------------------------
// Index interface and base structures
// ---------------------------------------------------------------------------

/// A (c, r)-ANN structure over a fixed point set. Queries return a row index
/// of that set; callers recompute distances from raw coordinates.
class AnnIndex {
 public:
  virtual ~AnnIndex() = default;

  virtual std::size_t query(std::span<const double> q, RandomSeed seed) const = 0;
  virtual double advertised_c() const = 0;
  /// Space proxy: total number of stored points, children included.
  virtual std::size_t stored_points() const = 0;
  virtual const PointSet& points() const = 0;
  /// Fresh seeds can give a different structure.
  virtual bool randomized() const = 0;
  /// Appends its stores under `prefix` and returns the manifest node.
  virtual nlohmann::json dump(AnnDump& out, const std::string& prefix) const = 0;
};

using AnnIndexPtr = std::unique_ptr<const AnnIndex>;

/// Brute force; c = 1.
class ExactOracleIndex final : public AnnIndex {
 public:
  explicit ExactOracleIndex(PointSet points) : points_(std::move(points)) {}
  std::size_t query(std::span<const double> q, RandomSeed seed) const override;
  double advertised_c() const override { return 1.0; }
  std::size_t stored_points() const override { return points_.size(); }
  const PointSet& points() const override { return points_; }
  bool randomized() const override { return false; }
  nlohmann::json dump(AnnDump& out, const std::string& prefix) const override;

 private:
  PointSet points_;
};

/// Randomly shifted axis grid with cell side 2r over the stored coordinates
/// (Gaussian-projected first for l_2 data when d > ceil(4 ln n)). Each
/// nonempty cell keeps its smallest-id point. A query returns the
/// representative of its own cell, or else that of the nonempty cell whose
/// center is nearest. Advertised c is fixed at build time from the geometry
/// and a measured surrogate, see advertised_c().
class CrudeGridIndex final : public AnnIndex {
 public:
  CrudeGridIndex(PointSet points, double r, RandomSeed seed);

  std::size_t query(std::span<const double> q, RandomSeed seed) const override;
  double advertised_c() const override { return advertised_c_; }
  std::size_t stored_points() const override { return points_.size(); }
  const PointSet& points() const override { return points_; }
  bool randomized() const override { return true; }
  nlohmann::json dump(AnnDump& out, const std::string& prefix) const override;

  double side() const { return side_; }
  const std::vector<double>& offsets() const { return offsets_; }
  std::size_t cell_count() const { return cells_.size(); }

  static std::unique_ptr<CrudeGridIndex> load(const nlohmann::json& node, const AnnDump& in,
                                              PointSet points);

 private:
  struct Cell {
    std::vector<std::int64_t> key;
    std::size_t representative;
  };

  CrudeGridIndex(PointSet points, double r) : points_(std::move(points)), r_(r) {}
  std::vector<double> project(std::span<const double> x) const;
  std::vector<std::int64_t> key_of(std::span<const double> projected) const;
  void index_cells();

  PointSet points_;
  double r_;
  double side_ = 0.0;
  std::vector<double> offsets_;
  /// Row-major (projected_dim x d); empty when no projection.
  std::vector<double> projection_;
  std::size_t projected_dim_ = 0;
  std::vector<Cell> cells_;
  std::map<std::vector<std::int64_t>, std::size_t> cell_of_key_;
  double advertised_c_ = 1.0;
  double measured_factor_ = 1.0;
};

/// Builds the requested base structure over `points` (norm p taken from the set).
AnnIndexPtr build_base_ann(const PointSet& points, double r, AnnBaseStrategy strategy,
                           RandomSeed seed);

// ---------------------------------------------------------------------------
// Recursive structure
// ---------------------------------------------------------------------------

struct AnnConfig {
  double p = 4.0;
  double r = 1.0;
  TSchedule t_schedule = TSchedule::halving;
  double epsilon = 0.5;
  /// Levels of the inner recursion; unset: ceil(log2(log2 p * log2 c0)).
  std::optional<int> inner_k;
  /// Repetitions per child; unset: ceil(log2(3k)) for l_2 children and
  /// ceil(log2(3 log2 p)) for recursive children.
  std::optional<int> reps_inner;
  std::optional<int> reps_outer;
  /// Structure answering the first candidate at every l_p level.
  AnnBaseStrategy base = AnnBaseStrategy::crude_grid;
  /// Structure over l_2 images at the bottom of the t-chain.
  AnnBaseStrategy floor = AnnBaseStrategy::exact_oracle;

  void validate() const;
  nlohmann::json to_json() const;
  static AnnConfig from_json(const nlohmann::json& j);
};

/// Next exponent of the t-chain below p (2 terminates the chain).
double next_t(double p, TSchedule schedule, double epsilon);

/// Approximation after one Mazur level:
/// (p/t)^(t/p) c_t^(t/p) (4 c_p)^(1 - t/p).
double predict_c(double p, double t, double c_p, double c_t);

int default_ann_levels(double p, double c0);

/// One entry in the query trace.
struct TraceStep {
  int level = 0;
  PointId id = -1;
  double distance = 0.0;
  /// "base", "child", "radius-skip" or "empty-ball".
  std::string note;
};

struct QueryOutcome {
  PointId id = -1;
  /// Recomputed from raw coordinates.
  double distance = 0.0;
  std::vector<TraceStep> trace;
  double threshold = 0.0;
  bool success = false;
};

class RecursiveAnnStructure final : public AnnIndex {
 public:
  struct Child {
    MazurSpec spec;
    /// Dataset rows inside the ball, in ascending row order.
    std::vector<std::size_t> members;
    std::vector<AnnIndexPtr> reps;
  };

  struct Level {
    double t = 2.0;
    /// Advertised approximation before this level (sets the Mazur scale).
    double c_in = 1.0;
    /// Ball radius 2 r c_in.
    double radius = 0.0;
    /// Worst advertised approximation of the children.
    double c_t = 1.0;
    /// min(c_in, predict_c(p, t, c_in, c_t)).
    double c_out = 1.0;
    int reps = 1;
    std::vector<Child> children;
  };

  /// Requires p > 2 for the dataset's norm (apply holder_map first when
  /// p > log2 d).
  static std::unique_ptr<RecursiveAnnStructure> build(const PointSet& v, const AnnConfig& cfg,
                                                      RandomSeed seed);

  QueryOutcome query_outcome(std::span<const double> q, RandomSeed seed,
                             std::optional<double> threshold = std::nullopt) const;

  std::size_t query(std::span<const double> q, RandomSeed seed) const override;
  double advertised_c() const override;
  std::size_t stored_points() const override;
  const PointSet& points() const override { return dataset_; }
  bool randomized() const override { return true; }
  nlohmann::json dump(AnnDump& out, const std::string& prefix) const override;

  const AnnConfig& config() const { return cfg_; }
  const AnnIndex& base() const { return *base_; }
  const std::vector<Level>& levels() const { return levels_; }
  RandomSeed seed() const { return seed_; }

  /// Advertised approximation after each level, c_0 first.
  std::vector<double> c_schedule() const;

  AnnDump dump() const;
  static std::unique_ptr<RecursiveAnnStructure> load(const AnnDump& in);

  /// Rebuilds any index node written by dump(out, prefix) over `points`.
  static AnnIndexPtr load_index(const nlohmann::json& node, const AnnDump& in, PointSet points);

 private:
  RecursiveAnnStructure(PointSet dataset, AnnConfig cfg, RandomSeed seed)
      : dataset_(std::move(dataset)), cfg_(std::move(cfg)), seed_(seed) {}

  static std::unique_ptr<RecursiveAnnStructure> load_node(const nlohmann::json& node,
                                                          const AnnDump& in, PointSet dataset);

  PointSet dataset_;
  AnnConfig cfg_;
  RandomSeed seed_;
  AnnIndexPtr base_;
  std::vector<Level> levels_;
};

std::unique_ptr<RecursiveAnnStructure> build_recursive_ann(const PointSet& v,
                                                           const AnnConfig& cfg,
                                                           RandomSeed seed);

QueryOutcome ann_query(const RecursiveAnnStructure& structure, std::span<const double> q,
                       RandomSeed seed);

// ---------------------------------------------------------------------------
// Benchmark
// ---------------------------------------------------------------------------

struct AnnBenchRow {
  PointId query_id = 0;
  double true_dist = 0.0;
  double got_dist = 0.0;
  double ratio = 1.0;
  bool success_at_theory = false;
  double micros_query = 0.0;
  /// Distance of the base candidate, for the never-worse check.
  double base_dist = 0.0;
};

struct AnnBenchReport {
  std::vector<AnnBenchRow> rows;
  /// (advertised c after level i, success rate at threshold c r).
  std::vector<std::pair<double, double>> success_by_threshold;
  double median_ratio = 1.0;
  double max_ratio = 1.0;
  double theory_threshold = 0.0;
  double success_rate = 0.0;
  /// Queries whose answer was worse than the base candidate (must be 0).
  std::size_t never_worse_violations = 0;

  /// Header "query_id,true_dist,got_dist,ratio,success_at_theory,micros_query".
  std::string to_csv(bool with_timing = true) const;
  nlohmann::json summary() const;
};

/// Runs every query through ann_query, scoring against brute_force_nn.
/// Query seeds derive from (seed, query row).
AnnBenchReport ann_bench(const RecursiveAnnStructure& structure, const PointSet& queries,
                         double r, RandomSeed seed);

}  // namespace recembed
