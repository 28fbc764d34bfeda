#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "recembed/partition.hpp"
#include "recembed/point_set.hpp"
#include "recembed/random.hpp"

namespace recembed {

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

/// A distribution over partitions of whatever point set it is handed. Draws
/// are pure functions of (points, delta, seed), so one sampler object can be
/// reused across the Mazur images produced inside a recursion.
class PartitionSampler {
 public:
  virtual ~PartitionSampler() = default;

  virtual Partition draw(const PointSet& s, double delta, RandomSeed seed) const = 0;

  virtual std::string name() const = 0;

  /// Decomposition parameter the recursion arithmetic assumes for this sampler.
  virtual double assumed_beta() const = 0;

  virtual nlohmann::json describe() const;
};

using SamplerPtr = std::shared_ptr<const PartitionSampler>;

enum class L2Strategy { grid, ballcarve };

L2Strategy parse_l2_strategy(std::string_view name);
std::string to_string(L2Strategy strategy);

struct L2Options {
  /// Carve a Gaussian projection to jl_dim dimensions when d > jl_dim.
  /// Clusters that end up wider than delta in the original space are
  /// re-carved there, so the diameter bound still holds.
  bool jl_pre_project = false;
  /// 0 means ceil(4 ln n).
  std::size_t jl_dim = 0;
};

/// Random-permutation ball carving: one radius uniform in [delta/4, delta/2],
/// centers visited in a seeded random order, each unassigned point joins the
/// first center within the radius (ties join).
Partition ckr_partition(const PointSet& s, double delta, RandomSeed seed);

/// l_2 base decompositions.
///  - grid: randomly shifted axis grid with cell side delta / sqrt(d)
///  - ballcarve: balls of radius delta/2 whose centers are jittered uniformly
///    inside the delta/4 ball around a random unassigned point
Partition l2_base_partition(const PointSet& s, double delta, L2Strategy strategy,
                            RandomSeed seed, const L2Options& options = {});

class CkrSampler final : public PartitionSampler {
 public:
  explicit CkrSampler(double assumed_beta) : assumed_beta_(assumed_beta) {}
  Partition draw(const PointSet& s, double delta, RandomSeed seed) const override;
  std::string name() const override { return "ckr"; }
  double assumed_beta() const override { return assumed_beta_; }

 private:
  double assumed_beta_;
};

class L2BaseSampler final : public PartitionSampler {
 public:
  L2BaseSampler(L2Strategy strategy, double assumed_beta, L2Options options = {})
      : strategy_(strategy), assumed_beta_(assumed_beta), options_(options) {}
  Partition draw(const PointSet& s, double delta, RandomSeed seed) const override;
  std::string name() const override;
  double assumed_beta() const override { return assumed_beta_; }

 private:
  L2Strategy strategy_;
  double assumed_beta_;
  L2Options options_;
};

// ---------------------------------------------------------------------------
// One refinement step
// ---------------------------------------------------------------------------

struct StepParams {
  double a;
  double b;
};

/// a = 1/2 (2 q beta / (p beta*))^(q/p), b = beta* a / beta. The pair
/// satisfies beta / a = beta* / b and (p/q)(2a)^(p/q - 1) b = 1.
StepParams step_params(double p, double q, double beta, double beta_star_q);

/// Leading constant of the refinement bound. With q = p/2 it puts the
/// fixpoint at 16 beta*; smaller values model a tighter analysis.
inline constexpr double kRefineConstant = 4.0;

/// Decomposition parameter guaranteed after one refinement:
/// C (p / 2q)^(q/p) beta*^(q/p) beta^(1 - q/p), C = `constant`.
double refined_beta(double p, double q, double beta, double beta_star_q,
                    double constant = kRefineConstant);

/// Fixpoint of refined_beta in beta: C^(p/q) (p / 2q) beta*.
double predict_fixpoint(double p, double q, double beta_star_q,
                        double constant = kRefineConstant);

/// Draws the outer partition at scale a delta, Mazur-maps each cluster into
/// l_q around its smallest-id point with radius a delta, partitions each image
/// at scale b delta with `inner`, and returns the common refinement. Every
/// output cluster has l_p diameter <= delta.
Partition refine_once(const PartitionSampler& outer, const PartitionSampler& inner,
                      const PointSet& s, double p, double q, double delta,
                      const StepParams& params, RandomSeed seed, int level = 0);

class RefineSampler final : public PartitionSampler {
 public:
  RefineSampler(SamplerPtr outer, SamplerPtr inner, double p, double q, StepParams params,
                double assumed_beta, int level);
  Partition draw(const PointSet& s, double delta, RandomSeed seed) const override;
  std::string name() const override;
  double assumed_beta() const override { return assumed_beta_; }
  nlohmann::json describe() const override;

  const SamplerPtr& outer() const { return outer_; }
  const SamplerPtr& inner() const { return inner_; }
  const StepParams& params() const { return params_; }

 private:
  SamplerPtr outer_;
  SamplerPtr inner_;
  double p_;
  double q_;
  StepParams params_;
  double assumed_beta_;
  int level_;
};

// ---------------------------------------------------------------------------
// Recursion driver
// ---------------------------------------------------------------------------

enum class BaseKind { ckr, l2_grid, l2_ballcarve };

BaseKind parse_base_kind(std::string_view name);
std::string to_string(BaseKind kind);

/// Assumed decomposition parameters. The analysis hides these inside O(.),
/// so they are explicit inputs here.
struct BetaEstimates {
  enum class Intermediate { fixpoint, calibrated };

  /// beta*_n(l_q) per exponent q. Missing intermediate entries are filled by
  /// `fill_intermediate`.
  std::map<double, double> table;
  /// Assumed parameter of the base sampler starting each level.
  double beta0 = 1.0;
  Intermediate intermediate = Intermediate::fixpoint;

  /// beta*_est(l_2) = c min(sqrt(d), sqrt(ln n)) and beta0 = c0 min(d, ln n),
  /// both clamped to >= 1.
  static BetaEstimates defaults(std::size_t n, std::size_t d, double c = 1.0, double c0 = 1.0);

  double beta_star(double q) const;

  nlohmann::json to_json() const;
};

struct DecompositionPlan {
  /// Descending exponents ending at 2; consecutive ratios in (1, 2].
  std::vector<double> p_chain;
  int inner_k = 1;
  BaseKind base = BaseKind::l2_ballcarve;
  bool abort_on_worse = true;
  /// Constant fed to refined_beta and predict_fixpoint.
  double refine_constant = kRefineConstant;
  /// Sampler that starts every non-l_2 level. `ckr` or the l_2 base (valid in
  /// l_p, p >= 2, because ||.||_p <= ||.||_2). Calibrated estimates ignore it
  /// and take whichever of ckr and `base` measures the smaller beta.
  BaseKind level_base = BaseKind::ckr;

  /// p, then the largest power of two below p when p is not a power of two,
  /// then halving down to 2.
  static std::vector<double> default_chain(double p);

  /// ceil(log2(log2 p * log2 beta0)), at least 1.
  static int default_inner_k(double p, double beta0);

  static DecompositionPlan for_exponent(double p, const BetaEstimates& estimates);

  void validate() const;
  nlohmann::json to_json() const;
};

/// Per-level bookkeeping of the recursion, outermost level first.
struct LevelSummary {
  double p;
  double q;
  /// beta_0, beta_1, ..., predicted by the refinement formula.
  std::vector<double> predicted_betas;
  int iterations;
  bool aborted;
};

/// A sampler bound to the point set it was built for.
class LipschitzSampler {
 public:
  LipschitzSampler(PointSet points, SamplerPtr sampler, DecompositionPlan plan,
                   BetaEstimates estimates, std::vector<LevelSummary> levels,
                   std::vector<SamplerPtr> stages);

  Partition draw(double delta, RandomSeed seed) const;

  const PointSet& points() const { return points_; }
  const PartitionSampler& sampler() const { return *sampler_; }
  const SamplerPtr& sampler_ptr() const { return sampler_; }
  const DecompositionPlan& plan() const { return plan_; }
  const BetaEstimates& estimates() const { return estimates_; }
  const std::vector<LevelSummary>& levels() const { return levels_; }

  /// Samplers after 0, 1, ..., k refinements of the outermost level.
  const std::vector<SamplerPtr>& stages() const { return stages_; }

  nlohmann::json describe() const;

 private:
  PointSet points_;
  SamplerPtr sampler_;
  DecompositionPlan plan_;
  BetaEstimates estimates_;
  std::vector<LevelSummary> levels_;
  std::vector<SamplerPtr> stages_;
};

/// Composes refine_once inner_k times per level down the p-chain to the l_2
/// base. Requires the set's norm p >= 2 (apply holder_map first for p = inf
/// or p > log2 d). With estimates.intermediate == calibrated, intermediate
/// beta* values come from estimate_beta runs on whole-set Mazur images.
LipschitzSampler build_decomposer(const PointSet& s, const DecompositionPlan& plan,
                                  const BetaEstimates& estimates,
                                  RandomSeed calibration_seed = {});

}  // namespace recembed
