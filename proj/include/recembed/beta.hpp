#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "recembed/lipschitz.hpp"

namespace recembed {

/// Empirical separation statistics of a sampler at one scale.
struct BetaReport {
  /// max over tested pairs of (separation frequency) * delta / distance.
  double beta_hat = 0.0;
  std::size_t pairs_tested = 0;
  std::size_t draws = 0;
  double delta = 0.0;
  std::pair<PointId, PointId> worst_pair{-1, -1};
  /// beta_hat of each refinement stage of the outermost level (stage 0 is
  /// the level's base sampler). Empty unless requested.
  std::vector<double> series;

  friend bool operator==(const BetaReport&, const BetaReport&) = default;
};

struct BetaOptions {
  bool with_series = false;
  /// 0 means read RECEMBED_THREADS (default: hardware concurrency).
  unsigned threads = 0;
};

/// Draws `draws` partitions and measures separation over a fixed pair sample:
/// every pair when n(n-1)/2 <= pair_budget, otherwise pair_budget distinct
/// uniform pairs. Zero-distance pairs are skipped. Deterministic in seed and
/// independent of the thread count.
BetaReport estimate_beta(const PartitionSampler& sampler, const PointSet& s, double delta,
                         std::size_t draws, std::size_t pair_budget, RandomSeed seed,
                         const BetaOptions& options = {});

BetaReport estimate_beta(const LipschitzSampler& sampler, double delta, std::size_t draws,
                         std::size_t pair_budget, RandomSeed seed,
                         const BetaOptions& options = {});

/// Header "delta,draws,pairs,beta_hat,worst_i,worst_j".
std::string beta_csv_header();
std::string beta_csv_row(const BetaReport& report);

/// "stage,beta_hat" rows for the refinement series.
std::string beta_series_csv(const BetaReport& report);

}  // namespace recembed
