#include "recembed/beta.hpp"

#include <algorithm>
#include <mutex>
#include <unordered_set>

#include "recembed/error.hpp"
#include "recembed/parallel.hpp"
#include "recembed/point_io.hpp"

namespace recembed {

namespace {

struct PairSample {
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  std::vector<double> dist;
};

PairSample sample_pairs(const PointSet& s, std::size_t budget, RandomSeed seed) {
  const std::size_t n = s.size();
  PairSample out;
  auto keep = [&](std::size_t i, std::size_t j) {
    const double d = lp_distance(s.row(i), s.row(j), s.norm());
    if (d > 0.0) {
      out.rows.emplace_back(i, j);
      out.dist.push_back(d);
    }
  };
  const std::size_t total = n < 2 ? 0 : n * (n - 1) / 2;
  if (total <= budget) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) keep(i, j);
    }
    return out;
  }
  Rng rng = make_rng(seed);
  std::unordered_set<std::uint64_t> seen;
  std::vector<std::pair<std::size_t, std::size_t>> chosen;
  while (chosen.size() < budget) {
    std::size_t i = uniform_index(rng, n);
    std::size_t j = uniform_index(rng, n);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (seen.insert(static_cast<std::uint64_t>(i) * n + j).second) chosen.emplace_back(i, j);
  }
  std::sort(chosen.begin(), chosen.end());
  for (auto [i, j] : chosen) keep(i, j);
  return out;
}

BetaReport measure(const PartitionSampler& sampler, const PointSet& s, double delta,
                   std::size_t draws, const PairSample& pairs, RandomSeed seed, unsigned threads) {
  std::vector<std::size_t> cut(pairs.rows.size(), 0);
  std::mutex merge;
  parallel_chunks(draws, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> local(pairs.rows.size(), 0);
    for (std::size_t t = begin; t < end; ++t) {
      const Partition part = sampler.draw(s, delta, derive_seed(seed, t));
      for (std::size_t k = 0; k < pairs.rows.size(); ++k) {
        local[k] += part.labels[pairs.rows[k].first] != part.labels[pairs.rows[k].second];
      }
    }
    std::lock_guard lock(merge);
    for (std::size_t k = 0; k < local.size(); ++k) cut[k] += local[k];
  });

  BetaReport report;
  report.draws = draws;
  report.delta = delta;
  report.pairs_tested = pairs.rows.size();
  for (std::size_t k = 0; k < pairs.rows.size(); ++k) {
    const double value =
        static_cast<double>(cut[k]) / static_cast<double>(draws) * delta / pairs.dist[k];
    if (k == 0 || value > report.beta_hat) {
      report.beta_hat = value;
      report.worst_pair = {s.id(pairs.rows[k].first), s.id(pairs.rows[k].second)};
    }
  }
  return report;
}

void check_args(double delta, std::size_t draws, std::size_t pair_budget) {
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (draws == 0) throw DomainError("draws must be >= 1");
  if (pair_budget == 0) throw DomainError("pair budget must be >= 1");
}

}  // namespace

BetaReport estimate_beta(const PartitionSampler& sampler, const PointSet& s, double delta,
                         std::size_t draws, std::size_t pair_budget, RandomSeed seed,
                         const BetaOptions& options) {
  check_args(delta, draws, pair_budget);
  const unsigned threads = options.threads ? options.threads : default_thread_count();
  const PairSample pairs = sample_pairs(s, pair_budget, derive_seed(seed, 0));
  BetaReport report = measure(sampler, s, delta, draws, pairs, derive_seed(seed, 1), threads);
  if (options.with_series) report.series = {report.beta_hat};
  return report;
}

BetaReport estimate_beta(const LipschitzSampler& sampler, double delta, std::size_t draws,
                         std::size_t pair_budget, RandomSeed seed, const BetaOptions& options) {
  check_args(delta, draws, pair_budget);
  const unsigned threads = options.threads ? options.threads : default_thread_count();
  const PointSet& s = sampler.points();
  const PairSample pairs = sample_pairs(s, pair_budget, derive_seed(seed, 0));
  BetaReport report =
      measure(sampler.sampler(), s, delta, draws, pairs, derive_seed(seed, 1), threads);
  if (options.with_series) {
    for (const auto& stage : sampler.stages()) {
      report.series.push_back(
          measure(*stage, s, delta, draws, pairs, derive_seed(seed, 1), threads).beta_hat);
    }
  }
  return report;
}

std::string beta_csv_header() { return "delta,draws,pairs,beta_hat,worst_i,worst_j"; }

std::string beta_csv_row(const BetaReport& r) {
  return format_sig9(r.delta) + "," + std::to_string(r.draws) + "," +
         std::to_string(r.pairs_tested) + "," + format_sig9(r.beta_hat) + "," +
         std::to_string(r.worst_pair.first) + "," + std::to_string(r.worst_pair.second);
}

std::string beta_series_csv(const BetaReport& r) {
  std::string out = "stage,beta_hat\n";
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    out += std::to_string(i) + "," + format_sig9(r.series[i]) + "\n";
  }
  return out;
}

}  // namespace recembed
