#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "recembed/ann.hpp"
#include "recembed/dataset.hpp"
#include "recembed/error.hpp"

using namespace recembed;

namespace {

Dataset planted(std::size_t n, std::size_t d, double p, std::uint64_t seed, std::size_t queries = 60) {
  PlantedOptions opt;
  opt.queries = queries;
  return generate_dataset(DatasetKind::planted_clusters, n, d, NormExponent(p), RandomSeed{seed}, opt);
}

// Points varying in two coordinates only, so grid cells hold many points
// and the crude base's advertised c exceeds the recursion fixpoint.
PointSet flat_cloud(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(RandomSeed{seed});
  std::vector<double> data(n * 16, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    data[i * 16] = uniform(rng, 0, 6);
    data[i * 16 + 1] = uniform(rng, 0, 6);
  }
  return PointSet(std::move(data), 16, NormExponent(4));
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("recembed_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(BruteForce, OracleAndTies) {
  PointSet v({0, 0, 1, 0, 0, 1}, 2, NormExponent(2), {5, 3, 9});
  auto [id, dist] = brute_force_nn(v, std::vector<double>{0.9, 0.1});
  EXPECT_EQ(id, 3);
  EXPECT_NEAR(dist, std::sqrt(0.02), 1e-12);
  // (0.5, 0.5) is equidistant from all three rows.
  EXPECT_EQ(brute_force_nn(v, std::vector<double>{0.5, 0.5}).first, 3);
  EXPECT_EQ(brute_force_nn(v, std::vector<double>{1, 0}).second, 0.0);
  EXPECT_THROW(brute_force_nn(v, std::vector<double>{1}), DomainError);
  PointSet single({2, 2}, 2, NormExponent(4), {42});
  EXPECT_EQ(brute_force_nn(single, std::vector<double>{7, -1}).first, 42);
}

TEST(BruteForce, MatchesExhaustiveRecompute) {
  const PointSet v = generate_dataset(DatasetKind::gaussian, 100, 5, NormExponent(3), RandomSeed{2}).points;
  const PointSet qs = generate_dataset(DatasetKind::gaussian, 100, 5, NormExponent(3), RandomSeed{3}).points;
  for (std::size_t j = 0; j < qs.size(); ++j) {
    double best = INFINITY;
    for (std::size_t i = 0; i < v.size(); ++i) best = std::min(best, lp_distance(v.row(i), qs.row(j), v.norm()));
    EXPECT_EQ(brute_force_nn(v, qs.row(j)).second, best);
  }
}

TEST(PredictC, FrozenValues) {
  EXPECT_NEAR(predict_c(4, 2, 100, 2), 40.0, 1e-12);
  EXPECT_NEAR(predict_c(4, 2, 1, 1), std::sqrt(2.0) * 2.0, 1e-12);
  EXPECT_NEAR(predict_c(6, 3, 1, 1), std::pow(2.0, 0.5) * std::pow(4.0, 0.5), 1e-12);
  EXPECT_THROW(predict_c(4, 4, 2, 2), DomainError);
  EXPECT_THROW(predict_c(4, 1.5, 2, 2), DomainError);
  EXPECT_THROW(predict_c(4, 2, 0.5, 2), DomainError);
}

TEST(PredictC, IterationMatchesClosedForm) {
  double c = 1e6;
  const double ct = 4;
  double prev = c;
  for (int k = 1; k <= 30; ++k) {
    c = predict_c(4, 2, c, ct);
    const double exact = std::pow(8 * ct, 1 - std::pow(2.0, -k)) * std::pow(1e6, std::pow(2.0, -k));
    ASSERT_NEAR(c / exact, 1.0, 1e-9);
    ASSERT_LE(c, 8 * ct * std::pow(1e6, std::pow(2.0, -k)) * (1 + 1e-12));
    ASSERT_LT(c, prev);
    prev = c;
  }
  EXPECT_NEAR(c, 32.0, 1e-3);
}

TEST(NextT, Schedules) {
  EXPECT_EQ(next_t(8, TSchedule::halving, 0.5), 4);
  EXPECT_EQ(next_t(3, TSchedule::halving, 0.5), 2);
  EXPECT_DOUBLE_EQ(next_t(8, TSchedule::geometric, 0.25), 6);
  EXPECT_THROW(next_t(2, TSchedule::halving, 0.5), DomainError);
}

TEST(AnnConfig, ValidationAndJson) {
  AnnConfig cfg;
  cfg.inner_k = 2;
  cfg.reps_outer = 3;
  const AnnConfig back = AnnConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.inner_k, cfg.inner_k);
  EXPECT_EQ(back.reps_outer, cfg.reps_outer);
  EXPECT_FALSE(back.reps_inner.has_value());
  AnnConfig bad = cfg;
  bad.p = 2;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = cfg;
  bad.epsilon = 1;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = cfg;
  bad.reps_inner = 0;
  EXPECT_THROW(bad.validate(), DomainError);
  EXPECT_THROW(parse_ann_base("lsh"), DomainError);
}

TEST(BaseAnn, ExactOracleAnswersPlantedQueries) {
  const Dataset ds = planted(200, 6, 4, 1);
  auto base = build_base_ann(ds.points, 1.0, AnnBaseStrategy::exact_oracle, RandomSeed{0});
  EXPECT_EQ(base->advertised_c(), 1.0);
  for (std::size_t j = 0; j < ds.planted->queries.size(); ++j) {
    auto q = ds.planted->queries.row(j);
    EXPECT_EQ(ds.points.id(base->query(q, RandomSeed{0})), brute_force_nn(ds.points, q).first);
  }
}

TEST(BaseAnn, CrudeGridSameCellAudit) {
  const Dataset ds = planted(400, 8, 4, 2, 200);
  auto base = build_base_ann(ds.points, 1.0, AnnBaseStrategy::crude_grid, RandomSeed{5});
  const auto& grid = dynamic_cast<const CrudeGridIndex&>(*base);
  EXPECT_EQ(grid.side(), 2.0);
  const double c = base->advertised_c();
  EXPECT_GE(c, std::sqrt(8.0));
  std::size_t same_cell = 0;
  for (std::size_t j = 0; j < ds.planted->queries.size(); ++j) {
    auto q = ds.planted->queries.row(j);
    const std::size_t nn = brute_force_nn_row(ds.points, q);
    const std::size_t got = base->query(q, RandomSeed{0});
    // Same cell as the near neighbor: the representative answers within c r.
    if (base->query(ds.points.row(nn), RandomSeed{0}) == got) {
      const bool q_in_nn_cell = [&] {
        for (std::size_t k = 0; k < q.size(); ++k) {
          const double o = grid.offsets()[k];
          if (std::floor((q[k] + o) / grid.side()) != std::floor((ds.points.row(nn)[k] + o) / grid.side())) return false;
        }
        return true;
      }();
      if (q_in_nn_cell) {
        ++same_cell;
        EXPECT_LE(lp_distance(ds.points.row(got), q, ds.points.norm()), c * 1.0);
      }
    }
  }
  EXPECT_GT(same_cell, 0u);
}

TEST(BaseAnn, CrudeGridDeterministicOffsets) {
  const Dataset ds = planted(100, 4, 4, 3);
  auto a = build_base_ann(ds.points, 1.0, AnnBaseStrategy::crude_grid, RandomSeed{9});
  auto b = build_base_ann(ds.points, 1.0, AnnBaseStrategy::crude_grid, RandomSeed{9});
  EXPECT_EQ(dynamic_cast<const CrudeGridIndex&>(*a).offsets(),
            dynamic_cast<const CrudeGridIndex&>(*b).offsets());
  EXPECT_THROW(build_base_ann(ds.points, 0.0, AnnBaseStrategy::crude_grid, RandomSeed{9}), DomainError);
}

TEST(BaseAnn, CrudeGridProjectsHighDimensionalL2) {
  const PointSet v = generate_dataset(DatasetKind::gaussian, 50, 64, NormExponent(2), RandomSeed{4}).points;
  CrudeGridIndex grid(v, 1.0, RandomSeed{1});
  EXPECT_EQ(grid.offsets().size(), static_cast<std::size_t>(std::ceil(4 * std::log(50.0))));
  EXPECT_LT(grid.query(v.row(3), RandomSeed{0}), v.size());
}

TEST(RecursiveAnn, SinglePoint) {
  PointSet v({1, 2, 3}, 3, NormExponent(4), {17});
  AnnConfig cfg;
  auto s = build_recursive_ann(v, cfg, RandomSeed{1});
  const QueryOutcome o = ann_query(*s, std::vector<double>{1.5, 2, 3}, RandomSeed{2});
  EXPECT_EQ(o.id, 17);
  EXPECT_TRUE(o.success);
}

TEST(RecursiveAnn, QueryAtDatasetPointWithExactBase) {
  const Dataset ds = planted(150, 6, 4, 4);
  AnnConfig cfg;
  cfg.base = AnnBaseStrategy::exact_oracle;
  auto s = build_recursive_ann(ds.points, cfg, RandomSeed{1});
  for (std::size_t i = 0; i < ds.points.size(); i += 10) {
    const QueryOutcome o = ann_query(*s, ds.points.row(i), RandomSeed{i});
    EXPECT_EQ(o.distance, 0.0);
    EXPECT_EQ(o.id, ds.points.id(i));
  }
}

TEST(RecursiveAnn, BallsAndRadiusDiscipline) {
  const Dataset ds = planted(120, 6, 4, 5);
  AnnConfig cfg;
  auto s = build_recursive_ann(ds.points, cfg, RandomSeed{3});
  ASSERT_FALSE(s->levels().empty());
  for (const auto& level : s->levels()) {
    EXPECT_DOUBLE_EQ(level.radius, 2.0 * cfg.r * level.c_in);
    for (std::size_t x = 0; x < level.children.size(); ++x) {
      const auto& child = level.children[x];
      EXPECT_EQ(child.spec.c0(), level.radius);
      std::vector<std::size_t> expect;
      for (std::size_t y = 0; y < ds.points.size(); ++y) {
        if (lp_distance(ds.points.row(y), ds.points.row(x), ds.points.norm()) <= level.radius) expect.push_back(y);
      }
      ASSERT_EQ(child.members, expect);
      for (std::size_t m : child.members) {
        ASSERT_LE(lp_distance(ds.points.row(m), child.spec.z(), ds.points.norm()), child.spec.c0());
      }
    }
  }
}

TEST(RecursiveAnn, CScheduleDecreasesAboveFixpoint) {
  const PointSet v = flat_cloud(300, 1);
  AnnConfig cfg;
  auto s = build_recursive_ann(v, cfg, RandomSeed{2});
  const auto c = s->c_schedule();
  ASSERT_GE(c.size(), 2u);
  ASSERT_GT(c[0], 8.0);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LT(c[i], c[i - 1]);
  cfg.base = AnnBaseStrategy::exact_oracle;
  auto e = build_recursive_ann(v, cfg, RandomSeed{2});
  const auto ce = e->c_schedule();
  for (std::size_t i = 1; i < ce.size(); ++i) EXPECT_LE(ce[i], ce[i - 1]);
}

TEST(RecursiveAnn, SpaceProxy) {
  const Dataset ds = planted(500, 8, 4, 6);
  AnnConfig cfg;
  auto s = build_recursive_ann(ds.points, cfg, RandomSeed{4});
  std::size_t max_reps = 1;
  for (const auto& level : s->levels()) max_reps = std::max<std::size_t>(max_reps, level.reps);
  const std::size_t n = ds.points.size();
  const std::size_t levels = s->levels().size();
  EXPECT_GE(s->stored_points(), n * (levels + 1));
  EXPECT_LE(s->stored_points(), n + levels * max_reps * n * n);
  std::size_t manual = n;
  for (const auto& level : s->levels())
    for (const auto& child : level.children) manual += child.members.size() * child.reps.size();
  EXPECT_EQ(s->stored_points(), manual);
}

TEST(RecursiveAnn, NestedChildrenForPEight) {
  const Dataset ds = planted(80, 4, 8, 7);
  AnnConfig cfg;
  cfg.p = 8;
  cfg.inner_k = 1;
  auto s = build_recursive_ann(ds.points, cfg, RandomSeed{5});
  ASSERT_EQ(s->levels().size(), 1u);
  EXPECT_EQ(s->levels()[0].t, 4.0);
  EXPECT_EQ(s->levels()[0].reps, static_cast<int>(std::ceil(std::log2(3.0 * 3.0))));
  const auto* child = dynamic_cast<const RecursiveAnnStructure*>(s->levels()[0].children[0].reps[0].get());
  ASSERT_NE(child, nullptr);
  EXPECT_EQ(child->config().p, 4.0);
  for (std::size_t j = 0; j < ds.planted->queries.size(); ++j) {
    const QueryOutcome o = ann_query(*s, ds.planted->queries.row(j), RandomSeed{j});
    EXPECT_LE(o.distance, o.trace.front().distance);
  }
}

TEST(RecursiveAnn, RadiusSkipIsFlagged) {
  const Dataset ds = planted(100, 4, 4, 8);
  AnnConfig cfg;
  auto s = build_recursive_ann(ds.points, cfg, RandomSeed{6});
  std::vector<double> far(4, 1e6);
  const QueryOutcome o = ann_query(*s, far, RandomSeed{1});
  ASSERT_EQ(o.trace.size(), s->levels().size() + 1);
  for (std::size_t i = 1; i < o.trace.size(); ++i) EXPECT_EQ(o.trace[i].note, "radius-skip");
  EXPECT_FALSE(o.success);
}

TEST(RecursiveAnn, RejectsBadExponent) {
  const PointSet v = generate_dataset(DatasetKind::gaussian, 10, 3, NormExponent(2), RandomSeed{1}).points;
  AnnConfig cfg;
  cfg.p = 2;
  EXPECT_THROW(build_recursive_ann(v, cfg, RandomSeed{1}), DomainError);
  cfg.p = 4;
  EXPECT_THROW(build_recursive_ann(v, cfg, RandomSeed{1}), DomainError);
}

TEST(RecursiveAnn, DumpLoadRoundTripAndDeterminism) {
  const Dataset ds = planted(80, 4, 8, 9, 20);
  AnnConfig cfg;
  cfg.p = 8;
  cfg.inner_k = 1;
  cfg.reps_outer = 2;
  auto s = build_recursive_ann(ds.points, cfg, RandomSeed{7});
  auto t = build_recursive_ann(ds.points, cfg, RandomSeed{7});
  const AnnDump a = s->dump();
  const AnnDump b = t->dump();
  EXPECT_EQ(a.manifest, b.manifest);
  const auto dir_a = temp_dir("dump_a");
  const auto dir_b = temp_dir("dump_b");
  a.write(dir_a);
  b.write(dir_b);
  for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
    std::ifstream fa(entry.path()), fb(dir_b / entry.path().filename());
    std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
    EXPECT_EQ(sa, sb) << entry.path();
  }
  auto loaded = RecursiveAnnStructure::load(AnnDump::read(dir_a));
  EXPECT_EQ(loaded->c_schedule(), s->c_schedule());
  EXPECT_EQ(loaded->stored_points(), s->stored_points());
  for (std::size_t j = 0; j < ds.planted->queries.size(); ++j) {
    const auto q = ds.planted->queries.row(j);
    const QueryOutcome x = ann_query(*s, q, RandomSeed{j});
    const QueryOutcome y = ann_query(*loaded, q, RandomSeed{j});
    EXPECT_EQ(x.id, y.id);
    EXPECT_EQ(x.distance, y.distance);
  }
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST(AnnBench, ExactZeroLevelsGivesUnitRatios) {
  const Dataset ds = planted(150, 6, 4, 10);
  AnnConfig cfg;
  cfg.base = AnnBaseStrategy::exact_oracle;
  cfg.inner_k = 0;
  auto s = build_recursive_ann(ds.points, cfg, RandomSeed{1});
  const AnnBenchReport r = ann_bench(*s, ds.planted->queries, 1.0, RandomSeed{1});
  EXPECT_EQ(r.rows.size(), ds.planted->queries.size());
  for (const auto& row : r.rows) EXPECT_EQ(row.ratio, 1.0);
  EXPECT_EQ(r.median_ratio, 1.0);
  EXPECT_EQ(r.success_rate, 1.0);
  EXPECT_EQ(r.never_worse_violations, 0u);
  const std::string csv = r.to_csv(false);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "query_id,true_dist,got_dist,ratio,success_at_theory,micros_query");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(r.rows.size() + 1));
  EXPECT_EQ(r.summary()["queries"], r.rows.size());
}
