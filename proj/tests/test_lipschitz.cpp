#include <gtest/gtest.h>

#include <cmath>

#include "recembed/beta.hpp"
#include "recembed/dataset.hpp"
#include "recembed/error.hpp"
#include "recembed/lipschitz.hpp"

using namespace recembed;

namespace {

PointSet uniform(std::size_t n, std::size_t d, double p, std::uint64_t seed) {
  return generate_dataset(DatasetKind::uniform_cube, n, d, NormExponent(p), RandomSeed{seed}).points;
}

}  // namespace

TEST(Ckr, DiameterAndDeterminism) {
  const PointSet s = uniform(200, 4, 3, 1);
  for (double delta : {0.1, 0.4, 1.0}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Partition a = ckr_partition(s, delta, RandomSeed{seed});
      EXPECT_NO_THROW(audit_partition(s, a));
      EXPECT_EQ(a.labels, ckr_partition(s, delta, RandomSeed{seed}).labels);
    }
  }
  EXPECT_THROW(ckr_partition(s, 0.0, RandomSeed{1}), DomainError);
  EXPECT_THROW(ckr_partition(s, -1.0, RandomSeed{1}), DomainError);
}

TEST(Ckr, TightSetIsOneCluster) {
  PointSet s({0, 0, 0.01, 0, 0, 0.02, 0.01, 0.01}, 2, NormExponent(2));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(ckr_partition(s, 1.0, RandomSeed{seed}).cluster_count(), 1u);
  }
}

TEST(Ckr, FarPairAlwaysSeparated) {
  PointSet s({0, 0, 3, 0}, 2, NormExponent(2));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(ckr_partition(s, 1.0, RandomSeed{seed}).cluster_count(), 2u);
  }
}

TEST(Ckr, DuplicatesShareACluster) {
  PointSet s({0, 0, 0, 0, 5, 5, 5, 5, 2, 2}, 2, NormExponent(2));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Partition part = ckr_partition(s, 1.0, RandomSeed{seed});
    EXPECT_EQ(part.labels[0], part.labels[1]);
    EXPECT_EQ(part.labels[2], part.labels[3]);
  }
}

TEST(Ckr, BetaWithinLogBound) {
  const PointSet s = uniform(64, 8, 2, 3);
  const double delta = median_pairwise_distance(s);
  const BetaReport r = estimate_beta(CkrSampler(1.0), s, delta, 200, 10000, RandomSeed{5});
  EXPECT_LE(r.beta_hat, 8.0 * (std::log(64.0) + 1.0));
  EXPECT_GT(r.beta_hat, 0.0);
}

TEST(L2Base, RequiresL2AndPositiveDelta) {
  const PointSet s = uniform(10, 2, 4, 1);
  EXPECT_THROW(l2_base_partition(s, 1.0, L2Strategy::grid, RandomSeed{1}), DomainError);
  EXPECT_THROW(l2_base_partition(s.with_norm(NormExponent(2)), 0.0, L2Strategy::grid, RandomSeed{1}),
               DomainError);
  EXPECT_THROW(parse_l2_strategy("hex"), DomainError);
}

TEST(L2Base, DiameterBothStrategies) {
  const PointSet s = uniform(300, 6, 2, 2);
  for (auto strategy : {L2Strategy::grid, L2Strategy::ballcarve}) {
    for (double delta : {0.2, 0.6, 1.5}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        EXPECT_NO_THROW(audit_partition(s, l2_base_partition(s, delta, strategy, RandomSeed{seed})));
      }
    }
  }
}

TEST(L2Base, JlProjectionWithRepairKeepsDiameter) {
  const PointSet s = generate_dataset(DatasetKind::gaussian, 200, 64, NormExponent(2), RandomSeed{4}).points;
  L2Options opt;
  opt.jl_pre_project = true;
  opt.jl_dim = 8;
  const double delta = median_pairwise_distance(s);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Partition part = l2_base_partition(s, delta, L2Strategy::ballcarve, RandomSeed{seed}, opt);
    EXPECT_NO_THROW(audit_partition(s, part));
  }
}

TEST(L2Base, SingletonNeverSeparated) {
  PointSet s({0.5, 0.5}, 2, NormExponent(2));
  const Partition part = l2_base_partition(s, 1.0, L2Strategy::grid, RandomSeed{1});
  EXPECT_EQ(part.cluster_count(), 1u);
}

TEST(L2Base, OneDimensionalGridSeparationFrequency) {
  // Far enough apart that the single-cluster shortcut does not apply.
  PointSet s({0.0, 0.6}, 1, NormExponent(2));
  L2BaseSampler grid(L2Strategy::grid, 1.0);
  const BetaReport r = estimate_beta(grid, s, 1.0, 20000, 1, RandomSeed{8});
  // beta_hat = freq * delta / s with freq close to s / delta.
  EXPECT_NEAR(r.beta_hat, 1.0, 0.05);
}

TEST(L2Base, BallcarveBeatsGridInSixteenDims) {
  const PointSet s = uniform(256, 16, 2, 6);
  const double delta = 0.75 * set_diameter(s);
  const double grid = estimate_beta(L2BaseSampler(L2Strategy::grid, 1), s, delta, 200, 40000, RandomSeed{2}).beta_hat;
  const double ball = estimate_beta(L2BaseSampler(L2Strategy::ballcarve, 1), s, delta, 200, 40000, RandomSeed{2}).beta_hat;
  EXPECT_LT(ball, grid);
}

TEST(StepParams, FrozenValuesAndIdentities) {
  const StepParams a = step_params(4, 2, 100, 10);
  EXPECT_NEAR(a.a, std::sqrt(10.0) / 2, 1e-12);
  EXPECT_NEAR(a.b, std::sqrt(10.0) / 20, 1e-12);
  EXPECT_NEAR(100 / a.a, 63.2455532, 1e-6);
  const StepParams one = step_params(4, 2, 1, 1);
  EXPECT_DOUBLE_EQ(one.a, 0.5);
  EXPECT_DOUBLE_EQ(one.b, 0.5);
  Rng rng = make_rng(RandomSeed{3});
  for (int t = 0; t < 10000; ++t) {
    const double p = uniform(rng, 2.5, 16);
    const double q = uniform(rng, 2, p - 0.1);
    const double beta = uniform(rng, 1, 1000), bs = uniform(rng, 1, 1000);
    const StepParams s = step_params(p, q, beta, bs);
    ASSERT_NEAR((beta / s.a) / (bs / s.b), 1.0, 1e-12);
    ASSERT_NEAR((p / q) * std::pow(2 * s.a, p / q - 1) * s.b, 1.0, 1e-12);
  }
  EXPECT_THROW(step_params(4, 1, 2, 2), DomainError);
  EXPECT_THROW(step_params(4, 4, 2, 2), DomainError);
  EXPECT_THROW(step_params(4, 2, 0.5, 2), DomainError);
}

TEST(Fixpoint, ClosedFormsAndIteration) {
  EXPECT_DOUBLE_EQ(predict_fixpoint(8, 4, 10), 160);
  EXPECT_DOUBLE_EQ(predict_fixpoint(4, 2, 10), 160);
  EXPECT_NEAR(predict_fixpoint(8, 2, 10), 5120, 1e-9);
  double beta = 1e6;
  for (int i = 0; i < 10000; ++i) {
    const double next = refined_beta(8, 2, beta, 10);
    if (std::abs(next - beta) < 1e-6 * beta) break;
    beta = next;
  }
  EXPECT_NEAR(beta, 5120, 1e-3 * 5120);
  EXPECT_NEAR(refined_beta(4, 2, predict_fixpoint(4, 2, 7), 7), predict_fixpoint(4, 2, 7), 1e-9);
}

TEST(Plan, ChainsAndInnerK) {
  EXPECT_EQ(DecompositionPlan::default_chain(2), (std::vector<double>{2}));
  EXPECT_EQ(DecompositionPlan::default_chain(4), (std::vector<double>{4, 2}));
  EXPECT_EQ(DecompositionPlan::default_chain(5), (std::vector<double>{5, 4, 2}));
  EXPECT_EQ(DecompositionPlan::default_chain(16), (std::vector<double>{16, 8, 4, 2}));
  EXPECT_EQ(DecompositionPlan::default_chain(3), (std::vector<double>{3, 2}));
  EXPECT_EQ(DecompositionPlan::default_inner_k(4, 64), 4);
  EXPECT_EQ(DecompositionPlan::default_inner_k(4, 1), 1);
  DecompositionPlan bad;
  bad.p_chain = {8, 2};
  EXPECT_THROW(bad.validate(), DomainError);
  bad.p_chain = {};
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Plan, DefaultEstimates) {
  const BetaEstimates e = BetaEstimates::defaults(512, 16);
  EXPECT_NEAR(e.beta_star(2), std::sqrt(std::log(512.0)), 1e-12);
  EXPECT_NEAR(e.beta0, std::log(512.0), 1e-12);
  EXPECT_THROW(e.beta_star(4), DomainError);
  const BetaEstimates tiny = BetaEstimates::defaults(2, 1);
  EXPECT_EQ(tiny.beta0, 1.0);
  EXPECT_EQ(tiny.beta_star(2), 1.0);
}

TEST(RefineOnce, RefinesOuterAndKeepsDiameter) {
  const PointSet s = uniform(300, 5, 4, 7);
  const double delta = median_pairwise_distance(s);
  CkrSampler outer(3.0);
  L2BaseSampler inner(L2Strategy::ballcarve, 2.0);
  const StepParams params = step_params(4, 2, 3.0, 2.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Partition out = refine_once(outer, inner, s, 4, 2, delta, params, RandomSeed{seed});
    ASSERT_NO_THROW(audit_partition(s, out));
    const Partition init = outer.draw(s, params.a * delta, derive_seed(RandomSeed{seed}, 0));
    EXPECT_TRUE(refines(out, init));
    bool has_mazur = false;
    for (const auto& tag : out.provenance) has_mazur |= tag.mechanism.rfind("mazur", 0) == 0;
    EXPECT_TRUE(has_mazur);
  }
}

TEST(RefineOnce, SingletonAndWrongNorm) {
  PointSet one({1, 2}, 2, NormExponent(4));
  CkrSampler outer(1.0);
  L2BaseSampler inner(L2Strategy::grid, 1.0);
  const Partition p = refine_once(outer, inner, one, 4, 2, 1.0, step_params(4, 2, 2, 1), RandomSeed{1});
  EXPECT_EQ(p.cluster_count(), 1u);
  EXPECT_THROW(refine_once(outer, inner, one.with_norm(NormExponent(3)), 4, 2, 1.0,
                           step_params(4, 2, 2, 1), RandomSeed{1}),
               DomainError);
}

TEST(RefineOnce, SeparationWithinUnionBound) {
  const PointSet s = uniform(512, 4, 4, 9);
  const double delta = median_pairwise_distance(s);
  const double beta = 4.0, beta_star = 2.0;
  auto outer = std::make_shared<CkrSampler>(beta);
  auto inner = std::make_shared<L2BaseSampler>(L2Strategy::ballcarve, beta_star);
  const StepParams params = step_params(4, 2, beta, beta_star);
  RefineSampler refine(outer, inner, 4, 2, params, refined_beta(4, 2, beta, beta_star), 0);
  // Measured outer and inner parameters stand in for beta and beta*.
  const double b_outer = estimate_beta(*outer, s, params.a * delta, 200, 4000, RandomSeed{1}).beta_hat;
  const BetaReport r = estimate_beta(refine, s, delta, 200, 4000, RandomSeed{1});
  const double union_bound = b_outer / params.a + 2.0 * beta_star / params.b;
  EXPECT_LE(r.beta_hat, union_bound * 1.2);
}

TEST(Decomposer, P2IsTheL2Base) {
  const PointSet s = uniform(50, 3, 2, 1);
  DecompositionPlan plan = DecompositionPlan::for_exponent(2, BetaEstimates::defaults(50, 3));
  const LipschitzSampler ls = build_decomposer(s, plan, BetaEstimates::defaults(50, 3));
  EXPECT_TRUE(ls.levels().empty());
  const Partition a = ls.draw(0.3, RandomSeed{4});
  const Partition b = l2_base_partition(s, 0.3, L2Strategy::ballcarve, RandomSeed{4});
  EXPECT_EQ(a.labels, b.labels);
}

TEST(Decomposer, RejectsBadInputs) {
  const PointSet s = uniform(20, 3, 1.5, 1);
  const BetaEstimates e = BetaEstimates::defaults(20, 3);
  DecompositionPlan plan;
  plan.p_chain = {2};
  EXPECT_THROW(build_decomposer(s, plan, e), DomainError);
  const PointSet t = uniform(20, 3, 4, 1);
  plan.p_chain = {8, 4, 2};
  EXPECT_THROW(build_decomposer(t, plan, e), DomainError);
}

TEST(Decomposer, LevelsAndDiameterAcrossExponents) {
  for (double p : {3.0, 4.0, 5.0, 8.0}) {
    const PointSet s = uniform(150, 4, p, 12);
    const BetaEstimates est = BetaEstimates::defaults(s.size(), s.dim());
    const DecompositionPlan plan = DecompositionPlan::for_exponent(p, est);
    const LipschitzSampler ls = build_decomposer(s, plan, est);
    EXPECT_EQ(ls.levels().size(), plan.p_chain.size() - 1);
    for (const auto& level : ls.levels()) {
      EXPECT_EQ(level.predicted_betas.size(), static_cast<std::size_t>(level.iterations) + 1);
    }
    for (double frac : {0.1, 0.5, 1.0}) {
      const double delta = frac * set_diameter(s);
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ASSERT_NO_THROW(audit_partition(s, ls.draw(delta, RandomSeed{seed})));
      }
    }
  }
}

TEST(Decomposer, AbortRuleStopsEarly) {
  const PointSet s = uniform(60, 3, 4, 2);
  BetaEstimates est = BetaEstimates::defaults(s.size(), s.dim());
  est.beta0 = 1.0;
  est.table[2.0] = 5.0;
  DecompositionPlan plan = DecompositionPlan::for_exponent(4, est);
  plan.inner_k = 3;
  const LipschitzSampler ls = build_decomposer(s, plan, est);
  ASSERT_EQ(ls.levels().size(), 1u);
  EXPECT_TRUE(ls.levels()[0].aborted);
  EXPECT_EQ(ls.levels()[0].iterations, 0);
  plan.abort_on_worse = false;
  const LipschitzSampler full = build_decomposer(s, plan, est);
  EXPECT_EQ(full.levels()[0].iterations, 3);
}

TEST(Decomposer, CalibratedEstimatesFillTable) {
  const PointSet s = uniform(80, 4, 8, 3);
  BetaEstimates est = BetaEstimates::defaults(s.size(), s.dim());
  est.intermediate = BetaEstimates::Intermediate::calibrated;
  const DecompositionPlan plan = DecompositionPlan::for_exponent(8, est);
  const LipschitzSampler ls = build_decomposer(s, plan, est, RandomSeed{1});
  EXPECT_NO_THROW(ls.estimates().beta_star(4));
  EXPECT_GE(ls.estimates().beta_star(4), 1.0);
  EXPECT_NO_THROW(audit_partition(s, ls.draw(median_pairwise_distance(s), RandomSeed{2})));
}

TEST(Partition, JsonRoundTripAndRefines) {
  const PointSet s = uniform(30, 2, 2, 1);
  const Partition p = ckr_partition(s, 0.3, RandomSeed{3});
  const Partition q = Partition::from_json(p.to_json());
  EXPECT_EQ(q.labels, p.labels);
  EXPECT_EQ(q.ids, p.ids);
  EXPECT_EQ(q.provenance, p.provenance);
  EXPECT_EQ(q.seed.value, 3u);
  EXPECT_TRUE(refines(p, single_cluster(s, 1, RandomSeed{0}, "all")));
  EXPECT_FALSE(refines(single_cluster(s, 1, RandomSeed{0}, "all"), p));
}

TEST(Partition, AuditRejectsWideClusters) {
  PointSet s({0, 0, 2, 0}, 2, NormExponent(2));
  EXPECT_THROW(audit_partition(s, single_cluster(s, 1.0, RandomSeed{0}, "bad")), DomainError);
}

TEST(Beta, TrivialCasesAndDeterminism) {
  PointSet one({1, 1}, 2, NormExponent(2));
  EXPECT_EQ(estimate_beta(CkrSampler(1), one, 1.0, 10, 10, RandomSeed{1}).beta_hat, 0.0);
  PointSet far({0, 2}, 1, NormExponent(2));
  EXPECT_DOUBLE_EQ(estimate_beta(CkrSampler(1), far, 1.0, 50, 10, RandomSeed{1}).beta_hat, 0.5);
  const PointSet s = uniform(120, 3, 3, 5);
  const BetaReport a = estimate_beta(CkrSampler(1), s, 0.4, 40, 500, RandomSeed{9});
  const BetaReport b = estimate_beta(CkrSampler(1), s, 0.4, 40, 500, RandomSeed{9});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.pairs_tested, 500u);
  EXPECT_THROW(estimate_beta(CkrSampler(1), s, 0.4, 0, 500, RandomSeed{9}), DomainError);
  EXPECT_THROW(estimate_beta(CkrSampler(1), s, 0.4, 10, 0, RandomSeed{9}), DomainError);
}

TEST(Beta, ThreadCountDoesNotChangeResult) {
  const PointSet s = uniform(100, 4, 4, 6);
  const BetaEstimates est = BetaEstimates::defaults(s.size(), s.dim());
  const LipschitzSampler ls = build_decomposer(s, DecompositionPlan::for_exponent(4, est), est);
  BetaOptions one, four;
  one.threads = 1;
  four.threads = 4;
  one.with_series = four.with_series = true;
  const BetaReport a = estimate_beta(ls, 0.5, 30, 2000, RandomSeed{3}, one);
  const BetaReport b = estimate_beta(ls, 0.5, 30, 2000, RandomSeed{3}, four);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.series.size(), ls.stages().size());
  EXPECT_EQ(a.series.back(), a.beta_hat);
}

TEST(Beta, CsvFormatting) {
  BetaReport r;
  r.delta = 0.5;
  r.draws = 3;
  r.pairs_tested = 10;
  r.beta_hat = 1.0 / 3.0;
  r.worst_pair = {4, 7};
  EXPECT_EQ(beta_csv_header(), "delta,draws,pairs,beta_hat,worst_i,worst_j");
  EXPECT_EQ(beta_csv_row(r), "0.5,3,10,0.333333333,4,7");
  r.series = {1.5, 2};
  EXPECT_EQ(beta_series_csv(r), "stage,beta_hat\n0,1.5\n1,2\n");
}

TEST(Fixpoint, RefineConstantKnob) {
  // C = 2 halves the leading factor; with q = p/2 the fixpoint moves from 16 beta* to 4 beta*.
  EXPECT_NEAR(predict_fixpoint(4, 2, 10, 2.0), 40.0, 1e-12);
  EXPECT_NEAR(predict_fixpoint(4, 2, 10), 160.0, 1e-12);
  const double f = predict_fixpoint(6, 4, 3, 2.5);
  EXPECT_NEAR(refined_beta(6, 4, f, 3, 2.5), f, 1e-9 * f);
  EXPECT_THROW(refined_beta(4, 2, 10, 10, 0.0), DomainError);

  const PointSet s = uniform(64, 4, 8, 3);
  BetaEstimates est = BetaEstimates::defaults(s.size(), s.dim());
  DecompositionPlan plan = DecompositionPlan::for_exponent(8, est);
  plan.abort_on_worse = false;
  plan.refine_constant = 2.0;
  const LipschitzSampler tight = build_decomposer(s, plan, est, RandomSeed{1});
  plan.refine_constant = kRefineConstant;
  const LipschitzSampler loose = build_decomposer(s, plan, est, RandomSeed{1});
  EXPECT_LT(tight.estimates().beta_star(4), loose.estimates().beta_star(4));
  EXPECT_EQ(tight.plan().to_json()["refine_constant"], 2.0);
  plan.refine_constant = -1;
  EXPECT_THROW(plan.validate(), DomainError);
}
