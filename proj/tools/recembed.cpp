// recembed: dataset generation, decomposition and ANN experiments, embedding
// certificates and exponent tables. Exit codes: 0 ok, 1 domain error, 2 usage.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "recembed/ann.hpp"
#include "recembed/beta.hpp"
#include "recembed/dataset.hpp"
#include "recembed/error.hpp"
#include "recembed/l2embed.hpp"
#include "recembed/lipschitz.hpp"
#include "recembed/point_io.hpp"
#include "recembed/reductions.hpp"

using namespace recembed;
using nlohmann::json;

namespace {

constexpr const char* kTool = "recembed";

// Result CSVs start with one comment line carrying the full run config.
std::string config_line(const json& config) { return "# " + config.dump() + "\n"; }

// "median", "qX" (pairwise-distance quantile X in [0,1]) or an absolute value.
double resolve_delta(const std::string& text, const PointSet& s) {
  if (text == "median") {
    if (s.size() < 2) throw DomainError("--delta median needs at least two points");
    return median_pairwise_distance(s);
  }
  if (!text.empty() && text[0] == 'q') {
    if (s.size() < 2) throw DomainError("--delta quantile needs at least two points");
    return pairwise_distance_quantile(s, std::stod(text.substr(1)));
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--delta", "expected median, qX or a number, got '" + text + "'");
  }
  if (used != text.size()) {
    throw CLI::ValidationError("--delta", "expected median, qX or a number, got '" + text + "'");
  }
  if (!(v > 0.0)) throw DomainError("delta must be positive");
  return v;
}

// Applies the Holder reduction when the exponent is too large for the recursion.
PointSet prepare_for_recursion(const PointSet& s, json& notes) {
  if (holder_applies(s)) {
    HolderResult h = holder_map(s);
    notes["holder"] = {{"from", s.norm().to_string()}, {"to", h.points.norm().to_string()}};
    return std::move(h.points);
  }
  return s;
}

struct PlanFlags {
  std::string sampler = "recursive";
  std::string base = "l2-ballcarve";
  std::string level_base = "ckr";
  std::string intermediate = "fixpoint";
  int inner_k = 0;
  double c = 1.0;
  double c0 = 1.0;
  bool no_abort = false;
  double refine_constant = kRefineConstant;

  void add(CLI::App* cmd) {
    cmd->add_option("--sampler", sampler, "recursive, ckr, l2-grid or l2-ballcarve")
        ->check(CLI::IsMember({"recursive", "ckr", "l2-grid", "l2-ballcarve"}))
        ->capture_default_str();
    cmd->add_option("--base", base, "l_2 floor of the recursion")
        ->check(CLI::IsMember({"l2-grid", "l2-ballcarve"}))
        ->capture_default_str();
    cmd->add_option("--level-base", level_base, "sampler starting every l_p level")
        ->check(CLI::IsMember({"ckr", "l2-grid", "l2-ballcarve"}))
        ->capture_default_str();
    cmd->add_option("--intermediate", intermediate, "intermediate beta* source")
        ->check(CLI::IsMember({"fixpoint", "calibrated"}))
        ->capture_default_str();
    cmd->add_option("--inner-k", inner_k, "refinements per level (0: default formula)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--beta-c", c, "constant in the l_2 beta* estimate")->capture_default_str();
    cmd->add_option("--beta-c0", c0, "constant in the base beta0 estimate")->capture_default_str();
    cmd->add_flag("--no-abort", no_abort, "never abort a level early");
    cmd->add_option("--refine-constant", refine_constant,
                    "leading constant of the refinement bound")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  json to_json() const {
    return {{"sampler", sampler}, {"base", base},   {"level_base", level_base},
            {"intermediate", intermediate}, {"inner_k", inner_k}, {"beta_c", c},
            {"beta_c0", c0},        {"abort_on_worse", !no_abort},
            {"refine_constant", refine_constant}};
  }
};

// A sampler bound to its (possibly Holder-reduced) point set.
struct BoundSampler {
  PointSet points;
  std::optional<LipschitzSampler> recursive;
  SamplerPtr plain;
  json notes = json::object();

  Partition draw(double delta, RandomSeed seed) const {
    return recursive ? recursive->draw(delta, seed) : plain->draw(points, delta, seed);
  }
};

BoundSampler make_sampler(const PointSet& input, const PlanFlags& flags, RandomSeed seed) {
  BoundSampler out{input, std::nullopt, nullptr};
  if (flags.sampler == "ckr") {
    out.plain = std::make_shared<CkrSampler>(1.0);
    return out;
  }
  if (flags.sampler != "recursive") {
    out.plain = std::make_shared<L2BaseSampler>(
        parse_l2_strategy(flags.sampler == "l2-grid" ? "grid" : "ballcarve"), 1.0);
    return out;
  }
  out.points = prepare_for_recursion(input, out.notes);
  BetaEstimates est = BetaEstimates::defaults(out.points.size(), out.points.dim(), flags.c, flags.c0);
  if (flags.intermediate == "calibrated") est.intermediate = BetaEstimates::Intermediate::calibrated;
  DecompositionPlan plan = DecompositionPlan::for_exponent(out.points.norm().value(), est);
  if (flags.inner_k > 0) plan.inner_k = flags.inner_k;
  plan.base = parse_base_kind(flags.base);
  plan.level_base = parse_base_kind(flags.level_base);
  plan.abort_on_worse = !flags.no_abort;
  plan.refine_constant = flags.refine_constant;
  out.recursive.emplace(build_decomposer(out.points, plan, est, derive_seed(seed, 99)));
  out.notes["decomposer"] = out.recursive->describe();
  return out;
}

// ---------------------------------------------------------------------------

int run_gen(const std::string& kind, std::size_t n, std::size_t d, const std::string& p,
            std::uint64_t seed, const PlantedOptions& planted, const std::string& out,
            const std::string& queries_out) {
  const DatasetKind k = parse_dataset_kind(kind);
  const Dataset ds = generate_dataset(k, n, d, NormExponent::parse(p), RandomSeed{seed}, planted);
  json config = {{"tool", kTool}, {"command", "gen"}, {"kind", kind}, {"n", n},
                 {"d", d},        {"p", p},           {"seed", seed}};
  if (k == DatasetKind::planted_clusters) {
    config["planted"] = {{"queries", planted.queries},
                         {"radius", planted.radius},
                         {"points_per_cluster", planted.points_per_cluster},
                         {"center_spread", planted.center_spread},
                         {"member_sigma", planted.member_sigma}};
  }
  write_point_set(out, ds.points, {{"config", config}});
  if (ds.planted && !queries_out.empty()) {
    json qconfig = config;
    qconfig["role"] = "planted-queries";
    qconfig["anchor_ids"] = ds.planted->anchor_ids;
    write_point_set(queries_out, ds.planted->queries, {{"config", qconfig}});
  }
  std::cout << "wrote " << out << " (" << ds.points.size() << " x " << ds.points.dim() << ")\n";
  return 0;
}

int run_decompose(const std::string& in, const std::string& delta_arg, std::uint64_t seed,
                  const PlanFlags& flags, const std::string& out) {
  const PointSet input = read_point_set(in);
  const BoundSampler sampler = make_sampler(input, flags, RandomSeed{seed});
  const double delta = resolve_delta(delta_arg, sampler.points);
  const Partition part = sampler.draw(delta, RandomSeed{seed});
  audit_partition(sampler.points, part);
  json config = {{"tool", kTool}, {"command", "decompose"}, {"in", in},
                 {"delta", delta_arg}, {"seed", seed}, {"plan", flags.to_json()}};
  json doc = {{"config", config},
              {"notes", sampler.notes},
              {"delta_value", delta},
              {"clusters", part.cluster_count()},
              {"max_cluster_diameter", max_cluster_diameter(sampler.points, part)},
              {"partition", part.to_json()}};
  write_file_atomic(out, doc.dump(1) + "\n");
  std::cout << "clusters " << part.cluster_count() << " at delta " << format_sig9(delta) << "\n";
  return 0;
}

int run_estimate_beta(const std::string& in, const std::string& delta_arg, std::size_t draws,
                      std::size_t pairs, std::uint64_t seed, const PlanFlags& flags,
                      const std::string& out, const std::string& series_out) {
  const PointSet input = read_point_set(in);
  const BoundSampler sampler = make_sampler(input, flags, RandomSeed{seed});
  const double delta = resolve_delta(delta_arg, sampler.points);
  BetaOptions options;
  options.with_series = !series_out.empty();
  const BetaReport report =
      sampler.recursive
          ? estimate_beta(*sampler.recursive, delta, draws, pairs, RandomSeed{seed}, options)
          : estimate_beta(*sampler.plain, sampler.points, delta, draws, pairs, RandomSeed{seed},
                          options);
  json config = {{"tool", kTool}, {"command", "estimate-beta"}, {"in", in},
                 {"delta", delta_arg}, {"draws", draws}, {"pairs", pairs},
                 {"seed", seed}, {"plan", flags.to_json()}};
  const std::string header = config_line(config);
  write_file_atomic(out, header + beta_csv_header() + "\n" + beta_csv_row(report) + "\n");
  if (!series_out.empty()) write_file_atomic(series_out, header + beta_series_csv(report));
  std::cout << "beta_hat " << format_sig9(report.beta_hat) << " over " << report.pairs_tested
            << " pairs\n";
  return 0;
}

AnnConfig ann_config_from(double p, double r, const std::string& base, const std::string& floor,
                          const std::string& schedule, double eps, int inner_k, int reps_inner,
                          int reps_outer) {
  AnnConfig cfg;
  cfg.p = p;
  cfg.r = r;
  cfg.base = parse_ann_base(base);
  cfg.floor = parse_ann_base(floor);
  cfg.t_schedule = parse_t_schedule(schedule);
  cfg.epsilon = eps;
  if (inner_k >= 0) cfg.inner_k = inner_k;
  if (reps_inner > 0) cfg.reps_inner = reps_inner;
  if (reps_outer > 0) cfg.reps_outer = reps_outer;
  cfg.validate();
  return cfg;
}

struct AnnFlags {
  double r = 1.0;
  std::string base = "crude-grid";
  std::string floor = "exact-oracle";
  std::string schedule = "halving";
  double eps = 0.5;
  int inner_k = -1;
  int reps_inner = 0;
  int reps_outer = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--r", r, "near-neighbor radius")->capture_default_str();
    cmd->add_option("--base", base)->check(CLI::IsMember({"crude-grid", "exact-oracle"}))
        ->capture_default_str();
    cmd->add_option("--floor", floor)->check(CLI::IsMember({"crude-grid", "exact-oracle"}))
        ->capture_default_str();
    cmd->add_option("--t-schedule", schedule)->check(CLI::IsMember({"halving", "geometric"}))
        ->capture_default_str();
    cmd->add_option("--epsilon", eps, "geometric schedule step")->capture_default_str();
    cmd->add_option("--inner-k", inner_k, "levels (default: formula)");
    cmd->add_option("--reps-inner", reps_inner, "repetitions per l_2 child (default: formula)");
    cmd->add_option("--reps-outer", reps_outer, "repetitions per recursive child (default: formula)");
  }

  AnnConfig config(double p) const {
    return ann_config_from(p, r, base, floor, schedule, eps, inner_k, reps_inner, reps_outer);
  }
};

int run_ann_build(const std::string& in, std::uint64_t seed, const AnnFlags& flags,
                  const std::string& out) {
  json notes = json::object();
  const PointSet v = prepare_for_recursion(read_point_set(in), notes);
  const AnnConfig cfg = flags.config(v.norm().value());
  const auto structure = build_recursive_ann(v, cfg, RandomSeed{seed});
  AnnDump dump = structure->dump();
  dump.manifest["config"] = {{"tool", kTool}, {"command", "ann-build"}, {"in", in},
                             {"seed", seed}, {"ann", cfg.to_json()}, {"notes", notes}};
  dump.manifest["stored_points"] = structure->stored_points();
  dump.write(out);
  std::cout << "levels " << structure->levels().size() << ", advertised c "
            << format_sig9(structure->advertised_c()) << ", stored points "
            << structure->stored_points() << "\n";
  return 0;
}

int run_ann_query(const std::string& index, const std::string& queries_path,
                  const std::string& point, std::uint64_t seed, const std::string& out) {
  const AnnDump dump = AnnDump::read(index);
  const auto structure = RecursiveAnnStructure::load(dump);
  std::vector<double> coords;
  std::optional<PointSet> queries;
  if (!queries_path.empty()) {
    queries = read_point_set(queries_path);
  } else {
    std::stringstream ss(point);
    std::string field;
    while (std::getline(ss, field, ',')) coords.push_back(std::stod(field));
    queries = PointSet(coords, coords.size(), structure->points().norm());
  }
  json config = {{"tool", kTool}, {"command", "ann-query"}, {"index", index},
                 {"queries", queries_path}, {"point", point}, {"seed", seed}};
  std::string csv = config_line(config) + "query_id,id,distance,threshold,success,trace\n";
  for (std::size_t j = 0; j < queries->size(); ++j) {
    const QueryOutcome o = structure->query_outcome(queries->row(j), derive_seed(RandomSeed{seed}, j));
    std::string trace;
    for (const auto& step : o.trace) {
      if (!trace.empty()) trace += ";";
      trace += std::to_string(step.level) + ":" + step.note + ":" + std::to_string(step.id);
    }
    csv += std::to_string(queries->id(j)) + "," + std::to_string(o.id) + "," +
           format_sig9(o.distance) + "," + format_sig9(o.threshold) + "," +
           (o.success ? "1" : "0") + "," + trace + "\n";
  }
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_file_atomic(out, csv);
  }
  return 0;
}

int run_ann_bench(const std::string& in, const std::string& queries_path, std::size_t n,
                  std::size_t d, const std::string& p, std::size_t query_count,
                  std::uint64_t seed, const AnnFlags& flags, bool no_timing,
                  double require_success, const std::string& out, const std::string& summary_out) {
  json notes = json::object();
  PointSet v = PointSet({0.0}, 1, NormExponent(2.0));
  std::optional<PointSet> queries;
  if (!in.empty()) {
    if (queries_path.empty()) throw CLI::ValidationError("--queries-in", "needed with --in");
    v = read_point_set(in);
    queries = read_point_set(queries_path);
  } else {
    PlantedOptions planted;
    planted.queries = query_count;
    planted.radius = flags.r;
    Dataset ds = generate_dataset(DatasetKind::planted_clusters, n, d, NormExponent::parse(p),
                                  RandomSeed{seed}, planted);
    v = std::move(ds.points);
    queries = std::move(ds.planted->queries);
  }
  if (holder_applies(v)) {
    v = prepare_for_recursion(v, notes);
    queries = queries->with_norm(v.norm());
  }
  const AnnConfig cfg = flags.config(v.norm().value());
  const auto structure = build_recursive_ann(v, cfg, RandomSeed{seed});
  const AnnBenchReport report = ann_bench(*structure, *queries, flags.r, RandomSeed{seed});

  // The crude base alone on the same queries, for the paired comparison.
  std::vector<double> base_ratios;
  for (const auto& row : report.rows) {
    base_ratios.push_back(row.true_dist > 0 ? row.base_dist / row.true_dist : 1.0);
  }
  std::sort(base_ratios.begin(), base_ratios.end());
  const std::size_t m = base_ratios.size();
  const double base_median =
      m == 0 ? 1.0 : (m % 2 ? base_ratios[m / 2] : 0.5 * (base_ratios[m / 2 - 1] + base_ratios[m / 2]));

  json config = {{"tool", kTool}, {"command", "ann-bench"}, {"in", in},
                 {"queries_in", queries_path}, {"n", n}, {"d", d}, {"p", p},
                 {"queries", query_count}, {"seed", seed}, {"ann", cfg.to_json()},
                 {"timing", !no_timing}, {"notes", notes}};
  json summary = report.summary();
  summary["base_median_ratio"] = base_median;
  summary["c_schedule"] = structure->c_schedule();
  summary["stored_points"] = structure->stored_points();
  if (!out.empty()) write_file_atomic(out, config_line(config) + report.to_csv(!no_timing));
  if (!summary_out.empty()) {
    write_file_atomic(summary_out, json{{"config", config}, {"summary", summary}}.dump(1) + "\n");
  }
  std::cout << "success_rate " << format_sig9(report.success_rate) << " at threshold "
            << format_sig9(report.theory_threshold) << ", median_ratio "
            << format_sig9(report.median_ratio) << " (base " << format_sig9(base_median)
            << "), never_worse_violations " << report.never_worse_violations << "\n";
  if (report.never_worse_violations > 0) throw DomainError("never-worse property violated");
  if (report.success_rate < require_success) {
    throw DomainError("success rate " + format_sig9(report.success_rate) + " below required " +
                      format_sig9(require_success));
  }
  return 0;
}

// Gaussian linear map R^d -> R^d scaled by 1/sqrt(d); used as g when q = 2.
GlobalMap gaussian_map(std::size_t dim, RandomSeed seed) {
  Rng rng = make_rng(seed);
  std::vector<double> g(dim * dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (double& x : g) x = standard_normal(rng) * scale;
  return [g, dim](std::span<const double> x) -> std::optional<std::vector<double>> {
    if (x.size() != dim) return std::nullopt;
    std::vector<double> y(dim, 0.0);
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t j = 0; j < dim; ++j) y[r] += g[r * dim + j] * x[j];
    }
    return y;
  };
}

int run_embed_verify(const std::string& in, std::optional<double> K_arg, double kappa,
                     const std::string& delta_arg, double q, std::optional<double> c_arg,
                     bool compose, std::uint64_t seed, bool seed_given, const std::string& out) {
  const PointSet input = read_point_set(in);
  const double K = K_arg ? *K_arg : kappa_scale(kappa, input.size());
  if (input.norm().is_infinite()) throw DomainError("embed-verify needs a finite exponent");
  const double c = c_arg ? *c_arg : localized_distortion_constant(input.norm().value(), q);
  const double delta = resolve_delta(delta_arg, input);
  const double p = input.norm().value();
  // Restrict to the ball of radius K delta / 2 around the smallest-id point
  // so the subset diameter is at most K delta.
  std::size_t center = 0;
  for (std::size_t i = 1; i < input.size(); ++i) {
    if (input.id(i) < input.id(center)) center = i;
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (lp_distance(input.row(i), input.row(center), input.norm()) <= K * delta / 2.0) rows.push_back(i);
  }
  const PointSet subset = input.subset(rows);
  const LocalizedMap f = localized_map(subset, K, delta, q);
  const double D = c * std::pow(K, p / q - 1.0);
  json config = {{"tool", kTool}, {"command", "embed-verify"}, {"in", in}, {"K", K},
                 {"delta", delta_arg}, {"q", q}, {"c", c}, {"compose", compose}};
  if (!K_arg) config["kappa"] = kappa;
  if (seed_given) config["seed"] = seed;
  json doc = {{"config", config}, {"delta_value", delta}, {"subset_size", subset.size()},
              {"D", D}, {"mazur", f.spec.to_json()}};
  auto cert_json = [](const EmbeddingCertificate& e) {
    return json{{"lip_hat", e.lip_hat},         {"min_sep_image", e.min_sep_image},
                {"achieved_D", e.achieved_D},   {"D", e.D},
                {"separated_pairs", e.separated_pairs}, {"vacuous", e.vacuous},
                {"pass", e.pass},               {"reason", e.reason}};
  };
  bool ok = true;
  if (subset.size() < 2) throw DomainError("the K delta / 2 ball holds fewer than two points");
  const EmbeddingCertificate cert = verify_localized(subset, f.images, delta, D);
  doc["certificate"] = cert_json(cert);
  ok = cert.pass;
  if (compose) {
    GlobalMap g;
    json g_desc;
    if (q > 2.0) {
      const MazurSpec spec = whole_set_mazur(f.images, 2.0);
      g = as_global_map(spec);
      g_desc = {{"kind", "mazur"}, {"map", spec.to_json()}};
    } else {
      if (!seed_given) throw CLI::ValidationError("--seed", "required for the gaussian map (q = 2)");
      g = gaussian_map(subset.dim(), RandomSeed{seed});
      g_desc = {{"kind", "gaussian"}};
    }
    const Composition comp = compose_localized(f, g, NormExponent(2.0), D);
    const double bound = comp.inner.achieved_D * comp.g_distortion * (1.0 + 1e-9);
    doc["composition"] = {{"g", g_desc},
                          {"g_distortion", comp.g_distortion},
                          {"certificate", cert_json(comp.composed)},
                          {"bound", bound},
                          {"bound_holds", comp.composed.achieved_D <= bound}};
    ok = ok && comp.composed.achieved_D <= bound;
  }
  write_file_atomic(out, doc.dump(1) + "\n");
  std::cout << "achieved_D " << format_sig9(cert.achieved_D) << " vs D " << format_sig9(D)
            << (cert.pass ? " pass" : " FAIL") << "\n";
  if (!ok) throw DomainError("certificate failed: " + cert.reason);
  return 0;
}

int run_exponent_table(double p_min, double p_max, std::size_t steps, int k, double eps,
                       const std::string& out) {
  const auto grid = linspace(p_min, p_max, steps);
  const auto rows = exponent_table(grid, k, eps);
  json config = {{"tool", kTool}, {"command", "exponent-table"}, {"p_min", p_min},
                 {"p_max", p_max}, {"steps", steps}, {"k", k}, {"eps", eps}};
  write_file_atomic(out, config_line(config) + exponent_csv(rows));
  std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lipschitz decompositions, recursive ANN and embedding certificates for l_p"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string in, out, delta = "median", p = "2", kind = "uniform-cube", queries_out;
  std::size_t n = 0, d = 0;

  // gen
  PlantedOptions planted;
  auto* gen = app.add_subcommand("gen", "generate a point set");
  gen->add_option("--kind", kind)->check(CLI::IsMember({"uniform-cube", "gaussian",
                                                         "hypercube-corners", "planted-clusters"}))
      ->capture_default_str();
  gen->add_option("--n", n)->required();
  gen->add_option("--d", d)->required();
  gen->add_option("--p", p, "norm exponent or inf")->capture_default_str();
  gen->add_option("--seed", seed)->required();
  gen->add_option("--out", out)->required();
  gen->add_option("--queries-out", queries_out, "planted query set (planted-clusters)");
  gen->add_option("--queries", planted.queries)->capture_default_str();
  gen->add_option("--radius", planted.radius)->capture_default_str();
  gen->add_option("--points-per-cluster", planted.points_per_cluster)->capture_default_str();

  // decompose
  PlanFlags dflags;
  auto* dec = app.add_subcommand("decompose", "draw one partition");
  dec->add_option("--in", in)->required();
  dec->add_option("--delta", delta, "median, qX or a value")->capture_default_str();
  dec->add_option("--seed", seed)->required();
  dec->add_option("--out", out)->required();
  dflags.add(dec);

  // estimate-beta
  PlanFlags bflags;
  std::size_t draws = 200, pairs = 1u << 20;
  std::string series_out;
  auto* est = app.add_subcommand("estimate-beta", "Monte-Carlo separation estimate");
  est->add_option("--in", in)->required();
  est->add_option("--delta", delta, "median, qX or a value")->capture_default_str();
  est->add_option("--draws", draws)->check(CLI::PositiveNumber)->capture_default_str();
  est->add_option("--pairs", pairs, "pair budget")->check(CLI::PositiveNumber)->capture_default_str();
  est->add_option("--seed", seed)->required();
  est->add_option("--out", out)->required();
  est->add_option("--series-out", series_out, "beta_hat per refinement stage");
  bflags.add(est);

  // ann-build
  AnnFlags abuild;
  auto* ab = app.add_subcommand("ann-build", "build and dump a recursive ANN structure");
  ab->add_option("--in", in)->required();
  ab->add_option("--seed", seed)->required();
  ab->add_option("--out", out, "output directory")->required();
  abuild.add(ab);

  // ann-query
  std::string index, queries_in, point;
  auto* aq = app.add_subcommand("ann-query", "query a dumped structure");
  aq->add_option("--index", index)->required();
  auto* qopt = aq->add_option("--queries", queries_in, "query point-set CSV");
  auto* popt = aq->add_option("--point", point, "comma-separated coordinates");
  qopt->excludes(popt);
  aq->add_option("--seed", seed)->required();
  aq->add_option("--out", out, "CSV path (default stdout)");

  // ann-bench
  AnnFlags abench;
  std::size_t bench_queries = 200;
  bool no_timing = false;
  double require_success = 0.0;
  std::string summary_out;
  std::string bench_p = "4";
  auto* bench = app.add_subcommand("ann-bench", "oracle-checked ANN benchmark");
  bench->add_option("--in", in, "dataset (else a planted instance is generated)");
  bench->add_option("--queries-in", queries_in, "query set for --in");
  bench->add_option("--n", n, "planted dataset size")->capture_default_str();
  bench->add_option("--d", d, "planted dimension")->capture_default_str();
  bench->add_option("--p", bench_p)->capture_default_str();
  bench->add_option("--queries", bench_queries)->capture_default_str();
  bench->add_option("--seed", seed)->required();
  bench->add_option("--out", out, "per-query CSV");
  bench->add_option("--summary-out", summary_out, "summary JSON");
  bench->add_flag("--no-timing", no_timing, "write 0 in the timing column");
  bench->add_option("--require-success", require_success, "exit 1 below this success rate");
  abench.add(bench);

  // embed-verify
  double K = 8.0, kappa = 2.0, q = 2.0, c = 0.0;
  bool compose = false;
  auto* ev = app.add_subcommand("embed-verify", "certify a localized Mazur map");
  ev->add_option("--in", in)->required();
  auto* k_opt = ev->add_option("--K", K, "scale ratio (default: kappa ln n)");
  ev->add_option("--kappa", kappa, "sets K = kappa ln n when --K is absent")->capture_default_str();
  ev->add_option("--delta", delta, "median, qX or a value")->capture_default_str();
  ev->add_option("--q", q)->capture_default_str();
  auto* c_opt = ev->add_option("--c", c, "D = c K^(p/q-1); default the provable constant");
  ev->add_flag("--compose", compose, "also certify g o f for a global map g into l_2");
  auto* ev_seed = ev->add_option("--seed", seed, "needed for the gaussian g when q = 2");
  ev->add_option("--out", out)->required();

  // exponent-table
  double p_min = 3.05, p_max = 4.9, eps = 0.0;
  std::size_t steps = 100;
  int k = 50;
  auto* et = app.add_subcommand("exponent-table", "exponent comparison table");
  et->add_option("--p-min", p_min)->capture_default_str();
  et->add_option("--p-max", p_max)->capture_default_str();
  et->add_option("--steps", steps)->check(CLI::PositiveNumber)->capture_default_str();
  et->add_option("--k", k)->check(CLI::PositiveNumber)->capture_default_str();
  et->add_option("--eps", eps, "required margin below the comparator")->capture_default_str();
  et->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return run_gen(kind, n, d, p, seed, planted, out, queries_out);
    if (dec->parsed()) return run_decompose(in, delta, seed, dflags, out);
    if (est->parsed()) return run_estimate_beta(in, delta, draws, pairs, seed, bflags, out, series_out);
    if (ab->parsed()) return run_ann_build(in, seed, abuild, out);
    if (aq->parsed()) {
      if (queries_in.empty() && point.empty()) {
        throw CLI::ValidationError("ann-query", "one of --queries or --point is required");
      }
      return run_ann_query(index, queries_in, point, seed, out);
    }
    if (bench->parsed()) {
      if (in.empty() && (n == 0 || d == 0)) {
        throw CLI::ValidationError("ann-bench", "give --in/--queries-in or --n and --d");
      }
      return run_ann_bench(in, queries_in, n, d, bench_p, bench_queries, seed, abench, no_timing,
                           require_success, out, summary_out);
    }
    if (ev->parsed()) {
      const auto K_arg = k_opt->count() ? std::optional<double>(K) : std::nullopt;
      const auto c_arg = c_opt->count() ? std::optional<double>(c) : std::nullopt;
      return run_embed_verify(in, K_arg, kappa, delta, q, c_arg, compose, seed,
                              ev_seed->count() > 0, out);
    }
    if (et->parsed()) return run_exponent_table(p_min, p_max, steps, k, eps, out);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
