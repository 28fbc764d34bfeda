#include "recembed/lipschitz.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "recembed/beta.hpp"
#include "recembed/error.hpp"
#include "recembed/mazur.hpp"
#include "recembed/reductions.hpp"

namespace recembed {

namespace {

void require_positive_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw DomainError("delta must be positive and finite");
  }
}

// Cheap certificate that diam(s) <= delta: twice the largest distance from row 0.
bool trivially_within(const PointSet& s, double delta) {
  double far = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    far = std::max(far, lp_distance(s.row(0), s.row(i), s.norm()));
  }
  return 2.0 * far <= delta;
}

std::vector<std::size_t> random_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }
  return order;
}

bool is_power_of_two(double p) {
  const double l = std::log2(p);
  return std::abs(l - std::round(l)) < 1e-12;
}

const NormExponent kL2(2.0);

Partition grid_partition(const PointSet& s, double delta, RandomSeed seed) {
  const std::size_t d = s.dim();
  const double side = delta / std::sqrt(static_cast<double>(d));
  Rng rng = make_rng(seed);
  std::vector<double> shift(d);
  for (double& u : shift) u = uniform(rng, 0.0, side);

  std::map<std::vector<std::int64_t>, std::size_t> cell_label;
  Partition out;
  out.labels.resize(s.size());
  std::vector<std::int64_t> key(d);
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto x = s.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      key[j] = static_cast<std::int64_t>(std::floor((x[j] + shift[j]) / side));
    }
    auto [it, inserted] = cell_label.try_emplace(key, cell_label.size());
    out.labels[i] = it->second;
  }
  return out;
}

Partition ballcarve_partition(const PointSet& s, double delta, RandomSeed seed) {
  const std::size_t d = s.dim();
  Rng rng = make_rng(seed);
  const auto order = random_order(s.size(), rng);
  constexpr auto unset = static_cast<std::size_t>(-1);
  Partition out;
  out.labels.assign(s.size(), unset);
  std::vector<std::size_t> open(order.begin(), order.end());
  std::vector<double> center(d), dir(d);
  const double jitter = delta / 4.0;
  const double radius = delta / 2.0;
  std::size_t next_label = 0;
  for (std::size_t seed_row : order) {
    if (out.labels[seed_row] != unset) continue;
    double norm = 0.0;
    while (norm == 0.0) {
      for (double& v : dir) v = standard_normal(rng);
      norm = lp_norm(dir, kL2);
    }
    const double len = jitter * std::pow(uniform01(rng), 1.0 / static_cast<double>(d));
    auto x = s.row(seed_row);
    for (std::size_t j = 0; j < d; ++j) center[j] = x[j] + dir[j] / norm * len;

    std::vector<std::size_t> still_open;
    still_open.reserve(open.size());
    for (std::size_t i : open) {
      if (out.labels[i] != unset) continue;
      if (lp_distance(s.row(i), center, kL2) <= radius) {
        out.labels[i] = next_label;
      } else {
        still_open.push_back(i);
      }
    }
    // The jittered center stays within delta/4 of seed_row, so it was carved.
    ++next_label;
    open.swap(still_open);
  }
  return out;
}

Partition l2_carve(const PointSet& s, double delta, L2Strategy strategy, RandomSeed seed) {
  return strategy == L2Strategy::grid ? grid_partition(s, delta, seed)
                                      : ballcarve_partition(s, delta, seed);
}

}  // namespace

// ---------------------------------------------------------------------------

nlohmann::json PartitionSampler::describe() const {
  return {{"sampler", name()}, {"assumed_beta", assumed_beta()}};
}

L2Strategy parse_l2_strategy(std::string_view name) {
  if (name == "grid") return L2Strategy::grid;
  if (name == "ballcarve") return L2Strategy::ballcarve;
  throw DomainError("unknown l2 strategy '" + std::string(name) + "' (expected grid, ballcarve)");
}

std::string to_string(L2Strategy strategy) {
  return strategy == L2Strategy::grid ? "grid" : "ballcarve";
}

Partition ckr_partition(const PointSet& s, double delta, RandomSeed seed) {
  require_positive_delta(delta);
  if (trivially_within(s, delta)) return single_cluster(s, delta, seed, "ckr");

  Rng rng = make_rng(seed);
  const double radius = uniform(rng, delta / 4.0, delta / 2.0);
  const auto order = random_order(s.size(), rng);

  constexpr auto unset = static_cast<std::size_t>(-1);
  Partition out;
  out.labels.assign(s.size(), unset);
  std::vector<std::size_t> open(s.size());
  std::iota(open.begin(), open.end(), 0);
  std::size_t next_label = 0;
  for (std::size_t center : order) {
    if (open.empty()) break;
    bool used = false;
    std::vector<std::size_t> still_open;
    still_open.reserve(open.size());
    for (std::size_t i : open) {
      if (lp_distance(s.row(center), s.row(i), s.norm()) <= radius) {
        out.labels[i] = next_label;
        used = true;
      } else {
        still_open.push_back(i);
      }
    }
    if (used) ++next_label;
    open.swap(still_open);
  }
  compact_labels(out.labels);
  out.ids = s.ids();
  out.delta = delta;
  out.seed = seed;
  out.provenance.push_back({0, "ckr"});
  return out;
}

Partition l2_base_partition(const PointSet& s, double delta, L2Strategy strategy, RandomSeed seed,
                            const L2Options& options) {
  if (s.norm().is_infinite() || s.norm().value() != 2.0) {
    throw DomainError("l2_base_partition needs l_2 data, got p = " + s.norm().to_string());
  }
  require_positive_delta(delta);
  const std::string mechanism = "l2-" + to_string(strategy);
  if (trivially_within(s, delta)) return single_cluster(s, delta, seed, mechanism);

  Partition out;
  bool repaired = false;
  const std::size_t jl_dim =
      options.jl_dim ? options.jl_dim
                     : static_cast<std::size_t>(
                           std::ceil(4.0 * std::log(static_cast<double>(std::max<std::size_t>(s.size(), 2)))));
  if (options.jl_pre_project && s.dim() > jl_dim) {
    const PointSet projected = jl_project(s, jl_dim, derive_seed(seed, 101));
    out = l2_carve(projected, delta, strategy, derive_seed(seed, 102));
    compact_labels(out.labels);
    // The projection can stretch a cluster past delta; re-carve those in the
    // original coordinates.
    std::vector<std::size_t> fixed(s.size());
    std::size_t next_label = 0;
    const auto groups = out.clusters();
    for (std::size_t c = 0; c < groups.size(); ++c) {
      const auto& rows = groups[c];
      if (subset_diameter(s, rows) <= delta) {
        for (std::size_t r : rows) fixed[r] = next_label;
        ++next_label;
        continue;
      }
      repaired = true;
      const PointSet sub = s.subset(rows);
      Partition inner = l2_carve(sub, delta, strategy, derive_seed(seed, 200 + c));
      compact_labels(inner.labels);
      for (std::size_t k = 0; k < rows.size(); ++k) fixed[rows[k]] = next_label + inner.labels[k];
      next_label += *std::max_element(inner.labels.begin(), inner.labels.end()) + 1;
    }
    out.labels = std::move(fixed);
  } else {
    out = l2_carve(s, delta, strategy, seed);
  }
  compact_labels(out.labels);
  out.ids = s.ids();
  out.delta = delta;
  out.seed = seed;
  out.provenance.push_back({0, mechanism});
  if (repaired) out.provenance.push_back({0, "jl-repair"});
  return out;
}

Partition CkrSampler::draw(const PointSet& s, double delta, RandomSeed seed) const {
  return ckr_partition(s, delta, seed);
}

Partition L2BaseSampler::draw(const PointSet& s, double delta, RandomSeed seed) const {
  // An l_2 partition of diameter <= delta also has l_p diameter <= delta for p >= 2.
  if (!s.norm().is_infinite() && s.norm().value() > 2.0) {
    Partition out = l2_base_partition(s.with_norm(kL2), delta, strategy_, seed, options_);
    return out;
  }
  return l2_base_partition(s, delta, strategy_, seed, options_);
}

std::string L2BaseSampler::name() const { return "l2-" + to_string(strategy_); }

// ---------------------------------------------------------------------------

StepParams step_params(double p, double q, double beta, double beta_star_q) {
  if (!(q >= 2.0 && q < p && std::isfinite(p))) {
    throw DomainError("step_params needs 2 <= q < p < inf");
  }
  if (!(beta >= 1.0 && beta_star_q >= 1.0)) {
    throw DomainError("step_params needs beta, beta* >= 1");
  }
  const double a = 0.5 * std::pow(2.0 * q * beta / (p * beta_star_q), q / p);
  const double b = beta_star_q * a / beta;
  return {a, b};
}

double refined_beta(double p, double q, double beta, double beta_star_q, double constant) {
  if (!(q >= 2.0 && q < p && std::isfinite(p))) {
    throw DomainError("refined_beta needs 2 <= q < p < inf");
  }
  if (!(beta >= 1.0 && beta_star_q >= 1.0)) throw DomainError("refined_beta needs beta, beta* >= 1");
  if (!(constant > 0.0) || !std::isfinite(constant)) throw DomainError("refinement constant must be positive");
  const double r = q / p;
  return constant * std::pow(p / (2.0 * q), r) * std::pow(beta_star_q, r) * std::pow(beta, 1.0 - r);
}

double predict_fixpoint(double p, double q, double beta_star_q, double constant) {
  if (!(q >= 2.0 && q < p && std::isfinite(p))) {
    throw DomainError("predict_fixpoint needs 2 <= q < p < inf");
  }
  if (!(beta_star_q >= 1.0)) throw DomainError("predict_fixpoint needs beta* >= 1");
  if (!(constant > 0.0) || !std::isfinite(constant)) throw DomainError("refinement constant must be positive");
  return std::pow(constant, p / q) * (p / (2.0 * q)) * beta_star_q;
}

Partition refine_once(const PartitionSampler& outer, const PartitionSampler& inner,
                      const PointSet& s, double p, double q, double delta,
                      const StepParams& params, RandomSeed seed, int level) {
  require_positive_delta(delta);
  if (s.norm().is_infinite() || s.norm().value() != p) {
    throw DomainError("refine_once expects l_" + std::to_string(p) + " data, got p = " +
                      s.norm().to_string());
  }
  const double outer_scale = params.a * delta;
  const double inner_scale = params.b * delta;
  const Partition initial = outer.draw(s, outer_scale, derive_seed(seed, 0));

  Partition out;
  out.labels.assign(s.size(), 0);
  out.ids = s.ids();
  out.delta = delta;
  out.seed = seed;
  out.provenance = initial.provenance;
  auto add_tag = [&out](const ProvenanceTag& tag) {
    if (std::find(out.provenance.begin(), out.provenance.end(), tag) == out.provenance.end()) {
      out.provenance.push_back(tag);
    }
  };
  std::ostringstream mazur_tag;
  mazur_tag << "mazur " << p << "->" << q;
  add_tag({level, mazur_tag.str()});

  const NormExponent target(q);
  const auto groups = initial.clusters();
  std::size_t next_label = 0;
  std::vector<double> images;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    const auto& rows = groups[c];
    if (rows.size() == 1) {
      out.labels[rows[0]] = next_label++;
      continue;
    }
    // Representative: smallest id in the cluster.
    std::size_t rep = rows[0];
    for (std::size_t r : rows) {
      if (s.id(r) < s.id(rep)) rep = r;
    }
    const auto z = s.row(rep);
    const MazurSpec spec(p, q, outer_scale, std::vector<double>(z.begin(), z.end()));
    images.assign(rows.size() * s.dim(), 0.0);
    std::vector<PointId> ids(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      mazur_apply_into(spec, s.row(rows[k]),
                       std::span<double>(images.data() + k * s.dim(), s.dim()));
      ids[k] = s.id(rows[k]);
    }
    const PointSet mapped(images, s.dim(), target, std::move(ids));
    const Partition sub = inner.draw(mapped, inner_scale, derive_seed(seed, 1 + c));
    for (const auto& tag : sub.provenance) add_tag({tag.level + level + 1, tag.mechanism});
    std::size_t used = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out.labels[rows[k]] = next_label + sub.labels[k];
      used = std::max(used, sub.labels[k] + 1);
    }
    next_label += used;
  }
  compact_labels(out.labels);
  return out;
}

RefineSampler::RefineSampler(SamplerPtr outer, SamplerPtr inner, double p, double q,
                             StepParams params, double assumed_beta, int level)
    : outer_(std::move(outer)),
      inner_(std::move(inner)),
      p_(p),
      q_(q),
      params_(params),
      assumed_beta_(assumed_beta),
      level_(level) {
  if (!outer_ || !inner_) throw DomainError("RefineSampler needs outer and inner samplers");
}

Partition RefineSampler::draw(const PointSet& s, double delta, RandomSeed seed) const {
  require_positive_delta(delta);
  if (trivially_within(s, delta)) return single_cluster(s, delta, seed, name(), level_);
  return refine_once(*outer_, *inner_, s, p_, q_, delta, params_, seed, level_);
}

std::string RefineSampler::name() const {
  std::ostringstream out;
  out << "refine(" << p_ << "->" << q_ << ")";
  return out.str();
}

nlohmann::json RefineSampler::describe() const {
  return {{"sampler", name()},      {"assumed_beta", assumed_beta_}, {"a", params_.a},
          {"b", params_.b},         {"level", level_},               {"outer", outer_->describe()},
          {"inner", inner_->describe()}};
}

// ---------------------------------------------------------------------------

BaseKind parse_base_kind(std::string_view name) {
  if (name == "ckr") return BaseKind::ckr;
  if (name == "l2-grid") return BaseKind::l2_grid;
  if (name == "l2-ballcarve") return BaseKind::l2_ballcarve;
  throw DomainError("unknown base '" + std::string(name) +
                    "' (expected ckr, l2-grid, l2-ballcarve)");
}

std::string to_string(BaseKind kind) {
  switch (kind) {
    case BaseKind::ckr: return "ckr";
    case BaseKind::l2_grid: return "l2-grid";
    case BaseKind::l2_ballcarve: return "l2-ballcarve";
  }
  return "unknown";
}

BetaEstimates BetaEstimates::defaults(std::size_t n, std::size_t d, double c, double c0) {
  const double ln_n = std::log(static_cast<double>(std::max<std::size_t>(n, 1)));
  const double dd = static_cast<double>(d);
  BetaEstimates est;
  est.table[2.0] = std::max(1.0, c * std::min(std::sqrt(dd), std::sqrt(ln_n)));
  est.beta0 = std::max(1.0, c0 * std::min(dd, ln_n));
  return est;
}

double BetaEstimates::beta_star(double q) const {
  auto it = table.find(q);
  if (it == table.end()) {
    throw DomainError("no beta* estimate for l_" + std::to_string(q));
  }
  return it->second;
}

nlohmann::json BetaEstimates::to_json() const {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& [q, b] : table) t.push_back({{"q", q}, {"beta_star", b}});
  return {{"table", t},
          {"beta0", beta0},
          {"intermediate", intermediate == Intermediate::fixpoint ? "fixpoint" : "calibrated"}};
}

std::vector<double> DecompositionPlan::default_chain(double p) {
  if (!(p >= 2.0) || !std::isfinite(p)) throw DomainError("decomposition needs 2 <= p < inf");
  std::vector<double> chain{p};
  double cur = p;
  if (cur > 2.0 && !is_power_of_two(cur)) {
    cur = std::exp2(std::ceil(std::log2(cur)) - 1.0);
    chain.push_back(cur);
  }
  while (cur > 2.0) {
    cur /= 2.0;
    chain.push_back(cur);
  }
  return chain;
}

int DecompositionPlan::default_inner_k(double p, double beta0) {
  const double v = std::log2(p) * std::log2(beta0);
  if (!(v > 1.0)) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log2(v))));
}

DecompositionPlan DecompositionPlan::for_exponent(double p, const BetaEstimates& estimates) {
  DecompositionPlan plan;
  plan.p_chain = default_chain(p);
  plan.inner_k = default_inner_k(p, estimates.beta0);
  return plan;
}

void DecompositionPlan::validate() const {
  if (p_chain.empty()) throw DomainError("decomposition plan has an empty p-chain");
  if (p_chain.back() != 2.0) throw DomainError("p-chain must end at 2");
  for (std::size_t i = 0; i + 1 < p_chain.size(); ++i) {
    const double ratio = p_chain[i] / p_chain[i + 1];
    if (!(ratio > 1.0 && ratio <= 2.0 + 1e-12)) {
      throw DomainError("consecutive p-chain ratios must lie in (1, 2]");
    }
  }
  if (inner_k < 1) throw DomainError("inner_k must be >= 1");
  if (!(refine_constant > 0.0) || !std::isfinite(refine_constant)) {
    throw DomainError("refinement constant must be positive");
  }
}

nlohmann::json DecompositionPlan::to_json() const {
  return {{"p_chain", p_chain},
          {"inner_k", inner_k},
          {"base", to_string(base)},
          {"level_base", to_string(level_base)},
          {"abort_on_worse", abort_on_worse},
          {"refine_constant", refine_constant}};
}

LipschitzSampler::LipschitzSampler(PointSet points, SamplerPtr sampler, DecompositionPlan plan,
                                   BetaEstimates estimates, std::vector<LevelSummary> levels,
                                   std::vector<SamplerPtr> stages)
    : points_(std::move(points)),
      sampler_(std::move(sampler)),
      plan_(std::move(plan)),
      estimates_(std::move(estimates)),
      levels_(std::move(levels)),
      stages_(std::move(stages)) {}

Partition LipschitzSampler::draw(double delta, RandomSeed seed) const {
  return sampler_->draw(points_, delta, seed);
}

nlohmann::json LipschitzSampler::describe() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& l : levels_) {
    lv.push_back({{"p", l.p},
                  {"q", l.q},
                  {"predicted_betas", l.predicted_betas},
                  {"iterations", l.iterations},
                  {"aborted", l.aborted}});
  }
  return {{"plan", plan_.to_json()},
          {"estimates", estimates_.to_json()},
          {"levels", lv},
          {"sampler", sampler_->describe()}};
}

namespace {

SamplerPtr make_l2_sampler(BaseKind kind, double beta) {
  switch (kind) {
    case BaseKind::l2_grid: return std::make_shared<L2BaseSampler>(L2Strategy::grid, beta);
    case BaseKind::l2_ballcarve:
      return std::make_shared<L2BaseSampler>(L2Strategy::ballcarve, beta);
    case BaseKind::ckr: return std::make_shared<CkrSampler>(beta);
  }
  return nullptr;
}

// Whole-set Mazur image into l_q around the smallest-id row.
PointSet whole_image(const PointSet& s, double q) {
  std::size_t rep = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s.id(i) < s.id(rep)) rep = i;
  }
  double radius = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    radius = std::max(radius, lp_distance(s.row(i), s.row(rep), s.norm()));
  }
  if (radius == 0.0) return s.with_norm(NormExponent(q));
  const auto z = s.row(rep);
  const MazurSpec spec(s.norm().value(), q, radius, std::vector<double>(z.begin(), z.end()));
  std::vector<double> data(s.size() * s.dim());
  for (std::size_t i = 0; i < s.size(); ++i) {
    mazur_apply_into(spec, s.row(i), std::span<double>(data.data() + i * s.dim(), s.dim()));
  }
  return PointSet(std::move(data), s.dim(), NormExponent(q), s.ids());
}

double calibrate(const PartitionSampler& sampler, const PointSet& s, RandomSeed seed) {
  if (s.size() < 2) return 1.0;
  const double delta = median_pairwise_distance(s);
  if (!(delta > 0.0)) return 1.0;
  const BetaReport report = estimate_beta(sampler, s, delta, 32, 4096, seed);
  return std::max(1.0, report.beta_hat);
}

}  // namespace

LipschitzSampler build_decomposer(const PointSet& s, const DecompositionPlan& plan,
                                  const BetaEstimates& estimates, RandomSeed calibration_seed) {
  if (s.norm().is_infinite() || s.norm().value() < 2.0) {
    throw DomainError("build_decomposer needs 2 <= p < inf (apply holder_map first), got p = " +
                      s.norm().to_string());
  }
  plan.validate();
  const double p = s.norm().value();
  if (std::abs(plan.p_chain.front() - p) > 1e-12 * p) {
    throw DomainError("p-chain must start at the point set's exponent");
  }
  if (plan.base == BaseKind::ckr) throw DomainError("the l_2 floor must be l2-grid or l2-ballcarve");

  BetaEstimates est = estimates;
  const bool calibrated = est.intermediate == BetaEstimates::Intermediate::calibrated;
  const std::size_t levels = plan.p_chain.size();

  // Calibration data for every chain exponent: successive whole-set images.
  std::vector<PointSet> level_data;
  if (calibrated) {
    level_data.push_back(s);
    for (std::size_t j = 1; j < levels; ++j) {
      level_data.push_back(whole_image(level_data.back(), plan.p_chain[j]));
    }
  }

  std::vector<SamplerPtr> sampler_for(levels);
  if (calibrated) {
    const SamplerPtr probe = make_l2_sampler(plan.base, 1.0);
    est.table[2.0] = calibrate(*probe, level_data.back(), derive_seed(calibration_seed, levels));
  }
  sampler_for[levels - 1] = make_l2_sampler(plan.base, est.beta_star(2.0));

  std::vector<LevelSummary> summaries(levels > 1 ? levels - 1 : 0);
  std::vector<SamplerPtr> top_stages;
  if (levels == 1) top_stages.push_back(sampler_for[0]);

  for (std::size_t jj = levels - 1; jj-- > 0;) {
    const double lp = plan.p_chain[jj];
    const double lq = plan.p_chain[jj + 1];

    double beta_star_q;
    if (auto it = est.table.find(lq); it != est.table.end()) {
      beta_star_q = it->second;
    } else if (calibrated) {
      beta_star_q = calibrate(*sampler_for[jj + 1], level_data[jj + 1],
                              derive_seed(calibration_seed, jj + 1));
      est.table[lq] = beta_star_q;
    } else {
      beta_star_q =
          predict_fixpoint(lq, plan.p_chain[jj + 2], est.beta_star(plan.p_chain[jj + 2]),
                           plan.refine_constant);
      est.table[lq] = beta_star_q;
    }

    double beta0 = est.beta0;
    SamplerPtr base = make_l2_sampler(plan.level_base, beta0);
    if (calibrated) {
      // Start the level from whichever of ckr and the l_2 carving measures better here.
      const RandomSeed level_seed = derive_seed(calibration_seed, 100 + jj);
      const double ckr_beta = calibrate(CkrSampler(1.0), level_data[jj], level_seed);
      const double l2_beta =
          calibrate(*make_l2_sampler(plan.base, 1.0), level_data[jj], level_seed);
      beta0 = std::min(ckr_beta, l2_beta);
      base = ckr_beta <= l2_beta ? make_l2_sampler(BaseKind::ckr, beta0)
                                 : make_l2_sampler(plan.base, beta0);
      if (jj == 0) est.beta0 = beta0;
    }

    LevelSummary summary{lp, lq, {beta0}, 0, false};
    SamplerPtr cur = base;
    double beta = beta0;
    if (jj == 0) top_stages.push_back(cur);
    for (int i = 1; i <= plan.inner_k; ++i) {
      if (plan.abort_on_worse && beta_star_q > beta) {
        summary.aborted = true;
        break;
      }
      const StepParams params = step_params(lp, lq, beta, beta_star_q);
      const double next = refined_beta(lp, lq, beta, beta_star_q, plan.refine_constant);
      cur = std::make_shared<RefineSampler>(cur, sampler_for[jj + 1], lp, lq, params, next,
                                            static_cast<int>(jj));
      beta = next;
      summary.predicted_betas.push_back(beta);
      summary.iterations = i;
      if (jj == 0) top_stages.push_back(cur);
    }
    sampler_for[jj] = cur;
    summaries[jj] = summary;
  }

  return LipschitzSampler(s, sampler_for[0], plan, est, std::move(summaries),
                          std::move(top_stages));
}

}  // namespace recembed
