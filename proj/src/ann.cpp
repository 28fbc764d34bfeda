#include "recembed/ann.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "recembed/error.hpp"
#include "recembed/parallel.hpp"
#include "recembed/point_io.hpp"

namespace recembed {

namespace {

void check_dim(const PointSet& v, std::span<const double> q) {
  if (q.size() != v.dim()) {
    throw DomainError("query has dimension " + std::to_string(q.size()) + ", dataset has " +
                      std::to_string(v.dim()));
  }
}

double checked_p(const PointSet& v) {
  if (v.norm().is_infinite()) throw DomainError("ANN structures need a finite exponent");
  return v.norm().value();
}

// Appends the rows of `s` to store `name` under a fresh owner number.
PointId append_store(AnnDump& out, const std::string& name, const PointSet& s) {
  PointStore& store = out.stores[name];
  if (store.dim == 0) store.dim = s.dim();
  if (store.dim != s.dim()) throw DomainError("store '" + name + "' mixes dimensions");
  const PointId owner = store.owners.empty() ? 0 : store.owners.back() + 1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    store.owners.push_back(owner);
    store.ids.push_back(s.id(i));
    auto x = s.row(i);
    store.data.insert(store.data.end(), x.begin(), x.end());
  }
  return owner;
}

PointSet read_store(const AnnDump& in, const std::string& name, PointId owner,
                    const NormExponent& norm) {
  auto it = in.stores.find(name);
  if (it == in.stores.end()) throw DomainError("dump is missing store '" + name + "'");
  const PointStore& store = it->second;
  auto [lo, hi] = std::equal_range(store.owners.begin(), store.owners.end(), owner);
  if (lo == hi) throw DomainError("store '" + name + "' has no rows for owner " + std::to_string(owner));
  const auto begin = static_cast<std::size_t>(lo - store.owners.begin());
  const auto end = static_cast<std::size_t>(hi - store.owners.begin());
  std::vector<double> data(store.data.begin() + static_cast<std::ptrdiff_t>(begin * store.dim),
                           store.data.begin() + static_cast<std::ptrdiff_t>(end * store.dim));
  std::vector<PointId> ids(store.ids.begin() + static_cast<std::ptrdiff_t>(begin),
                           store.ids.begin() + static_cast<std::ptrdiff_t>(end));
  return PointSet(std::move(data), store.dim, norm, std::move(ids));
}

double parse_double(std::string_view field) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DomainError("malformed number '" + std::string(field) + "' in point store");
  }
  return v;
}

thread_local bool in_build_worker = false;

std::int64_t parse_int(std::string_view field) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DomainError("malformed integer '" + std::string(field) + "' in point store");
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

std::pair<PointId, double> brute_force_nn(const PointSet& v, std::span<const double> q) {
  const std::size_t row = brute_force_nn_row(v, q);
  return {v.id(row), lp_distance(v.row(row), q, v.norm())};
}

std::size_t brute_force_nn_row(const PointSet& v, std::span<const double> q) {
  check_dim(v, q);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = lp_distance(v.row(i), q, v.norm());
    if (d < best_d || (d == best_d && v.id(i) < v.id(best))) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

AnnBaseStrategy parse_ann_base(std::string_view name) {
  if (name == "exact-oracle") return AnnBaseStrategy::exact_oracle;
  if (name == "crude-grid") return AnnBaseStrategy::crude_grid;
  throw DomainError("unknown ANN base '" + std::string(name) +
                    "' (expected exact-oracle, crude-grid)");
}

std::string to_string(AnnBaseStrategy strategy) {
  return strategy == AnnBaseStrategy::exact_oracle ? "exact-oracle" : "crude-grid";
}

TSchedule parse_t_schedule(std::string_view name) {
  if (name == "halving") return TSchedule::halving;
  if (name == "geometric") return TSchedule::geometric;
  throw DomainError("unknown t-schedule '" + std::string(name) + "' (expected halving, geometric)");
}

std::string to_string(TSchedule schedule) {
  return schedule == TSchedule::halving ? "halving" : "geometric";
}

// ---------------------------------------------------------------------------

void AnnDump::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::json m = manifest;
  nlohmann::json index = nlohmann::json::object();
  for (const auto& [name, store] : stores) {
    index[name] = {{"dim", store.dim}, {"rows", store.size()}};
    std::string csv;
    for (std::size_t i = 0; i < store.size(); ++i) {
      csv += std::to_string(store.owners[i]) + "," + std::to_string(store.ids[i]);
      for (std::size_t j = 0; j < store.dim; ++j) {
        csv += "," + format_exact(store.data[i * store.dim + j]);
      }
      csv += "\n";
    }
    write_file_atomic(dir / (name + ".csv"), csv);
  }
  m["stores"] = index;
  write_file_atomic(dir / "manifest.json", m.dump(1) + "\n");
}

AnnDump AnnDump::read(const std::filesystem::path& dir) {
  AnnDump out;
  try {
    out.manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(std::string("malformed ANN manifest: ") + e.what());
  }
  for (const auto& [name, info] : out.manifest.at("stores").items()) {
    PointStore store;
    store.dim = info.at("dim").get<std::size_t>();
    std::istringstream lines(read_file(dir / (name + ".csv")));
    std::string line;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      std::vector<std::string_view> fields;
      std::string_view rest(line);
      while (true) {
        const auto comma = rest.find(',');
        fields.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      if (fields.size() != store.dim + 2) throw DomainError("ragged row in store '" + name + "'");
      store.owners.push_back(parse_int(fields[0]));
      store.ids.push_back(parse_int(fields[1]));
      for (std::size_t j = 0; j < store.dim; ++j) store.data.push_back(parse_double(fields[j + 2]));
    }
    if (store.size() != info.at("rows").get<std::size_t>()) {
      throw DomainError("store '" + name + "' row count disagrees with the manifest");
    }
    out.stores.emplace(name, std::move(store));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t ExactOracleIndex::query(std::span<const double> q, RandomSeed) const {
  return brute_force_nn_row(points_, q);
}

nlohmann::json ExactOracleIndex::dump(AnnDump&, const std::string&) const {
  return {{"kind", "exact-oracle"}};
}

CrudeGridIndex::CrudeGridIndex(PointSet points, double r, RandomSeed seed)
    : points_(std::move(points)), r_(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("ANN radius r must be positive");
  checked_p(points_);
  const std::size_t n = points_.size();
  const std::size_t d = points_.dim();
  const auto jl_dim = static_cast<std::size_t>(
      std::ceil(4.0 * std::log(static_cast<double>(std::max<std::size_t>(n, 2)))));
  if (points_.norm().value() == 2.0 && d > jl_dim) {
    projected_dim_ = jl_dim;
    Rng rng = make_rng(derive_seed(seed, 1));
    projection_.resize(jl_dim * d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(jl_dim));
    for (double& g : projection_) g = standard_normal(rng) * scale;
  } else {
    projected_dim_ = d;
  }
  side_ = 2.0 * r_;
  Rng rng = make_rng(derive_seed(seed, 2));
  offsets_.resize(projected_dim_);
  for (double& u : offsets_) u = uniform(rng, 0.0, side_);
  index_cells();

  // Surrogate approximation: sqrt(d) times the largest representative
  // error, measured on the stored points.
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t rep = cells_[cell_of_key_.at(key_of(project(points_.row(i))))].representative;
    worst = std::max(worst, lp_distance(points_.row(i), points_.row(rep), points_.norm()));
  }
  measured_factor_ = 1.0 + worst / r_;
  advertised_c_ = std::sqrt(static_cast<double>(projected_dim_)) * measured_factor_;
}

std::vector<double> CrudeGridIndex::project(std::span<const double> x) const {
  if (projection_.empty()) return {x.begin(), x.end()};
  const std::size_t d = points_.dim();
  std::vector<double> out(projected_dim_, 0.0);
  for (std::size_t k = 0; k < projected_dim_; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += projection_[k * d + j] * x[j];
    out[k] = acc;
  }
  return out;
}

std::vector<std::int64_t> CrudeGridIndex::key_of(std::span<const double> projected) const {
  std::vector<std::int64_t> key(projected.size());
  for (std::size_t j = 0; j < projected.size(); ++j) {
    key[j] = static_cast<std::int64_t>(std::floor((projected[j] + offsets_[j]) / side_));
  }
  return key;
}

void CrudeGridIndex::index_cells() {
  cells_.clear();
  cell_of_key_.clear();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    auto key = key_of(project(points_.row(i)));
    auto [it, inserted] = cell_of_key_.try_emplace(key, cells_.size());
    if (inserted) {
      cells_.push_back({std::move(key), i});
    } else if (points_.id(i) < points_.id(cells_[it->second].representative)) {
      cells_[it->second].representative = i;
    }
  }
}

std::size_t CrudeGridIndex::query(std::span<const double> q, RandomSeed) const {
  check_dim(points_, q);
  const auto projected = project(q);
  const auto key = key_of(projected);
  if (auto it = cell_of_key_.find(key); it != cell_of_key_.end()) {
    return cells_[it->second].representative;
  }
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  std::vector<double> center(projected_dim_);
  const NormExponent& norm = points_.norm();
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (std::size_t j = 0; j < projected_dim_; ++j) {
      center[j] = (static_cast<double>(cells_[c].key[j]) + 0.5) * side_ - offsets_[j];
    }
    const double d = lp_distance(center, projected, norm);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return cells_[best].representative;
}

nlohmann::json CrudeGridIndex::dump(AnnDump&, const std::string&) const {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : cells_) cells.push_back({{"key", cell.key}, {"rep", cell.representative}});
  return {{"kind", "crude-grid"},
          {"r", r_},
          {"side", side_},
          {"offsets", offsets_},
          {"projected_dim", projected_dim_},
          {"projection", projection_},
          {"cells", cells},
          {"advertised_c", advertised_c_},
          {"measured_factor", measured_factor_}};
}

std::unique_ptr<CrudeGridIndex> CrudeGridIndex::load(const nlohmann::json& node, const AnnDump&,
                                                     PointSet points) {
  std::unique_ptr<CrudeGridIndex> out(
      new CrudeGridIndex(std::move(points), node.at("r").get<double>()));
  out->side_ = node.at("side").get<double>();
  out->offsets_ = node.at("offsets").get<std::vector<double>>();
  out->projected_dim_ = node.at("projected_dim").get<std::size_t>();
  out->projection_ = node.at("projection").get<std::vector<double>>();
  out->advertised_c_ = node.at("advertised_c").get<double>();
  out->measured_factor_ = node.at("measured_factor").get<double>();
  for (const auto& cell : node.at("cells")) {
    auto key = cell.at("key").get<std::vector<std::int64_t>>();
    const auto rep = cell.at("rep").get<std::size_t>();
    if (rep >= out->points_.size()) throw DomainError("grid representative out of range");
    out->cell_of_key_.emplace(key, out->cells_.size());
    out->cells_.push_back({std::move(key), rep});
  }
  if (out->offsets_.size() != out->projected_dim_) throw DomainError("grid offsets malformed");
  return out;
}

AnnIndexPtr build_base_ann(const PointSet& points, double r, AnnBaseStrategy strategy,
                           RandomSeed seed) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("ANN radius r must be positive");
  if (strategy == AnnBaseStrategy::exact_oracle) return std::make_unique<ExactOracleIndex>(points);
  return std::make_unique<CrudeGridIndex>(points, r, seed);
}

// ---------------------------------------------------------------------------

void AnnConfig::validate() const {
  if (!(p > 2.0) || !std::isfinite(p)) throw DomainError("ANN recursion needs 2 < p < inf");
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("ANN radius r must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  if (inner_k && *inner_k < 0) throw DomainError("inner_k must be >= 0");
  if ((reps_inner && *reps_inner < 1) || (reps_outer && *reps_outer < 1)) {
    throw DomainError("repetition counts must be >= 1");
  }
}

nlohmann::json AnnConfig::to_json() const {
  nlohmann::json j = {{"p", p},
                      {"r", r},
                      {"t_schedule", to_string(t_schedule)},
                      {"epsilon", epsilon},
                      {"base", to_string(base)},
                      {"floor", to_string(floor)}};
  j["inner_k"] = inner_k ? nlohmann::json(*inner_k) : nlohmann::json(nullptr);
  j["reps_inner"] = reps_inner ? nlohmann::json(*reps_inner) : nlohmann::json(nullptr);
  j["reps_outer"] = reps_outer ? nlohmann::json(*reps_outer) : nlohmann::json(nullptr);
  return j;
}

AnnConfig AnnConfig::from_json(const nlohmann::json& j) {
  AnnConfig c;
  c.p = j.at("p").get<double>();
  c.r = j.at("r").get<double>();
  c.t_schedule = parse_t_schedule(j.at("t_schedule").get<std::string>());
  c.epsilon = j.at("epsilon").get<double>();
  c.base = parse_ann_base(j.at("base").get<std::string>());
  c.floor = parse_ann_base(j.at("floor").get<std::string>());
  auto opt = [&j](const char* key) -> std::optional<int> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<int>();
  };
  c.inner_k = opt("inner_k");
  c.reps_inner = opt("reps_inner");
  c.reps_outer = opt("reps_outer");
  c.validate();
  return c;
}

double next_t(double p, TSchedule schedule, double epsilon) {
  if (!(p > 2.0)) throw DomainError("next_t needs p > 2");
  const double t = schedule == TSchedule::halving ? p / 2.0 : (1.0 - epsilon) * p;
  return std::max(2.0, t);
}

double predict_c(double p, double t, double c_p, double c_t) {
  if (!(t >= 2.0 && t < p) || !std::isfinite(p)) throw DomainError("predict_c needs 2 <= t < p");
  if (!(c_p >= 1.0 && c_t >= 1.0)) throw DomainError("predict_c needs c_p, c_t >= 1");
  const double e = t / p;
  return std::pow(p / t, e) * std::pow(c_t, e) * std::pow(4.0 * c_p, 1.0 - e);
}

int default_ann_levels(double p, double c0) {
  const double v = std::log2(p) * std::log2(std::max(c0, 1.0));
  if (!(v > 1.0)) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log2(v))));
}

// ---------------------------------------------------------------------------

std::unique_ptr<RecursiveAnnStructure> RecursiveAnnStructure::build(const PointSet& v,
                                                                    const AnnConfig& cfg,
                                                                    RandomSeed seed) {
  cfg.validate();
  const double p = checked_p(v);
  if (std::abs(p - cfg.p) > 1e-12 * p) {
    throw DomainError("dataset exponent " + v.norm().to_string() + " differs from config p");
  }
  std::unique_ptr<RecursiveAnnStructure> out(new RecursiveAnnStructure(v, cfg, seed));
  out->base_ = build_base_ann(v, cfg.r, cfg.base, derive_seed(seed, 1));

  const double c0 = out->base_->advertised_c();
  const int k = cfg.inner_k.value_or(default_ann_levels(p, c0));
  const double t = next_t(p, cfg.t_schedule, cfg.epsilon);
  const bool floor_level = t == 2.0;
  const int reps = floor_level
                       ? cfg.reps_inner.value_or(static_cast<int>(
                             std::ceil(std::log2(3.0 * std::max(k, 1)))))
                       : cfg.reps_outer.value_or(static_cast<int>(
                             std::ceil(std::log2(3.0 * std::log2(p)))));
  const bool deterministic_children =
      floor_level && cfg.floor == AnnBaseStrategy::exact_oracle;

  AnnConfig child_cfg = cfg;
  child_cfg.p = t;
  child_cfg.inner_k.reset();

  double c_in = c0;
  for (int i = 1; i <= k; ++i) {
    Level level;
    level.t = t;
    level.c_in = c_in;
    level.radius = 2.0 * cfg.r * c_in;
    level.reps = deterministic_children ? 1 : std::max(1, reps);
    std::vector<std::optional<Child>> built(v.size());
    const RandomSeed level_seed = derive_seed(seed, 10 + static_cast<std::uint64_t>(i));

    // Nested builds stay on the calling worker.
    const unsigned threads = in_build_worker ? 1 : 0;
    parallel_chunks(v.size(), threads, [&](std::size_t begin, std::size_t end) {
      const bool was_worker = in_build_worker;
      in_build_worker = true;
      for (std::size_t x = begin; x < end; ++x) {
        auto center = v.row(x);
        std::vector<std::size_t> members;
        for (std::size_t y = 0; y < v.size(); ++y) {
          if (lp_distance(v.row(y), center, v.norm()) <= level.radius) members.push_back(y);
        }
        MazurSpec spec(p, t, level.radius, std::vector<double>(center.begin(), center.end()));
        std::vector<double> images(members.size() * v.dim());
        std::vector<PointId> ids(members.size());
        for (std::size_t m = 0; m < members.size(); ++m) {
          mazur_apply_into(spec, v.row(members[m]),
                           std::span<double>(images.data() + m * v.dim(), v.dim()));
          ids[m] = v.id(members[m]);
        }
        const PointSet image(std::move(images), v.dim(), NormExponent(t), std::move(ids));
        Child child{std::move(spec), std::move(members), {}};
        const RandomSeed child_seed = derive_seed(level_seed, x);
        for (int j = 0; j < level.reps; ++j) {
          const RandomSeed rep_seed = derive_seed(child_seed, static_cast<std::uint64_t>(j));
          if (floor_level) {
            child.reps.push_back(build_base_ann(image, cfg.r, cfg.floor, rep_seed));
          } else {
            child.reps.push_back(RecursiveAnnStructure::build(image, child_cfg, rep_seed));
          }
        }
        built[x] = std::move(child);
      }
      in_build_worker = was_worker;
    });
    for (auto& child : built) level.children.push_back(std::move(*child));

    for (const auto& child : level.children) {
      for (const auto& rep : child.reps) level.c_t = std::max(level.c_t, rep->advertised_c());
    }
    level.c_out = std::min(c_in, predict_c(p, t, c_in, level.c_t));
    c_in = level.c_out;
    out->levels_.push_back(std::move(level));
  }
  return out;
}

std::vector<double> RecursiveAnnStructure::c_schedule() const {
  std::vector<double> out{base_->advertised_c()};
  for (const auto& level : levels_) out.push_back(level.c_out);
  return out;
}

double RecursiveAnnStructure::advertised_c() const { return c_schedule().back(); }

std::size_t RecursiveAnnStructure::stored_points() const {
  std::size_t total = base_->stored_points();
  for (const auto& level : levels_) {
    for (const auto& child : level.children) {
      for (const auto& rep : child.reps) total += rep->stored_points();
    }
  }
  return total;
}

QueryOutcome RecursiveAnnStructure::query_outcome(std::span<const double> q, RandomSeed seed,
                                                  std::optional<double> threshold) const {
  check_dim(dataset_, q);
  const NormExponent& norm = dataset_.norm();
  QueryOutcome out;
  std::size_t best = base_->query(q, derive_seed(seed, 0));
  double best_d = lp_distance(dataset_.row(best), q, norm);
  out.trace.push_back({0, dataset_.id(best), best_d, "base"});

  std::vector<double> image(dataset_.dim());
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const Level& level = levels_[i];
    const int level_no = static_cast<int>(i) + 1;
    const Child& child = level.children[best];
    if (best_d > level.radius * (1.0 + kMazurRadiusSlack)) {
      out.trace.push_back({level_no, dataset_.id(best), best_d, "radius-skip"});
      continue;
    }
    if (child.members.empty()) {
      out.trace.push_back({level_no, dataset_.id(best), best_d, "empty-ball"});
      continue;
    }
    mazur_apply_into(child.spec, q, image);
    std::size_t level_best = best;
    double level_d = best_d;
    bool found = false;
    for (std::size_t j = 0; j < child.reps.size(); ++j) {
      const RandomSeed rep_seed = derive_seed(derive_seed(seed, level_no), j);
      const std::size_t local = child.reps[j]->query(image, rep_seed);
      const std::size_t row = child.members.at(local);
      const double d = lp_distance(dataset_.row(row), q, norm);
      if (!found || d < level_d) {
        level_best = row;
        level_d = d;
        found = true;
      }
    }
    out.trace.push_back({level_no, dataset_.id(level_best), level_d, "child"});
    if (level_d < best_d) {
      best = level_best;
      best_d = level_d;
    }
  }
  out.id = dataset_.id(best);
  out.distance = best_d;
  out.threshold = threshold.value_or(advertised_c() * cfg_.r);
  out.success = out.distance <= out.threshold;
  return out;
}

std::size_t RecursiveAnnStructure::query(std::span<const double> q, RandomSeed seed) const {
  const QueryOutcome outcome = query_outcome(q, seed);
  for (std::size_t i = 0; i < dataset_.size(); ++i) {
    if (dataset_.id(i) == outcome.id) return i;
  }
  throw DomainError("query returned an unknown id");
}

nlohmann::json RecursiveAnnStructure::dump(AnnDump& out, const std::string& prefix) const {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const Level& level = levels_[i];
    const std::string store = prefix + ".L" + std::to_string(i + 1);
    nlohmann::json children = nlohmann::json::array();
    for (const auto& child : level.children) {
      nlohmann::json reps = nlohmann::json::array();
      PointId owner = -1;
      if (!child.reps.empty()) {
        owner = append_store(out, store, child.reps.front()->points());
        for (std::size_t j = 0; j < child.reps.size(); ++j) {
          reps.push_back(child.reps[j]->dump(out, store + ".r" + std::to_string(j)));
        }
      }
      children.push_back({{"spec", child.spec.to_json()},
                          {"members", child.members},
                          {"store", store},
                          {"owner", owner},
                          {"reps", reps}});
    }
    levels.push_back({{"t", level.t},
                      {"c_in", level.c_in},
                      {"radius", level.radius},
                      {"c_t", level.c_t},
                      {"c_out", level.c_out},
                      {"reps", level.reps},
                      {"children", children}});
  }
  return {{"kind", "recursive"},
          {"config", cfg_.to_json()},
          {"seed", seed_.value},
          {"c_schedule", c_schedule()},
          {"base", base_->dump(out, prefix + ".base")},
          {"levels", levels}};
}

AnnDump RecursiveAnnStructure::dump() const {
  AnnDump out;
  append_store(out, "dataset", dataset_);
  out.manifest = {{"format", "recembed-ann/1"},
                  {"p", dataset_.norm().value()},
                  {"dim", dataset_.dim()},
                  {"root", dump(out, "root")}};
  return out;
}

AnnIndexPtr RecursiveAnnStructure::load_index(const nlohmann::json& node, const AnnDump& in,
                                              PointSet points) {
  const auto kind = node.at("kind").get<std::string>();
  if (kind == "exact-oracle") return std::make_unique<ExactOracleIndex>(std::move(points));
  if (kind == "crude-grid") return CrudeGridIndex::load(node, in, std::move(points));
  if (kind == "recursive") return load_node(node, in, std::move(points));
  throw DomainError("unknown index kind '" + kind + "' in dump");
}

std::unique_ptr<RecursiveAnnStructure> RecursiveAnnStructure::load_node(const nlohmann::json& node,
                                                                        const AnnDump& in,
                                                                        PointSet dataset) {
  std::unique_ptr<RecursiveAnnStructure> out(new RecursiveAnnStructure(
      dataset, AnnConfig::from_json(node.at("config")),
      RandomSeed{node.at("seed").get<std::uint64_t>()}));
  out->base_ = load_index(node.at("base"), in, dataset);
  for (const auto& lj : node.at("levels")) {
    Level level;
    level.t = lj.at("t").get<double>();
    level.c_in = lj.at("c_in").get<double>();
    level.radius = lj.at("radius").get<double>();
    level.c_t = lj.at("c_t").get<double>();
    level.c_out = lj.at("c_out").get<double>();
    level.reps = lj.at("reps").get<int>();
    for (const auto& cj : lj.at("children")) {
      Child child{MazurSpec::from_json(cj.at("spec")),
                  cj.at("members").get<std::vector<std::size_t>>(),
                  {}};
      for (std::size_t m : child.members) {
        if (m >= dataset.size()) throw DomainError("child member out of range in dump");
      }
      if (!cj.at("reps").empty()) {
        const PointSet image = read_store(in, cj.at("store").get<std::string>(),
                                          cj.at("owner").get<PointId>(), NormExponent(level.t));
        if (image.size() != child.members.size()) {
          throw DomainError("child store size disagrees with its member list");
        }
        for (const auto& rj : cj.at("reps")) child.reps.push_back(load_index(rj, in, image));
      }
      level.children.push_back(std::move(child));
    }
    if (level.children.size() != dataset.size()) {
      throw DomainError("level child count disagrees with the dataset size");
    }
    out->levels_.push_back(std::move(level));
  }
  return out;
}

std::unique_ptr<RecursiveAnnStructure> RecursiveAnnStructure::load(const AnnDump& in) {
  const auto& m = in.manifest;
  if (m.value("format", "") != "recembed-ann/1") throw DomainError("not an ANN structure dump");
  PointSet dataset = read_store(in, "dataset", 0, NormExponent(m.at("p").get<double>()));
  return load_node(m.at("root"), in, std::move(dataset));
}

std::unique_ptr<RecursiveAnnStructure> build_recursive_ann(const PointSet& v,
                                                           const AnnConfig& cfg,
                                                           RandomSeed seed) {
  return RecursiveAnnStructure::build(v, cfg, seed);
}

QueryOutcome ann_query(const RecursiveAnnStructure& structure, std::span<const double> q,
                       RandomSeed seed) {
  return structure.query_outcome(q, seed);
}

// ---------------------------------------------------------------------------

std::string AnnBenchReport::to_csv(bool with_timing) const {
  std::string out = "query_id,true_dist,got_dist,ratio,success_at_theory,micros_query\n";
  for (const auto& row : rows) {
    out += std::to_string(row.query_id) + "," + format_sig9(row.true_dist) + "," +
           format_sig9(row.got_dist) + "," + format_sig9(row.ratio) + "," +
           (row.success_at_theory ? "1" : "0") + "," +
           (with_timing ? format_sig9(row.micros_query) : std::string("0")) + "\n";
  }
  return out;
}

nlohmann::json AnnBenchReport::summary() const {
  nlohmann::json thresholds = nlohmann::json::array();
  for (const auto& [c, rate] : success_by_threshold) {
    thresholds.push_back({{"c", c}, {"success_rate", rate}});
  }
  return {{"queries", rows.size()},
          {"median_ratio", median_ratio},
          {"max_ratio", max_ratio},
          {"theory_threshold", theory_threshold},
          {"success_rate", success_rate},
          {"never_worse_violations", never_worse_violations},
          {"success_by_threshold", thresholds}};
}

AnnBenchReport ann_bench(const RecursiveAnnStructure& structure, const PointSet& queries,
                         double r, RandomSeed seed) {
  if (!(r > 0.0)) throw DomainError("ANN radius r must be positive");
  const PointSet& v = structure.points();
  if (queries.dim() != v.dim()) throw DomainError("queries and dataset differ in dimension");
  AnnBenchReport report;
  const auto schedule = structure.c_schedule();
  report.theory_threshold = schedule.back() * r;
  std::vector<double> ratios;
  for (std::size_t j = 0; j < queries.size(); ++j) {
    auto q = queries.row(j);
    const auto start = std::chrono::steady_clock::now();
    const QueryOutcome outcome =
        structure.query_outcome(q, derive_seed(seed, j), report.theory_threshold);
    const auto stop = std::chrono::steady_clock::now();

    AnnBenchRow row;
    row.query_id = queries.id(j);
    row.true_dist = brute_force_nn(v, q).second;
    row.got_dist = outcome.distance;
    if (row.true_dist > 0.0) {
      row.ratio = row.got_dist / row.true_dist;
    } else {
      row.ratio = row.got_dist == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    row.success_at_theory = outcome.success;
    row.micros_query = std::chrono::duration<double, std::micro>(stop - start).count();
    row.base_dist = outcome.trace.front().distance;
    if (row.got_dist > row.base_dist) ++report.never_worse_violations;
    ratios.push_back(row.ratio);
    report.rows.push_back(row);
  }
  if (!ratios.empty()) {
    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    report.median_ratio = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    report.max_ratio = sorted.back();
    std::size_t ok = 0;
    for (const auto& row : report.rows) ok += row.success_at_theory;
    report.success_rate = static_cast<double>(ok) / static_cast<double>(m);
  }
  for (double c : schedule) {
    std::size_t ok = 0;
    for (const auto& row : report.rows) ok += row.got_dist <= c * r;
    report.success_by_threshold.emplace_back(
        c, report.rows.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(report.rows.size()));
  }
  return report;
}

}  // namespace recembed
