#include "recembed/partition.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "recembed/error.hpp"

namespace recembed {

std::size_t Partition::cluster_count() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

std::vector<std::vector<std::size_t>> Partition::clusters() const {
  std::vector<std::vector<std::size_t>> out(cluster_count());
  for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(i);
  return out;
}

nlohmann::json Partition::to_json() const {
  nlohmann::json prov = nlohmann::json::array();
  for (const auto& tag : provenance) prov.push_back({{"level", tag.level}, {"mechanism", tag.mechanism}});
  return {{"delta", delta}, {"seed", seed.value}, {"labels", labels}, {"ids", ids},
          {"provenance", prov}};
}

Partition Partition::from_json(const nlohmann::json& j) {
  Partition p;
  p.delta = j.at("delta").get<double>();
  p.seed = RandomSeed{j.at("seed").get<std::uint64_t>()};
  p.labels = j.at("labels").get<std::vector<std::size_t>>();
  if (j.contains("ids")) {
    p.ids = j.at("ids").get<std::vector<PointId>>();
  } else {
    p.ids.resize(p.labels.size());
    for (std::size_t i = 0; i < p.ids.size(); ++i) p.ids[i] = static_cast<PointId>(i);
  }
  for (const auto& tag : j.at("provenance")) {
    p.provenance.push_back({tag.at("level").get<int>(), tag.at("mechanism").get<std::string>()});
  }
  if (p.ids.size() != p.labels.size()) throw DomainError("partition ids and labels differ in length");
  return p;
}

void compact_labels(std::vector<std::size_t>& labels) {
  std::unordered_map<std::size_t, std::size_t> remap;
  for (auto& l : labels) {
    auto [it, inserted] = remap.try_emplace(l, remap.size());
    l = it->second;
  }
}

Partition single_cluster(const PointSet& s, double delta, RandomSeed seed, std::string mechanism,
                         int level) {
  Partition p;
  p.labels.assign(s.size(), 0);
  p.ids = s.ids();
  p.delta = delta;
  p.seed = seed;
  p.provenance.push_back({level, std::move(mechanism)});
  return p;
}

double max_cluster_diameter(const PointSet& s, const Partition& partition) {
  double worst = 0.0;
  for (const auto& rows : partition.clusters()) worst = std::max(worst, subset_diameter(s, rows));
  return worst;
}

void audit_partition(const PointSet& s, const Partition& partition, double rel_tol) {
  if (partition.labels.size() != s.size() || partition.ids != s.ids()) {
    throw DomainError("partition labels do not cover exactly the point ids");
  }
  const double worst = max_cluster_diameter(s, partition);
  if (worst > partition.delta * (1.0 + rel_tol)) {
    throw DomainError("cluster diameter " + std::to_string(worst) + " exceeds delta " +
                      std::to_string(partition.delta));
  }
}

bool refines(const Partition& fine, const Partition& coarse) {
  if (fine.labels.size() != coarse.labels.size()) return false;
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> parent(fine.cluster_count(), unset);
  for (std::size_t i = 0; i < fine.labels.size(); ++i) {
    auto& slot = parent[fine.labels[i]];
    if (slot == unset) {
      slot = coarse.labels[i];
    } else if (slot != coarse.labels[i]) {
      return false;
    }
  }
  return true;
}

}  // namespace recembed
