#include "recembed/point_set.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "recembed/error.hpp"

namespace recembed {

PointSet::PointSet(std::vector<double> data, std::size_t dim, NormExponent norm,
                   std::vector<PointId> ids)
    : data_(std::move(data)), dim_(dim), norm_(norm), ids_(std::move(ids)) {
  if (dim_ == 0) throw DomainError("point set dimension must be >= 1");
  if (data_.empty() || data_.size() % dim_ != 0) {
    throw DomainError("point set needs n >= 1 rows of " + std::to_string(dim_) +
                      " coordinates, got " + std::to_string(data_.size()) + " values");
  }
  const std::size_t n = data_.size() / dim_;
  for (double v : data_) {
    if (!std::isfinite(v)) throw DomainError("point set entries must be finite");
  }
  if (ids_.empty()) {
    ids_.resize(n);
    for (std::size_t i = 0; i < n; ++i) ids_[i] = static_cast<PointId>(i);
  } else if (ids_.size() != n) {
    throw DomainError("point set has " + std::to_string(n) + " rows but " +
                      std::to_string(ids_.size()) + " ids");
  } else {
    std::unordered_set<PointId> seen;
    seen.reserve(n);
    for (PointId id : ids_) {
      if (!seen.insert(id).second) {
        throw DomainError("duplicate point id " + std::to_string(id));
      }
    }
  }
}

PointSet PointSet::with_norm(NormExponent norm) const {
  PointSet out = *this;
  out.norm_ = norm;
  return out;
}

PointSet PointSet::subset(std::span<const std::size_t> rows) const {
  std::vector<double> data;
  data.reserve(rows.size() * dim_);
  std::vector<PointId> ids;
  ids.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw DomainError("subset row out of range");
    auto x = row(r);
    data.insert(data.end(), x.begin(), x.end());
    ids.push_back(ids_[r]);
  }
  return PointSet(std::move(data), dim_, norm_, std::move(ids));
}

namespace {

// |v|^p with repeated multiplication for small integer exponents.
struct PowerSum {
  explicit PowerSum(double p) : p(p) {
    const double rounded = std::round(p);
    if (rounded == p && p <= 16.0) integer = static_cast<int>(rounded);
  }

  double term(double v) const {
    v = std::abs(v);
    switch (integer) {
      case 1: return v;
      case 2: return v * v;
      case 3: return v * v * v;
      case 4: { const double s = v * v; return s * s; }
      case 0: return std::pow(v, p);
      default: {
        double r = 1.0;
        for (int i = 0; i < integer; ++i) r *= v;
        return r;
      }
    }
  }

  double root(double s) const {
    switch (integer) {
      case 1: return s;
      case 2: return std::sqrt(s);
      case 4: return std::sqrt(std::sqrt(s));
      default: return std::pow(s, 1.0 / p);
    }
  }

  double p;
  int integer = 0;
};

}  // namespace

double lp_distance(std::span<const double> x, std::span<const double> y, const NormExponent& p) {
  if (x.size() != y.size()) {
    throw DomainError("dimension mismatch: " + std::to_string(x.size()) + " vs " +
                      std::to_string(y.size()));
  }
  if (p.is_infinite()) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
  }
  const PowerSum pw(p.value());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += pw.term(x[i] - y[i]);
  return pw.root(s);
}

double lp_norm(std::span<const double> x, const NormExponent& p) {
  if (p.is_infinite()) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  const PowerSum pw(p.value());
  double s = 0.0;
  for (double v : x) s += pw.term(v);
  return pw.root(s);
}

double subset_diameter(const PointSet& s, std::span<const std::size_t> rows) {
  double diam = 0.0;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      diam = std::max(diam, lp_distance(s.row(rows[a]), s.row(rows[b]), s.norm()));
    }
  }
  return diam;
}

double set_diameter(const PointSet& s) {
  double diam = 0.0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = a + 1; b < s.size(); ++b) {
      diam = std::max(diam, lp_distance(s.row(a), s.row(b), s.norm()));
    }
  }
  return diam;
}

std::vector<double> pairwise_distances(const PointSet& s) {
  std::vector<double> out;
  const std::size_t n = s.size();
  out.reserve(n * (n - 1) / 2);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      out.push_back(lp_distance(s.row(a), s.row(b), s.norm()));
    }
  }
  return out;
}

double pairwise_distance_quantile(const PointSet& s, double quantile) {
  if (s.size() < 2) throw DomainError("distance quantile needs at least two points");
  if (!(quantile >= 0.0 && quantile <= 1.0)) throw DomainError("quantile must lie in [0, 1]");
  auto d = pairwise_distances(s);
  std::sort(d.begin(), d.end());
  const double pos = quantile * static_cast<double>(d.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, d.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return d[lo] + frac * (d[hi] - d[lo]);
}

double median_pairwise_distance(const PointSet& s) {
  return pairwise_distance_quantile(s, 0.5);
}

}  // namespace recembed
