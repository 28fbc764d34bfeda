#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "recembed/norm_exponent.hpp"

namespace recembed {

using PointId = std::int64_t;

/// n x d matrix of finite reals, row-major, tagged with the norm it lives in.
/// Rows carry stable ids that survive subsetting and mapping.
class PointSet {
 public:
  /// Throws DomainError on n == 0, d == 0, a ragged buffer, non-finite
  /// entries or duplicate ids. Empty `ids` means 0..n-1.
  PointSet(std::vector<double> data, std::size_t dim, NormExponent norm,
           std::vector<PointId> ids = {});

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const NormExponent& norm() const { return norm_; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  PointId id(std::size_t i) const { return ids_[i]; }
  const std::vector<PointId>& ids() const { return ids_; }
  std::span<const double> data() const { return data_; }

  /// Same coordinates and ids under another norm.
  PointSet with_norm(NormExponent norm) const;

  /// Rows in the given order, ids preserved.
  PointSet subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<double> data_;
  std::size_t dim_;
  NormExponent norm_;
  std::vector<PointId> ids_;
};

/// (sum |x_i - y_i|^p)^(1/p), or max |x_i - y_i| for p = inf.
double lp_distance(std::span<const double> x, std::span<const double> y,
                   const NormExponent& p);

/// ||x||_p.
double lp_norm(std::span<const double> x, const NormExponent& p);

/// Max pairwise distance under the set's own norm; 0 for a singleton.
double set_diameter(const PointSet& s);

/// Diameter of the rows listed in `rows` (empty or singleton -> 0).
double subset_diameter(const PointSet& s, std::span<const std::size_t> rows);

/// All n(n-1)/2 pairwise distances, ordered (0,1), (0,2), ..., (n-2,n-1).
std::vector<double> pairwise_distances(const PointSet& s);

/// Exact median of the pairwise distances (mean of the two middle values
/// when the count is even). Requires n >= 2.
double median_pairwise_distance(const PointSet& s);

/// Pairwise-distance quantile in [0, 1] by linear interpolation.
double pairwise_distance_quantile(const PointSet& s, double quantile);

}  // namespace recembed
