#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recembed/mazur.hpp"
#include "recembed/point_set.hpp"

namespace recembed {

/// A localized map f: C -> l_q for one (subset, scale) pair: the Mazur map
/// around the smallest-id point of C with radius K delta.
struct LocalizedMap {
  double K = 2.0;
  double delta = 1.0;
  double p = 4.0;
  double q = 2.0;
  std::vector<PointId> subset_ids;
  MazurSpec spec;
  PointSet source;
  PointSet images;
};

/// Requires diam(C) <= K delta (up to 1e-12 relative), K > 1 and p > q >= 1
/// with p the norm of C.
LocalizedMap localized_map(const PointSet& c, double K, double delta, double q);

/// Preset scale ratio K = kappa ln n; requires kappa > 1, n >= 2 and a
/// result above 1.
double kappa_scale(double kappa, std::size_t n);

/// Constant c with achieved D <= c K^(p/q - 1) for every localized Mazur map:
/// (p/q) 2^(p/q - 1).
double localized_distortion_constant(double p, double q);

/// Numeric record of the localized weakly bi-Lipschitz property.
struct EmbeddingCertificate {
  /// Exact finite-set Lipschitz constant: max image/source ratio over pairs.
  double lip_hat = 0.0;
  /// Min image distance over pairs with source distance > delta.
  double min_sep_image = 0.0;
  /// lip_hat * delta / min_sep_image; 1 when no pair is separated.
  double achieved_D = 1.0;
  double D = 1.0;
  double delta = 0.0;
  std::size_t separated_pairs = 0;
  bool vacuous = false;
  bool pass = false;
  /// Empty on pass; otherwise why it failed.
  std::string reason;
};

/// Brute force over all pairs. pass iff the map is non-constant and every
/// pair with source distance > delta has image distance > (lip_hat / D) delta.
EmbeddingCertificate verify_localized(const PointSet& c, const PointSet& images, double delta,
                                      double D);

/// A map defined on (a superset of) the image set; nullopt means undefined.
using GlobalMap = std::function<std::optional<std::vector<double>>(std::span<const double>)>;

/// Ratio max/min of image/source distance over pairs of distinct domain
/// points, i.e. the distortion of `image` as an embedding of `domain`.
double measured_distortion(const PointSet& domain, const PointSet& image);

struct Composition {
  PointSet images;
  /// Distortion of g measured on the inner image set.
  double g_distortion = 1.0;
  EmbeddingCertificate inner;
  EmbeddingCertificate composed;
};

/// Applies g to every image of `f`, measures g's distortion D2 there and
/// certifies both f and g o f at distortion bound D.
Composition compose_localized(const LocalizedMap& f, const GlobalMap& g, NormExponent target,
                              double D);

/// Whole-set scaled Mazur map l_q -> l_2 around the smallest-id point, with
/// radius the largest distance from it. Requires q > 2.
MazurSpec whole_set_mazur(const PointSet& images, double target_q = 2.0);
GlobalMap as_global_map(const MazurSpec& spec);

/// max{1/2, xi_q} + p/q - 1.
double xi_bound(double p, double q, double xi_q);

struct ExponentBound {
  double p = 0.0;
  int k = 1;
  /// 1/2 - k + k (p/3)^(1/k).
  double value = 0.0;
  /// 1/2 + ln(p/3).
  double limit = 0.0;
  /// 1/2 on (2, 3], p/2 - 1 on (3, 4), 1 from 4 on.
  double nr25 = 0.0;
  /// p/4 on (2, 4), 1 from 4 on.
  double bg14 = 0.0;
};

/// Requires 3 < p < 3 sqrt(e) and k >= 1.
ExponentBound theorem_exponent(double p, int k);

double nr25_exponent(double p);
double bg14_exponent(double p);

/// Rows over `p_grid`; throws DomainError if some ours_limit + eps >= nr25 at
/// a grid point in (3, 4).
std::vector<ExponentBound> exponent_table(std::span<const double> p_grid, int k, double eps);

/// `steps` points strictly inside (p_min, p_max): p_min + i (p_max - p_min) / (steps + 1).
std::vector<double> open_grid(double p_min, double p_max, std::size_t steps);

/// `steps` evenly spaced points from p_min to p_max inclusive.
std::vector<double> linspace(double p_min, double p_max, std::size_t steps);

/// Header "p,ours_k,ours_limit,nr25,bg14".
std::string exponent_csv(const std::vector<ExponentBound>& rows);

}  // namespace recembed
