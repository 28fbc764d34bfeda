#pragma once

#include <span>
#include <vector>

#include "json.hpp"
#include "recembed/norm_exponent.hpp"

namespace recembed {

/// Scaled Mazur map from the l_p ball of radius c0 around z into l_q:
///   x -> sign(x - z) |x - z|^(p/q) / ((p/q) c0^(p/q - 1)), coordinatewise.
/// For admissible x, y it satisfies
///   (q/p)(2 c0)^(1 - p/q) ||x - y||_p^(p/q) <= ||M x - M y||_q <= ||x - y||_p.
class MazurSpec {
 public:
  /// Requires 1 <= q < p < inf and c0 > 0.
  MazurSpec(double p, double q, double c0, std::vector<double> z);

  double p() const { return p_; }
  double q() const { return q_; }
  double c0() const { return c0_; }
  const std::vector<double>& z() const { return z_; }

  /// p / q.
  double exponent() const { return p_ / q_; }

  /// Divisor (p/q) c0^(p/q - 1) applied after the power map.
  double scale() const { return scale_; }

  nlohmann::json to_json() const;
  static MazurSpec from_json(const nlohmann::json& j);

  friend bool operator==(const MazurSpec&, const MazurSpec&) = default;

 private:
  double p_;
  double q_;
  double c0_;
  std::vector<double> z_;
  double scale_;
};

/// Relative slack on the ball-radius precondition.
inline constexpr double kMazurRadiusSlack = 1e-12;

/// Throws DomainError (with the offending norm) unless ||x - z||_p <= c0 (1 + 1e-12).
void check_mazur_radius(const MazurSpec& spec, std::span<const double> x);

std::vector<double> mazur_apply(const MazurSpec& spec, std::span<const double> x);

/// Writes the image into `out` (size d) without allocating. Radius is checked.
void mazur_apply_into(const MazurSpec& spec, std::span<const double> x, std::span<double> out);

struct MazurBounds {
  double lower;
  double actual;
  double upper;
};

MazurBounds mazur_bounds(const MazurSpec& spec, std::span<const double> x,
                         std::span<const double> y);

/// lower <= actual <= upper with relative slack `rel_tol`.
bool sandwich_holds(const MazurBounds& b, double rel_tol = 1e-9);

}  // namespace recembed
