#include "recembed/mazur.hpp"

#include <cmath>
#include <sstream>

#include "recembed/error.hpp"
#include "recembed/point_set.hpp"

namespace recembed {

MazurSpec::MazurSpec(double p, double q, double c0, std::vector<double> z)
    : p_(p), q_(q), c0_(c0), z_(std::move(z)) {
  if (!(std::isfinite(p) && std::isfinite(q) && q >= 1.0 && q < p)) {
    std::ostringstream msg;
    msg << "Mazur map needs 1 <= q < p < inf, got p = " << p << ", q = " << q;
    throw DomainError(msg.str());
  }
  if (!(c0 > 0.0) || !std::isfinite(c0)) {
    throw DomainError("Mazur radius c0 must be positive and finite");
  }
  if (z_.empty()) throw DomainError("Mazur base point must have dimension >= 1");
  scale_ = (p_ / q_) * std::pow(c0_, p_ / q_ - 1.0);
}

nlohmann::json MazurSpec::to_json() const {
  return {{"p", p_}, {"q", q_}, {"c0", c0_}, {"z", z_}};
}

MazurSpec MazurSpec::from_json(const nlohmann::json& j) {
  return MazurSpec(j.at("p").get<double>(), j.at("q").get<double>(), j.at("c0").get<double>(),
                   j.at("z").get<std::vector<double>>());
}

void check_mazur_radius(const MazurSpec& spec, std::span<const double> x) {
  if (x.size() != spec.z().size()) {
    throw DomainError("Mazur map dimension mismatch: " + std::to_string(x.size()) + " vs " +
                      std::to_string(spec.z().size()));
  }
  const double r = lp_distance(x, spec.z(), NormExponent(spec.p()));
  if (r > spec.c0() * (1.0 + kMazurRadiusSlack)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "Mazur radius violation: ||x - z||_" << spec.p() << " = " << r << " > c0 = "
        << spec.c0();
    throw DomainError(msg.str());
  }
}

void mazur_apply_into(const MazurSpec& spec, std::span<const double> x, std::span<double> out) {
  check_mazur_radius(spec, x);
  const double e = spec.exponent();
  const double inv_scale = 1.0 / spec.scale();
  const auto& z = spec.z();
  const bool square = (e == 2.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i] - z[i];
    const double mag = square ? v * v : std::pow(std::abs(v), e);
    out[i] = std::copysign(mag, v) * inv_scale;
  }
}

std::vector<double> mazur_apply(const MazurSpec& spec, std::span<const double> x) {
  std::vector<double> out(x.size());
  mazur_apply_into(spec, x, out);
  return out;
}

MazurBounds mazur_bounds(const MazurSpec& spec, std::span<const double> x,
                         std::span<const double> y) {
  const auto mx = mazur_apply(spec, x);
  const auto my = mazur_apply(spec, y);
  const double dist = lp_distance(x, y, NormExponent(spec.p()));
  const double ratio = spec.exponent();
  MazurBounds b;
  b.upper = dist;
  b.actual = lp_distance(mx, my, NormExponent(spec.q()));
  b.lower = (1.0 / ratio) * std::pow(2.0 * spec.c0(), 1.0 - ratio) * std::pow(dist, ratio);
  return b;
}

bool sandwich_holds(const MazurBounds& b, double rel_tol) {
  return b.lower * (1.0 - rel_tol) <= b.actual && b.actual <= b.upper * (1.0 + rel_tol);
}

}  // namespace recembed
