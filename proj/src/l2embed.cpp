#include "recembed/l2embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "recembed/error.hpp"
#include "recembed/point_io.hpp"

namespace recembed {

namespace {

std::size_t smallest_id_row(const PointSet& s) {
  std::size_t rep = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s.id(i) < s.id(rep)) rep = i;
  }
  return rep;
}

double finite_p(const PointSet& s, const char* what) {
  if (s.norm().is_infinite()) throw DomainError(std::string(what) + " needs a finite exponent");
  return s.norm().value();
}

const double kSqrtE3 = 3.0 * std::exp(0.5);

}  // namespace

LocalizedMap localized_map(const PointSet& c, double K, double delta, double q) {
  if (!(K > 1.0) || !std::isfinite(K)) throw DomainError("K must be > 1");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be positive");
  const double p = finite_p(c, "localized_map");
  if (!(q >= 1.0 && q < p)) throw DomainError("localized_map needs p > q >= 1");
  const double radius = K * delta;
  const double diam = set_diameter(c);
  if (diam > radius * (1.0 + kMazurRadiusSlack)) {
    throw DomainError("subset diameter " + format_sig9(diam) + " exceeds K delta = " +
                      format_sig9(radius));
  }
  const auto z = c.row(smallest_id_row(c));
  MazurSpec spec(p, q, radius, std::vector<double>(z.begin(), z.end()));
  std::vector<double> images(c.size() * c.dim());
  for (std::size_t i = 0; i < c.size(); ++i) {
    mazur_apply_into(spec, c.row(i), std::span<double>(images.data() + i * c.dim(), c.dim()));
  }
  PointSet image_set(std::move(images), c.dim(), NormExponent(q), c.ids());
  return LocalizedMap{K, delta, p, q, c.ids(), std::move(spec), c, std::move(image_set)};
}

double kappa_scale(double kappa, std::size_t n) {
  if (!(kappa > 1.0) || !std::isfinite(kappa)) throw DomainError("kappa must be > 1");
  if (n < 2) throw DomainError("kappa scale needs at least two points");
  const double K = kappa * std::log(static_cast<double>(n));
  if (!(K > 1.0)) throw DomainError("kappa ln n = " + format_sig9(K) + " is not above 1");
  return K;
}

double localized_distortion_constant(double p, double q) {
  if (!(q >= 1.0 && q < p) || !std::isfinite(p)) throw DomainError("needs p > q >= 1");
  const double e = p / q;
  return e * std::pow(2.0, e - 1.0);
}

EmbeddingCertificate verify_localized(const PointSet& c, const PointSet& images, double delta,
                                      double D) {
  if (c.size() < 2) throw DomainError("verify_localized needs at least two points");
  if (images.ids() != c.ids()) throw DomainError("images are not aligned with the source ids");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (!(D >= 1.0)) throw DomainError("D must be >= 1");

  EmbeddingCertificate cert;
  cert.delta = delta;
  cert.D = D;
  cert.min_sep_image = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double src = lp_distance(c.row(i), c.row(j), c.norm());
      if (src == 0.0) continue;
      const double img = lp_distance(images.row(i), images.row(j), images.norm());
      cert.lip_hat = std::max(cert.lip_hat, img / src);
      if (src > delta) {
        ++cert.separated_pairs;
        cert.min_sep_image = std::min(cert.min_sep_image, img);
      }
    }
  }
  if (cert.lip_hat == 0.0) {
    cert.reason = "map is constant (non-constant requirement violated)";
    cert.achieved_D = std::numeric_limits<double>::infinity();
    if (cert.separated_pairs == 0) cert.min_sep_image = 0.0;
    return cert;
  }
  if (cert.separated_pairs == 0) {
    cert.vacuous = true;
    cert.min_sep_image = 0.0;
    cert.achieved_D = 1.0;
    cert.pass = true;
    return cert;
  }
  cert.achieved_D = cert.min_sep_image > 0.0 ? cert.lip_hat * delta / cert.min_sep_image
                                             : std::numeric_limits<double>::infinity();
  cert.pass = cert.achieved_D < D;
  if (!cert.pass) {
    cert.reason = "a separated pair has image distance <= (lip/D) delta (achieved D " +
                  format_sig9(cert.achieved_D) + ")";
  }
  return cert;
}

double measured_distortion(const PointSet& domain, const PointSet& image) {
  if (domain.size() != image.size()) throw DomainError("domain and image differ in size");
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < domain.size(); ++i) {
    for (std::size_t j = i + 1; j < domain.size(); ++j) {
      const double src = lp_distance(domain.row(i), domain.row(j), domain.norm());
      if (src == 0.0) continue;
      const double ratio = lp_distance(image.row(i), image.row(j), image.norm()) / src;
      hi = std::max(hi, ratio);
      lo = std::min(lo, ratio);
    }
  }
  if (!std::isfinite(lo)) return 1.0;
  if (hi == 0.0) throw DomainError("g is constant on the image set");
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

Composition compose_localized(const LocalizedMap& f, const GlobalMap& g, NormExponent target,
                              double D) {
  const PointSet& in = f.images;
  std::vector<double> data;
  std::size_t dim = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    auto y = g(in.row(i));
    if (!y) throw DomainError("g is undefined on the image of id " + std::to_string(in.id(i)));
    if (i == 0) dim = y->size();
    if (y->size() != dim || dim == 0) throw DomainError("g returned inconsistent dimensions");
    data.insert(data.end(), y->begin(), y->end());
  }
  PointSet out(std::move(data), dim, target, in.ids());
  const double d2 = measured_distortion(in, out);
  EmbeddingCertificate inner = verify_localized(f.source, in, f.delta, D);
  EmbeddingCertificate composed = verify_localized(f.source, out, f.delta, D);
  return Composition{std::move(out), d2, std::move(inner), std::move(composed)};
}

MazurSpec whole_set_mazur(const PointSet& images, double target_q) {
  const double q = finite_p(images, "whole_set_mazur");
  if (!(target_q >= 1.0 && target_q < q)) {
    throw DomainError("whole-set Mazur map needs source exponent > target exponent");
  }
  const std::size_t rep = smallest_id_row(images);
  double radius = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    radius = std::max(radius, lp_distance(images.row(i), images.row(rep), images.norm()));
  }
  if (radius == 0.0) radius = 1.0;
  const auto z = images.row(rep);
  return MazurSpec(q, target_q, radius, std::vector<double>(z.begin(), z.end()));
}

GlobalMap as_global_map(const MazurSpec& spec) {
  return [spec](std::span<const double> x) -> std::optional<std::vector<double>> {
    if (x.size() != spec.z().size()) return std::nullopt;
    const double r = lp_distance(x, spec.z(), NormExponent(spec.p()));
    if (r > spec.c0() * (1.0 + kMazurRadiusSlack)) return std::nullopt;
    return mazur_apply(spec, x);
  };
}

// ---------------------------------------------------------------------------

double xi_bound(double p, double q, double xi_q) {
  if (!(q >= 2.0 && q < p) || !std::isfinite(p)) throw DomainError("xi_bound needs 2 <= q < p");
  if (!(xi_q >= 0.0 && xi_q <= 1.0)) throw DomainError("xi_q must lie in [0, 1]");
  return std::max(0.5, xi_q) + p / q - 1.0;
}

double nr25_exponent(double p) {
  if (!(p > 2.0)) throw DomainError("comparator exponents need p > 2");
  if (p <= 3.0) return 0.5;
  if (p < 4.0) return p / 2.0 - 1.0;
  return 1.0;
}

double bg14_exponent(double p) {
  if (!(p > 2.0)) throw DomainError("comparator exponents need p > 2");
  return p < 4.0 ? p / 4.0 : 1.0;
}

ExponentBound theorem_exponent(double p, int k) {
  if (!(p > 3.0 && p <= kSqrtE3 * (1.0 + 1e-12))) {
    throw DomainError("theorem_exponent needs 3 < p < 3 sqrt(e), got " + format_sig9(p));
  }
  if (k < 1) throw DomainError("k must be >= 1");
  const double L = std::log(p / 3.0);
  ExponentBound b;
  b.p = p;
  b.k = k;
  // k ((p/3)^(1/k) - 1) without cancellation for large k.
  b.value = 0.5 + static_cast<double>(k) * std::expm1(L / static_cast<double>(k));
  b.limit = 0.5 + L;
  b.nr25 = nr25_exponent(p);
  b.bg14 = bg14_exponent(p);
  return b;
}

std::vector<ExponentBound> exponent_table(std::span<const double> p_grid, int k, double eps) {
  if (!(eps >= 0.0)) throw DomainError("eps must be >= 0");
  std::vector<ExponentBound> rows;
  rows.reserve(p_grid.size());
  for (double p : p_grid) {
    ExponentBound b = theorem_exponent(p, k);
    if (p < 4.0 && !(b.limit + eps < b.nr25)) {
      throw DomainError("dominance over the comparator fails at p = " + format_sig9(p));
    }
    rows.push_back(b);
  }
  return rows;
}

std::vector<double> open_grid(double p_min, double p_max, std::size_t steps) {
  if (!(p_min < p_max)) throw DomainError("grid needs p_min < p_max");
  std::vector<double> out(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    out[i] = p_min + static_cast<double>(i + 1) * (p_max - p_min) / static_cast<double>(steps + 1);
  }
  return out;
}

std::vector<double> linspace(double p_min, double p_max, std::size_t steps) {
  if (!(p_min <= p_max)) throw DomainError("grid needs p_min <= p_max");
  if (steps == 0) return {};
  if (steps == 1) return {p_min};
  std::vector<double> out(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    out[i] = p_min + static_cast<double>(i) * (p_max - p_min) / static_cast<double>(steps - 1);
  }
  out.back() = p_max;
  return out;
}

std::string exponent_csv(const std::vector<ExponentBound>& rows) {
  std::string out = "p,ours_k,ours_limit,nr25,bg14\n";
  for (const auto& r : rows) {
    out += format_sig9(r.p) + "," + format_sig9(r.value) + "," + format_sig9(r.limit) + "," +
           format_sig9(r.nr25) + "," + format_sig9(r.bg14) + "\n";
  }
  return out;
}

}  // namespace recembed
