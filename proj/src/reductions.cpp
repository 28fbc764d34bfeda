#include "recembed/reductions.hpp"

#include <algorithm>
#include <cmath>

#include "recembed/error.hpp"

namespace recembed {

double holder_target_exponent(std::size_t dim) {
  return std::max(2.0, std::log2(static_cast<double>(dim)));
}

bool holder_applies(const PointSet& s) {
  return s.norm().is_infinite() || s.norm().value() > std::log2(static_cast<double>(s.dim()));
}

HolderResult holder_map(const PointSet& s) {
  if (s.dim() == 1) {
    // ||.||_p is |.| for every p in one dimension.
    return HolderResult{s.with_norm(NormExponent(2.0)), true};
  }
  if (!holder_applies(s)) {
    throw DomainError("holder_map needs p > log2 d or p = inf (p = " + s.norm().to_string() +
                      ", d = " + std::to_string(s.dim()) + ")");
  }
  const double target = holder_target_exponent(s.dim());
  if (!s.norm().is_infinite() && target >= s.norm().value()) {
    throw DomainError("holder target exponent " + std::to_string(target) +
                      " is not below p = " + s.norm().to_string());
  }
  return HolderResult{s.with_norm(NormExponent(target)), false};
}

PointSet jl_project(const PointSet& s, std::size_t target_dim, RandomSeed seed,
                    const JlOptions& options) {
  if (s.norm().is_infinite() || s.norm().value() != 2.0) {
    throw DomainError("jl_project needs l_2 data, got p = " + s.norm().to_string());
  }
  if (target_dim == 0) throw DomainError("jl_project target dimension must be >= 1");
  if (options.identity_check) {
    if (target_dim != s.dim()) {
      throw DomainError("identity check needs target_dim == d");
    }
    return s;
  }
  const std::size_t d = s.dim();
  Rng rng = make_rng(seed);
  std::vector<double> g(target_dim * d);
  for (double& v : g) v = standard_normal(rng);
  const double scale = 1.0 / std::sqrt(static_cast<double>(target_dim));

  std::vector<double> out(s.size() * target_dim, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto x = s.row(i);
    for (std::size_t r = 0; r < target_dim; ++r) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += g[r * d + j] * x[j];
      out[i * target_dim + r] = acc * scale;
    }
  }
  return PointSet(std::move(out), target_dim, s.norm(), s.ids());
}

}  // namespace recembed
