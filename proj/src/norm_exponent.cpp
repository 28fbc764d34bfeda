#include "recembed/norm_exponent.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "recembed/error.hpp"

namespace recembed {

NormExponent::NormExponent(double p) : p_(p), infinite_(false) {
  if (!std::isfinite(p) || p < 1.0) {
    throw DomainError("norm exponent must satisfy 1 <= p < inf (use infinity() for inf), got " +
                      std::to_string(p));
  }
}

NormExponent NormExponent::parse(std::string_view text) {
  if (text == "inf" || text == "infinity" || text == "Inf") return infinity();
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DomainError("cannot parse norm exponent '" + std::string(text) + "'");
  }
  return NormExponent(value);
}

double NormExponent::value() const {
  if (infinite_) throw DomainError("operation needs a finite norm exponent, got inf");
  return p_;
}

std::string NormExponent::to_string() const {
  if (infinite_) return "inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), p_);
  return std::string(buf, ptr);
}

}  // namespace recembed
