#pragma once

#include <string>
#include <string_view>

namespace recembed {

/// Exponent p of an l_p norm. p = infinity is a distinguished state, never a
/// floating-point sentinel.
class NormExponent {
 public:
  /// Finite exponent; throws DomainError unless 1 <= p < inf.
  explicit NormExponent(double p);

  static NormExponent infinity() { return NormExponent(); }

  /// Accepts a decimal value or "inf".
  static NormExponent parse(std::string_view text);

  bool is_infinite() const { return infinite_; }

  /// Finite value; throws DomainError for p = inf.
  double value() const;

  /// "inf" or the shortest round-trip decimal.
  std::string to_string() const;

  friend bool operator==(const NormExponent& a, const NormExponent& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.p_ == b.p_);
  }

 private:
  NormExponent() : p_(0.0), infinite_(true) {}

  double p_;
  bool infinite_;
};

}  // namespace recembed
