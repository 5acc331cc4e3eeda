#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace funcineq {

/// Real number extended by +infinity.
///
/// Conjugates of profiles with finite growth rate, transport bounds past the
/// admissible window and moment constants all live in [.., +inf]. The value is
/// carried as an IEEE double whose only non-finite state is +inf; NaN and -inf
/// are rejected at construction.
class Extended {
 public:
  constexpr Extended() = default;
  Extended(double v) : value_(v) {  // NOLINT: implicit from finite doubles
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity())
      throw std::domain_error("Extended: value must be a real number or +inf");
  }

  static Extended infinity() { return Extended(std::numeric_limits<double>::infinity()); }

  bool is_finite() const { return std::isfinite(value_); }
  bool is_infinite() const { return !is_finite(); }
  double value() const { return value_; }

  friend Extended operator+(Extended a, Extended b) { return Extended(a.value_ + b.value_); }
  friend Extended operator-(Extended a, double b) { return Extended(a.value_ - b); }
  /// Scaling by a non-negative factor; 0 * inf is taken as 0.
  friend Extended operator*(double k, Extended a) {
    if (k == 0.0) return Extended(0.0);
    if (k < 0.0) throw std::domain_error("Extended: negative scale");
    return Extended(k * a.value_);
  }
  friend Extended operator/(Extended a, double k) {
    if (!(k > 0.0)) throw std::domain_error("Extended: division by non-positive");
    return Extended(a.value_ / k);
  }

  friend bool operator==(Extended a, Extended b) { return a.value_ == b.value_; }
  friend auto operator<=>(Extended a, Extended b) { return a.value_ <=> b.value_; }

  friend std::ostream& operator<<(std::ostream& os, Extended e) {
    if (e.is_infinite()) return os << "inf";
    return os << e.value_;
  }

 private:
  double value_ = 0.0;
};

inline Extended exp(Extended e) { return Extended(std::exp(e.value())); }

}  // namespace funcineq
