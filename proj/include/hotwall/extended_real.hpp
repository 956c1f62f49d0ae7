#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace hotwall {

/// A value in [0, +inf]. Multiplication follows the convention 0 * inf = 0.
///
/// The scalar is a template parameter so the same arithmetic can be run on
/// exact rationals when identities must hold bit-for-bit.
template <typename Scalar>
class BasicExtendedReal {
 public:
  BasicExtendedReal() : value_(0), infinite_(false) {}

  // NOLINTNEXTLINE(google-explicit-constructor)
  BasicExtendedReal(Scalar v) : value_(std::move(v)), infinite_(false) {
    if constexpr (std::is_floating_point_v<Scalar>) {
      if (std::isnan(value_)) throw std::domain_error("ExtendedReal: NaN");
      if (std::isinf(value_)) {
        if (value_ < 0) throw std::domain_error("ExtendedReal: negative infinity");
        value_ = Scalar(0);
        infinite_ = true;
        return;
      }
    }
    if (value_ < Scalar(0)) throw std::domain_error("ExtendedReal: negative value");
  }

  static BasicExtendedReal infinity() {
    BasicExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }
  bool is_zero() const { return !infinite_ && value_ == Scalar(0); }

  /// Finite value; throws for +inf.
  const Scalar& value() const {
    if (infinite_) throw std::domain_error("ExtendedReal: value() of +inf");
    return value_;
  }

  /// Conversion to double, +inf mapped to HUGE_VAL.
  double to_double() const {
    if (infinite_) return std::numeric_limits<double>::infinity();
    return static_cast<double>(value_);
  }

  friend BasicExtendedReal operator+(const BasicExtendedReal& a, const BasicExtendedReal& b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return BasicExtendedReal(a.value_ + b.value_);
  }

  friend BasicExtendedReal operator*(const BasicExtendedReal& a, const BasicExtendedReal& b) {
    if (a.is_zero() || b.is_zero()) return BasicExtendedReal();
    if (a.infinite_ || b.infinite_) return infinity();
    return BasicExtendedReal(a.value_ * b.value_);
  }

  /// a - b for a >= b. inf - finite = inf; inf - inf is undefined and throws.
  friend BasicExtendedReal operator-(const BasicExtendedReal& a, const BasicExtendedReal& b) {
    if (a.infinite_ && b.infinite_) throw std::domain_error("ExtendedReal: inf - inf");
    if (a.infinite_) return infinity();
    if (b.infinite_) throw std::domain_error("ExtendedReal: finite - inf is negative");
    if (a.value_ < b.value_) throw std::domain_error("ExtendedReal: negative difference");
    return BasicExtendedReal(a.value_ - b.value_);
  }

  BasicExtendedReal& operator+=(const BasicExtendedReal& o) { return *this = *this + o; }
  BasicExtendedReal& operator*=(const BasicExtendedReal& o) { return *this = *this * o; }

  /// 1/x with 1/0 = +inf and 1/inf = 0.
  BasicExtendedReal reciprocal() const {
    if (infinite_) return BasicExtendedReal();
    if (value_ == Scalar(0)) return infinity();
    return BasicExtendedReal(Scalar(1) / value_);
  }

  friend bool operator==(const BasicExtendedReal& a, const BasicExtendedReal& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }

  friend std::partial_ordering operator<=>(const BasicExtendedReal& a,
                                           const BasicExtendedReal& b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    if (a.value_ < b.value_) return std::partial_ordering::less;
    if (b.value_ < a.value_) return std::partial_ordering::greater;
    return std::partial_ordering::equivalent;
  }

  friend std::ostream& operator<<(std::ostream& os, const BasicExtendedReal& x) {
    if (x.infinite_) return os << "inf";
    return os << x.value_;
  }

 private:
  Scalar value_;
  bool infinite_;
};

using ExtendedReal = BasicExtendedReal<double>;

}  // namespace hotwall
