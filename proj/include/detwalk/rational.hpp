#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>

#include "detwalk/error.hpp"

namespace detwalk {

using i128 = __int128;

namespace detail {

inline std::int64_t narrow_checked(i128 value, const char* what) {
  if (value > INT64_MAX || value < INT64_MIN) {
    throw Error(Errc::Overflow, what);
  }
  return static_cast<std::int64_t>(value);
}

inline i128 mul_checked(i128 a, i128 b) {
  i128 out;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(Errc::Overflow, "128-bit product");
  return out;
}

inline i128 abs128(i128 v) { return v < 0 ? -v : v; }

inline i128 gcd128(i128 a, i128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    i128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

}  // namespace detail

/// Exact fraction with 64-bit components, always stored reduced with a
/// positive denominator. Products and sums are formed in 128 bits and
/// narrowed back, throwing Errc::Overflow when the reduced result does not fit.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1) {  // NOLINT(google-explicit-constructor)
    if (den == 0) throw Error(Errc::BadParams, "zero denominator");
    assign(num, den);
  }

  static Rational from_wide(i128 num, i128 den) {
    if (den == 0) throw Error(Errc::BadParams, "zero denominator");
    Rational r;
    r.assign(num, den);
    return r;
  }

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// floor(count * value), exact.
  i128 floor_times(i128 count) const {
    i128 prod = detail::mul_checked(count, num_);
    i128 q = prod / den_;
    if ((prod % den_ != 0) && (prod < 0)) --q;
    return q;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_wide(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                     static_cast<i128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from_wide(static_cast<i128>(a.num_) * b.den_ - static_cast<i128>(b.num_) * a.den_,
                     static_cast<i128>(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    i128 lhs = static_cast<i128>(a.num_) * b.den_;
    i128 rhs = static_cast<i128>(b.num_) * a.den_;
    return lhs <=> rhs;
  }

  std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

 private:
  void assign(i128 num, i128 den) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    i128 g = detail::gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    num_ = detail::narrow_checked(num, "rational numerator");
    den_ = detail::narrow_checked(den, "rational denominator");
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Probability entry of a transition matrix: a Rational constrained to [0, 1].
class Probability {
 public:
  Probability() = default;
  explicit Probability(Rational value) : value_(value) {
    if (value < Rational(0) || value > Rational(1)) {
      throw Error(Errc::BadParams, "probability outside [0,1]: " + value.str());
    }
  }
  Probability(std::int64_t num, std::int64_t den) : Probability(Rational(num, den)) {}

  const Rational& value() const noexcept { return value_; }
  std::int64_t num() const noexcept { return value_.num(); }
  std::int64_t den() const noexcept { return value_.den(); }
  double to_double() const noexcept { return value_.to_double(); }

  friend bool operator==(const Probability&, const Probability&) = default;

 private:
  Rational value_;
};

}  // namespace detwalk
