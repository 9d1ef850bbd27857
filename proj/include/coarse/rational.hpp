#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>

#include "coarse/error.hpp"

namespace coarse {

// Exact rational with 64-bit numerator/denominator, always normalised
// (gcd 1, positive denominator). Magnitudes in this library stay tiny
// (graph distances over small grid denominators), so no overflow guarding
// beyond the 128-bit cross multiplication in comparisons.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalise(); }

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  // Largest integer <= value.
  std::int64_t floor() const noexcept {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
  }
  std::int64_t ceil() const noexcept {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
  }

  friend Rational operator+(Rational a, Rational b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator-(Rational a, Rational b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator*(Rational a, Rational b) {
    return {a.num_ * b.num_, a.den_ * b.den_};
  }
  friend Rational operator/(Rational a, Rational b) {
    if (b.num_ == 0) throw InputError("rational division by zero");
    return {a.num_ * b.den_, a.den_ * b.num_};
  }
  Rational operator-() const { return {-num_, den_}; }
  Rational& operator+=(Rational o) { return *this = *this + o; }
  Rational& operator-=(Rational o) { return *this = *this - o; }

  friend bool operator==(Rational a, Rational b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(Rational a, Rational b) {
    const __int128 l = static_cast<__int128>(a.num_) * b.den_;
    const __int128 r = static_cast<__int128>(b.num_) * a.den_;
    return l <=> r;
  }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_)
                     : std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Accepts "p", "p/q" or a finite decimal such as "0.25".
  static Rational parse(const std::string& text);

  friend std::ostream& operator<<(std::ostream& os, Rational r) {
    return os << r.str();
  }

 private:
  void normalise() {
    if (den_ == 0) throw InputError("rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational max(Rational a, Rational b) { return a < b ? b : a; }
inline Rational min(Rational a, Rational b) { return b < a ? b : a; }

}  // namespace coarse
