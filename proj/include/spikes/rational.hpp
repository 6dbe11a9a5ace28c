#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <string>
#include <string_view>

#include "spikes/error.hpp"

namespace spikes {

/// Exact rational number with 64-bit numerator and positive denominator,
/// always kept in lowest terms. Used for lattice-span detection, where a
/// float approximation would silently change the answer.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(implicit)
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) {
    require(d != 0, Errc::invalid_parameter, "rational with zero denominator");
    normalize();
  }

  /// Parses "3/10", "-7", "0.3" or "1.25e-2" exactly (decimal text is an
  /// exact rational; no rounding happens).
  static Rational parse(std::string_view text) {
    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
      return s;
    };
    text = trim(text);
    require(!text.empty(), Errc::invalid_parameter, "empty rational literal");
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      return Rational(parse_int(trim(text.substr(0, slash))), parse_int(trim(text.substr(slash + 1))));
    }
    int exp10 = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
      exp10 = static_cast<int>(parse_int(text.substr(e + 1)));
      text = text.substr(0, e);
    }
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
      negative = text.front() == '-';
      text.remove_prefix(1);
    }
    std::string digits;
    int frac_digits = 0;
    bool seen_point = false;
    for (char ch : text) {
      if (ch == '.') {
        require(!seen_point, Errc::invalid_parameter, "malformed decimal literal");
        seen_point = true;
      } else {
        require(ch >= '0' && ch <= '9', Errc::invalid_parameter,
                "malformed rational literal: " + std::string(text));
        digits.push_back(ch);
        if (seen_point) ++frac_digits;
      }
    }
    require(!digits.empty(), Errc::invalid_parameter, "malformed decimal literal");
    std::int64_t n = parse_int(digits);
    int scale = exp10 - frac_digits;
    std::int64_t d = 1;
    for (; scale > 0; --scale) n = checked_mul(n, 10);
    for (; scale < 0; ++scale) d = checked_mul(d, 10);
    return Rational(negative ? -n : n, d);
  }

  constexpr std::int64_t num() const noexcept { return num_; }
  constexpr std::int64_t den() const noexcept { return den_; }
  constexpr double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  bool is_zero() const noexcept { return num_ == 0; }
  bool is_integer() const noexcept { return den_ == 1; }

  friend Rational operator+(Rational a, Rational b) {
    const std::int64_t l = std::lcm(a.den_, b.den_);
    return Rational(checked_add(checked_mul(a.num_, l / a.den_), checked_mul(b.num_, l / b.den_)), l);
  }
  friend Rational operator-(Rational a) { return Rational(-a.num_, a.den_); }
  friend Rational operator-(Rational a, Rational b) { return a + (-b); }
  friend Rational operator*(Rational a, Rational b) {
    const std::int64_t g1 = std::gcd(a.num_, b.den_);
    const std::int64_t g2 = std::gcd(b.num_, a.den_);
    return Rational(checked_mul(a.num_ / (g1 ? g1 : 1), b.num_ / (g2 ? g2 : 1)),
                    checked_mul(a.den_ / (g2 ? g2 : 1), b.den_ / (g1 ? g1 : 1)));
  }
  friend Rational operator/(Rational a, Rational b) {
    require(b.num_ != 0, Errc::invalid_parameter, "rational division by zero");
    return a * Rational(b.den_, b.num_);
  }
  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(Rational a, Rational b) { return (a - b).num_ < 0; }
  friend bool operator>(Rational a, Rational b) { return b < a; }

  Rational abs() const { return Rational(num_ < 0 ? -num_ : num_, den_); }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }
  static std::int64_t parse_int(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc() && ptr == s.data() + s.size(), Errc::invalid_parameter,
            "malformed integer in rational literal: " + std::string(s));
    return v;
  }
  static std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r = 0;
    require(!__builtin_mul_overflow(a, b, &r), Errc::invalid_parameter, "rational overflow");
    return r;
  }
  static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r = 0;
    require(!__builtin_add_overflow(a, b, &r), Errc::invalid_parameter, "rational overflow");
    return r;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Largest positive q with a, b both in qZ. gcd(0, b) = |b|.
inline Rational rational_gcd(Rational a, Rational b) {
  const std::int64_t n = std::gcd(a.num(), b.num());
  const std::int64_t d = std::lcm(a.den(), b.den());
  return n == 0 ? Rational(0) : Rational(n, d);
}

}  // namespace spikes
