#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace buoca {

// Exact rational arithmetic for unit costs, budgets, and totals.
// The numerator carries the sign, the denominator is always positive.
// Magnitudes stay tiny (unit cost times worker counts), so int64 storage
// with 128-bit intermediates is plenty; overflow still throws rather than
// wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT: implicit by design
  Rational(std::int64_t num, std::int64_t den);

  // Accepts "5", "-7", "0.25", "1e-3", and "3/4" forms.
  static Rational parse(std::string_view text);
  // Exact value of the shortest decimal form that round-trips the double.
  static Rational from_double(double value);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  bool is_negative() const { return num_ < 0; }
  double to_double() const;

  // Exact decimal string when the denominator divides a power of ten
  // ("174.5"), otherwise "num/den".
  std::string str() const;

  Rational operator-() const;
  Rational operator+(const Rational& other) const;
  Rational operator-(const Rational& other) const;
  Rational operator*(const Rational& other) const;
  Rational operator*(std::int64_t scale) const;

  bool operator==(const Rational& other) const;
  bool operator!=(const Rational& other) const { return !(*this == other); }
  bool operator<(const Rational& other) const;
  bool operator>(const Rational& other) const { return other < *this; }
  bool operator<=(const Rational& other) const { return !(other < *this); }
  bool operator>=(const Rational& other) const { return !(*this < other); }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational operator*(std::int64_t scale, const Rational& r) { return r * scale; }

}  // namespace buoca
