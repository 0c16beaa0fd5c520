#include "buoca/rational.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "buoca/errors.hpp"

namespace buoca {

namespace {

using Wide = __int128;

std::int64_t checked_narrow(Wide v, const char* what) {
  if (v > Wide(INT64_MAX) || v < Wide(INT64_MIN)) {
    throw ValidationError(std::string("rational overflow in ") + what);
  }
  return static_cast<std::int64_t>(v);
}

// Reduce and normalize the sign of a fraction in the 128-bit domain.
void reduce_wide(Wide& num, Wide& den) {
  if (den == 0) throw ValidationError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide a = num < 0 ? -num : num;
  Wide b = den;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
}

Rational make_reduced(Wide num, Wide den, const char* what) {
  reduce_wide(num, den);
  return Rational(checked_narrow(num, what), checked_narrow(den, what));
}

std::int64_t pow10_i64(int exp) {
  std::int64_t v = 1;
  for (int i = 0; i < exp; ++i) {
    if (v > INT64_MAX / 10) throw ValidationError("rational overflow in decimal parse");
    v *= 10;
  }
  return v;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  Wide n = num;
  Wide d = den;
  reduce_wide(n, d);
  num_ = checked_narrow(n, "constructor");
  den_ = checked_narrow(d, "constructor");
}

Rational Rational::parse(std::string_view text) {
  if (text.empty()) throw ParseError("empty rational literal");
  const std::string s(text);

  if (auto slash = s.find('/'); slash != std::string::npos) {
    const std::string ns = s.substr(0, slash);
    const std::string ds = s.substr(slash + 1);
    std::int64_t n = 0, d = 0;
    auto rn = std::from_chars(ns.data(), ns.data() + ns.size(), n);
    auto rd = std::from_chars(ds.data(), ds.data() + ds.size(), d);
    if (rn.ec != std::errc() || rn.ptr != ns.data() + ns.size() ||
        rd.ec != std::errc() || rd.ptr != ds.data() + ds.size()) {
      throw ParseError("bad rational literal: " + s);
    }
    return Rational(n, d);
  }

  // Decimal, optionally with an exponent: [-]digits[.digits][e[+-]digits]
  std::size_t pos = 0;
  bool negative = false;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    negative = s[pos] == '-';
    ++pos;
  }
  Wide mantissa = 0;
  int frac_digits = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      if (mantissa > Wide(INT64_MAX)) throw ParseError("rational literal too large: " + s);
      if (seen_point) ++frac_digits;
      any_digit = true;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else if ((c == 'e' || c == 'E') && any_digit) {
      break;
    } else {
      throw ParseError("bad rational literal: " + s);
    }
  }
  int exponent = 0;
  if (pos < s.size()) {
    ++pos;  // past 'e'
    if (pos < s.size() && s[pos] == '+') ++pos;  // from_chars takes '-' but not '+'
    auto re = std::from_chars(s.data() + pos, s.data() + s.size(), exponent);
    if (re.ec != std::errc() || re.ptr != s.data() + s.size()) {
      throw ParseError("bad rational literal: " + s);
    }
  }
  if (!any_digit) throw ParseError("bad rational literal: " + s);

  std::int64_t n = static_cast<std::int64_t>(negative ? -mantissa : mantissa);
  const int net = exponent - frac_digits;
  if (net >= 0) {
    const std::int64_t scale = pow10_i64(net);
    return make_reduced(Wide(n) * scale, 1, "decimal parse");
  }
  return make_reduced(n, pow10_i64(-net), "decimal parse");
}

Rational Rational::from_double(double value) {
  if (!std::isfinite(value)) throw ValidationError("non-finite value is not a rational");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return parse(std::string_view(buf, res.ptr - buf));
}

double Rational::to_double() const {
  return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  // Find m with den | 10^m (denominator of the form 2^a 5^b).
  std::int64_t rest = den_;
  int twos = 0, fives = 0;
  while (rest % 2 == 0) {
    rest /= 2;
    ++twos;
  }
  while (rest % 5 == 0) {
    rest /= 5;
    ++fives;
  }
  const int m = twos > fives ? twos : fives;
  if (rest != 1 || m > 18) {
    return std::to_string(num_) + "/" + std::to_string(den_);
  }
  Wide pow10 = 1;
  for (int i = 0; i < m; ++i) pow10 *= 10;
  const Wide scaled = Wide(num_) * (pow10 / den_);
  const Wide ip = scaled / pow10;
  Wide fp = scaled % pow10;
  if (fp < 0) fp = -fp;
  std::string frac(static_cast<std::size_t>(m), '0');
  for (int i = m - 1; i >= 0; --i) {
    frac[static_cast<std::size_t>(i)] = static_cast<char>('0' + int(fp % 10));
    fp /= 10;
  }
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string head = (num_ < 0 && ip == 0) ? "-0" : std::to_string(checked_narrow(ip, "str"));
  return head + "." + frac;
}

Rational Rational::operator-() const {
  Rational r;
  r.num_ = -num_;
  r.den_ = den_;
  return r;
}

Rational Rational::operator+(const Rational& o) const {
  return make_reduced(Wide(num_) * o.den_ + Wide(o.num_) * den_, Wide(den_) * o.den_, "+");
}

Rational Rational::operator-(const Rational& o) const {
  return make_reduced(Wide(num_) * o.den_ - Wide(o.num_) * den_, Wide(den_) * o.den_, "-");
}

Rational Rational::operator*(const Rational& o) const {
  return make_reduced(Wide(num_) * o.num_, Wide(den_) * o.den_, "*");
}

Rational Rational::operator*(std::int64_t scale) const {
  return make_reduced(Wide(num_) * scale, den_, "*");
}

bool Rational::operator==(const Rational& o) const {
  return num_ == o.num_ && den_ == o.den_;
}

bool Rational::operator<(const Rational& o) const {
  return Wide(num_) * o.den_ < Wide(o.num_) * den_;
}

}  // namespace buoca
