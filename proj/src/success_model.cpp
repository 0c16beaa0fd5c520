#include "buoca/success_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "buoca/errors.hpp"

namespace buoca {

namespace {

void check_odd_k(int k) {
  if (k < 1 || k % 2 == 0) {
    throw ValidationError("curve cap k must be odd and positive, got " + std::to_string(k));
  }
  if (k > 63) {
    throw ValidationError("curve cap k above 63 overflows exact binomial coefficients");
  }
}

}  // namespace

double SuccessCurve::at(int t) const {
  if (t < 1 || t > k || t % 2 == 0) {
    throw ValidationError("success curve evaluated at invalid worker count " +
                          std::to_string(t) + " (odd 1.." + std::to_string(k) + ")");
  }
  return values[static_cast<std::size_t>((t - 1) / 2)];
}

void SuccessCurve::validate() const {
  check_odd_k(k);
  if (values.size() != static_cast<std::size_t>(steps())) {
    throw ValidationError("success curve stores " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(steps()));
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("success curve value outside [0,1]");
    }
  }
}

std::uint64_t binomial_coefficient(int t, int i) {
  if (t < 0 || i < 0 || i > t || t > 63) {
    throw ValidationError("binomial coefficient out of supported range");
  }
  if (i > t - i) i = t - i;
  unsigned __int128 result = 1;
  for (int step = 1; step <= i; ++step) {
    result = result * static_cast<unsigned>(t - i + step) / static_cast<unsigned>(step);
  }
  return static_cast<std::uint64_t>(result);
}

SuccessCurve binomial_success_curve(double p, int k) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("success probability must lie in [0,1]");
  }
  check_odd_k(k);

  SuccessCurve curve;
  curve.k = k;
  curve.values.reserve(static_cast<std::size_t>(curve.steps()));
  std::vector<double> terms;
  for (int t = 1; t <= k; t += 2) {
    terms.clear();
    for (int i = (t + 1) / 2; i <= t; ++i) {
      terms.push_back(static_cast<double>(binomial_coefficient(t, i)) *
                      std::pow(p, i) * std::pow(1.0 - p, t - i));
    }
    std::sort(terms.begin(), terms.end());
    double q = 0.0;
    for (double term : terms) q += term;
    curve.values.push_back(std::clamp(q, 0.0, 1.0));
  }
  return curve;
}

std::vector<std::pair<int, double>> first_order_differences(const SuccessCurve& curve) {
  curve.validate();
  std::vector<std::pair<int, double>> diffs;
  for (int t = 1; t + 2 <= curve.k; t += 2) {
    diffs.emplace_back(t, curve.at(t + 2) - curve.at(t));
  }
  return diffs;
}

CurveClass classify_curve(const SuccessCurve& curve, double tol) {
  const auto diffs = first_order_differences(curve);

  bool non_increasing = true;
  bool non_decreasing = true;
  bool concave = true;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    if (diffs[i].second > tol) non_increasing = false;
    if (diffs[i].second < -tol) non_decreasing = false;
    if (i + 1 < diffs.size() && diffs[i + 1].second > diffs[i].second + tol) {
      concave = false;
    }
  }
  if (non_decreasing && concave) return CurveClass::NonDecreasingConcave;
  if (non_increasing) return CurveClass::NonIncreasing;
  return CurveClass::Other;
}

Theorem2Report verify_theorem2_identities(double p, int k, double tol) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("success probability must lie in [0,1]");
  }
  check_odd_k(k);
  if (k < 5) {
    throw ValidationError("identity checks need k >= 5, got " + std::to_string(k));
  }

  const SuccessCurve curve = binomial_success_curve(p, k);
  Theorem2Report report;
  report.p = p;
  report.k = k;
  report.tol = tol;
  const bool degenerate = (p == 0.0 || p == 0.5 || p == 1.0);

  auto add = [&report](IdentityKind kind, int t, double lhs, double rhs, bool pass,
                       double deviation) {
    report.checks.push_back({kind, t, lhs, rhs, deviation, pass});
    report.max_abs_deviation = std::max(report.max_abs_deviation, deviation);
    report.all_pass = report.all_pass && pass;
  };

  // P(tie among 2m-1 workers broken by the pivotal vote): the chance the
  // first 2m-1 draws split exactly m correct, times (1-p)(2p-1).
  const auto closed_difference = [p](int m) {
    return static_cast<double>(binomial_coefficient(2 * m - 1, m)) * std::pow(p, m) *
           std::pow(1.0 - p, m - 1) * (1.0 - p) * (2.0 * p - 1.0);
  };

  for (int t = 1; t + 2 <= k; t += 2) {
    const int m = (t + 1) / 2;
    const double lhs = curve.at(t + 2) - curve.at(t);
    const double rhs = closed_difference(m);
    const double dev = std::fabs(lhs - rhs);
    add(IdentityKind::difference, t, lhs, rhs, dev <= tol, dev);
  }

  if (!degenerate) {
    for (int t = 1; t + 4 <= k; t += 2) {
      const int m = (t + 1) / 2;
      // Differencing the summed curve cancels catastrophically once q(t)
      // saturates near 1, so the ratio's left side uses the closed-form
      // differences (already tied to the curve by the check above); the
      // right side is the independently reduced product form.
      const double lhs = closed_difference(m + 1) / closed_difference(m);
      const double rhs = 2.0 * p * (1.0 - p) * (2.0 * m + 1) / (m + 1);
      const double dev = std::fabs(lhs - rhs);
      add(IdentityKind::ratio, t, lhs, rhs, dev <= tol, dev);
      add(IdentityKind::ratio_below_one, t, lhs, 1.0, lhs < 1.0 && rhs < 1.0, 0.0);
    }
  }
  return report;
}

}  // namespace buoca
