#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace buoca {

// Majority-vote success probabilities at odd worker counts t = 1,3,...,k.
// values[(t-1)/2] = q(t). Even t is undefined by construction.
struct SuccessCurve {
  int k = 1;
  std::vector<double> values;

  double at(int t) const;  // throws ValidationError for even/out-of-range t
  int steps() const { return (k + 1) / 2; }
  void validate() const;
};

// Exact binomial coefficient; requires 0 <= i <= t <= 63 (fits in uint64).
std::uint64_t binomial_coefficient(int t, int i);

// q(t) = sum_{i=ceil(t/2)}^{t} C(t,i) p^i (1-p)^(t-i) at each odd t <= k:
// the chance that a strict majority of t independent workers with per-label
// accuracy p matches the reference label. Terms are accumulated
// smallest-first to keep the summation stable. q(1) == p exactly.
SuccessCurve binomial_success_curve(double p, int k);

// [(t, q(t+2) - q(t))] for odd t in [1, k-2]; empty when k == 1.
std::vector<std::pair<int, double>> first_order_differences(const SuccessCurve& curve);

enum class CurveClass { NonIncreasing, NonDecreasingConcave, Other };

// NonDecreasingConcave: all differences >= -tol and non-increasing within
// tol. NonIncreasing: all differences <= tol. A constant curve satisfies
// both and is reported NonDecreasingConcave.
CurveClass classify_curve(const SuccessCurve& curve, double tol = 1e-9);

// Closed-form identities satisfied by the binomial curve, checked
// numerically. With t = 2m-1:
//   difference:   q(t+2) - q(t) == C(2m-1,m) p^m (1-p)^(m-1) * (1-p)(2p-1)
//   ratio:        (q(t+4)-q(t+2)) / (q(t+2)-q(t)) == 2p(1-p)(2m+1)/(m+1)
//   ratio < 1 strictly (so the curve is strictly concave) for p not in
//   {0, 1/2, 1}; the ratio checks are skipped at those p.
// Difference left sides come from the direct summation; the ratio's left
// side is the quotient of closed-form differences, because differencing
// the summed curve cancels catastrophically once q saturates near 1. The
// right sides are evaluated independently in reduced form.
enum class IdentityKind { difference, ratio, ratio_below_one };

struct IdentityCheck {
  IdentityKind kind;
  int t;
  double lhs;
  double rhs;
  double deviation;
  bool pass;
};

struct Theorem2Report {
  double p = 0.0;
  int k = 1;
  double tol = 0.0;
  std::vector<IdentityCheck> checks;
  double max_abs_deviation = 0.0;
  bool all_pass = true;
};

Theorem2Report verify_theorem2_identities(double p, int k, double tol = 1e-12);

}  // namespace buoca
