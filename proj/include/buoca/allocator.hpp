#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "json.hpp"

#include "buoca/pilot.hpp"
#include "buoca/rational.hpp"
#include "buoca/success_model.hpp"

namespace buoca {

// One success curve per sample, a shared odd worker cap, and a positive
// unit cost per worker-label.
struct AllocationProblem {
  std::vector<SuccessCurve> curves;
  Rational unit_cost = 1;
  int k = 1;

  std::size_t size() const { return curves.size(); }
  void validate() const;

  // Binomial curves from pilot estimates. k_max = 0 keeps the pilot's k;
  // a larger odd k_max extrapolates the model beyond the pilot pool.
  static AllocationProblem from_estimates(const SuccessEstimates& estimates,
                                          const Rational& unit_cost, int k_max = 0);
};

// Per-sample worker counts; every entry odd and within [1, k].
struct Allocation {
  std::vector<int> n;

  std::size_t size() const { return n.size(); }
  int total_workers() const;
  void validate(int k) const;
  static Allocation constant(std::size_t count, int value);
};

Rational allocation_cost(const Allocation& alloc, const Rational& unit_cost);

// Mean success probability across samples at the given worker counts.
double ccr(const Allocation& alloc, const AllocationProblem& problem);

struct FrontierPoint {
  int m = 1;            // 1-based step index
  Rational budget;      // c * (J + 2m - 2)
  Rational cost;        // c * total assigned workers (== budget pre-plateau)
  double ccr = 0.0;
  Allocation allocation;
};

struct BudgetFrontier {
  std::vector<FrontierPoint> points;  // exactly 1 + J(k-1)/2 of them
  std::optional<int> plateau_step;    // first step whose best gain was <= 0
  std::size_t J = 0;
  int k = 1;
  Rational unit_cost = 1;
};

// Greedy frontier: start at one worker per sample; each step adds two
// workers to the sample with the largest success gain (ties break to the
// lowest sample index) while that gain is strictly positive. Budget
// advances by 2c per step regardless, so the allocation freezes and the
// budget keeps growing once no gain is positive.
BudgetFrontier buoca_greedy(const AllocationProblem& problem);

// Sort-once variant: applies all J(k-1)/2 first-order differences in
// decreasing order. Valid only when every curve classifies NonIncreasing
// or NonDecreasingConcave (otherwise throws PreconditionError); under that
// hypothesis its (cost, ccr) trajectory matches buoca_greedy.
BudgetFrontier buoca_sorted(const AllocationProblem& problem);

// Frontier point with the largest budget <= beta; throws
// InfeasibleBudgetError when beta cannot buy one worker per sample.
const FrontierPoint& allocation_at_budget(const BudgetFrontier& frontier,
                                          const Rational& beta);

// Class histogram of an allocation (worker count -> samples using it).
std::map<int, std::size_t> allocation_class_counts(const Allocation& alloc);

// Model-predicted (cost, ccr) for the constant allocations n = 1,3,...,k;
// the fixed-assignment baselines the frontier is compared against.
struct FixedCurvePoint {
  int n = 1;
  Rational cost;
  double ccr = 0.0;
};
std::vector<FixedCurvePoint> fixed_allocation_curve(const AllocationProblem& problem);

// CSV schema: m,budget,cost,ccr[,n_1..n_J]. Budgets and costs are exact
// decimal strings; ccr is the shortest round-trip double.
void write_frontier_csv(const BudgetFrontier& frontier, std::ostream& out,
                        bool include_allocations = true);

nlohmann::json frontier_to_json(const BudgetFrontier& frontier,
                                bool include_allocations = true);

}  // namespace buoca
