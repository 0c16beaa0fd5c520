#include "buoca/oracle.hpp"

#include <cmath>
#include <string>

#include "buoca/errors.hpp"

namespace buoca {

namespace {

// Depth-first walk over odd worker counts per sample, pruning any prefix
// that cannot be completed with one worker for each remaining sample.
struct Enumerator {
  const AllocationProblem& problem;
  const OracleOptions& options;
  std::int64_t budget_workers;  // floor(beta / c) in whole workers
  OracleResult result;
  Allocation current;
  double ccr_sum = 0.0;
  std::int64_t workers_used = 0;

  void walk(std::size_t depth) {
    const auto J = problem.size();
    if (depth == J) {
      ++result.evaluated_count;
      const double value = ccr_sum / static_cast<double>(J);
      if (result.best_allocations.empty() ||
          value > result.best_ccr + options.tie_tolerance) {
        result.best_ccr = value;
        result.best_allocations.clear();
        result.best_allocations.push_back(current);
      } else if (value >= result.best_ccr - options.tie_tolerance) {
        result.best_allocations.push_back(current);
        // Keep the reported optimum exact even when ties creep upward.
        if (value > result.best_ccr) result.best_ccr = value;
      }
      return;
    }
    const auto remaining = static_cast<std::int64_t>(J - depth - 1);
    for (int n = 1; n <= problem.k; n += 2) {
      if (workers_used + n + remaining > budget_workers) break;
      current.n[depth] = n;
      workers_used += n;
      ccr_sum += problem.curves[depth].at(n);
      walk(depth + 1);
      ccr_sum -= problem.curves[depth].at(n);
      workers_used -= n;
    }
  }
};

}  // namespace

OracleResult exhaustive_optimal(const AllocationProblem& problem, const Rational& beta,
                                const OracleOptions& options) {
  problem.validate();
  const auto J = problem.size();

  const Rational min_cost = problem.unit_cost * static_cast<std::int64_t>(J);
  if (beta < min_cost) {
    throw InfeasibleBudgetError("budget " + beta.str() +
                                " cannot buy one worker per sample (needs " +
                                min_cost.str() + ")");
  }

  const auto levels = static_cast<std::uint64_t>((problem.k + 1) / 2);
  std::uint64_t space = 1;
  for (std::size_t j = 0; j < J; ++j) {
    if (space > options.enumeration_cap / levels) {
      throw EnumerationCapError("oracle search space exceeds the enumeration cap of " +
                                std::to_string(options.enumeration_cap));
    }
    space *= levels;
  }
  if (space > options.enumeration_cap) {
    throw EnumerationCapError("oracle search space exceeds the enumeration cap of " +
                              std::to_string(options.enumeration_cap));
  }

  // Whole workers affordable: cost c*W <= beta  <=>  W <= beta/c.
  const Rational per_worker = beta * Rational(problem.unit_cost.den(),
                                              problem.unit_cost.num());
  const std::int64_t budget_workers = per_worker.num() / per_worker.den();

  Enumerator enumerator{problem, options, budget_workers, {}, Allocation{}, 0.0, 0};
  enumerator.current.n.assign(J, 1);
  enumerator.walk(0);
  return enumerator.result;
}

}  // namespace buoca
