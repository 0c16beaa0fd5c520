#pragma once

#include <cstdint>
#include <vector>

#include "buoca/allocator.hpp"

namespace buoca {

struct OracleOptions {
  // Upper bound on the full search-space size ((k+1)/2)^J before any
  // feasibility pruning; enumeration refuses to start above it.
  std::uint64_t enumeration_cap = 10'000'000;
  // Allocations within this distance of the best ccr count as ties.
  double tie_tolerance = 1e-12;
};

struct OracleResult {
  double best_ccr = 0.0;
  // Every optimal allocation within the tie tolerance, in lexicographic
  // order by sample index.
  std::vector<Allocation> best_allocations;
  // Feasible allocations actually evaluated.
  std::uint64_t evaluated_count = 0;
};

// Ground truth by brute force: enumerates all odd-valued allocations with
// cost <= beta and returns the ccr maximizer(s). Throws
// InfeasibleBudgetError when beta < cJ and EnumerationCapError when the
// search space exceeds the cap.
OracleResult exhaustive_optimal(const AllocationProblem& problem, const Rational& beta,
                                const OracleOptions& options = {});

}  // namespace buoca
