#include "doctest.h"

#include <cmath>
#include <vector>

#include "buoca/allocator.hpp"
#include "buoca/errors.hpp"
#include "buoca/oracle.hpp"
#include "buoca/rng.hpp"
#include "buoca/success_model.hpp"

using namespace buoca;

namespace {

AllocationProblem binomial_problem(const std::vector<double>& ps, int k) {
  AllocationProblem problem;
  problem.k = k;
  problem.unit_cost = 1;
  for (const double p : ps) problem.curves.push_back(binomial_success_curve(p, k));
  return problem;
}

}  // namespace

TEST_CASE("hand-enumerated two-sample instance at beta <= 4") {
  const auto problem = binomial_problem({0.9, 0.6}, 3);
  const auto result = exhaustive_optimal(problem, 4);
  CHECK(result.best_ccr == doctest::Approx(0.786).epsilon(1e-12));
  REQUIRE(result.best_allocations.size() == 1);
  CHECK(result.best_allocations[0].n == std::vector<int>{3, 1});
  // (1,1), (3,1), (1,3) are the only odd tuples costing <= 4.
  CHECK(result.evaluated_count == 3);
}

TEST_CASE("unbounded budget is maximized by all-k when every p > 0.5") {
  const auto problem = binomial_problem({0.9, 0.6, 0.7}, 5);
  const auto result = exhaustive_optimal(problem, Rational(5 * 3));
  REQUIRE(result.best_allocations.size() == 1);
  CHECK(result.best_allocations[0].n == std::vector<int>{5, 5, 5});
  CHECK(result.evaluated_count == 27);
}

TEST_CASE("flat curves make every feasible allocation a tie") {
  const auto problem = binomial_problem({0.5, 0.5}, 3);
  const auto result = exhaustive_optimal(problem, 6);
  CHECK(result.best_ccr == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(result.evaluated_count == 4);
  CHECK(result.best_allocations.size() == 4);
}

TEST_CASE("ties come back in lexicographic order") {
  const auto problem = binomial_problem({0.5, 0.5}, 3);
  const auto result = exhaustive_optimal(problem, 6);
  std::vector<std::vector<int>> got;
  for (const auto& alloc : result.best_allocations) got.push_back(alloc.n);
  const std::vector<std::vector<int>> expected{{1, 1}, {1, 3}, {3, 1}, {3, 3}};
  CHECK(got == expected);
}

TEST_CASE("infeasible budgets and oversized instances are refused") {
  const auto problem = binomial_problem({0.9, 0.6}, 3);
  CHECK_THROWS_AS(exhaustive_optimal(problem, 1), InfeasibleBudgetError);

  const auto big = binomial_problem(std::vector<double>(30, 0.8), 5);
  CHECK_THROWS_AS(exhaustive_optimal(big, Rational(30 * 5)), EnumerationCapError);

  OracleOptions loose;
  loose.enumeration_cap = 1;
  CHECK_THROWS_AS(exhaustive_optimal(problem, 4, loose), EnumerationCapError);
}

TEST_CASE("evaluated count matches the closed form when unconstrained") {
  Rng rng(606);
  for (int i = 0; i < 20; ++i) {
    const auto J = 1 + rng.bounded(4);
    const int k = rng.bounded(2) == 0 ? 3 : 5;
    std::vector<double> ps;
    for (std::uint64_t j = 0; j < J; ++j) ps.push_back(rng.uniform());
    const auto problem = binomial_problem(ps, k);
    const auto result =
        exhaustive_optimal(problem, Rational(static_cast<std::int64_t>(J) * k));
    std::uint64_t expected = 1;
    for (std::uint64_t j = 0; j < J; ++j) expected *= (k + 1) / 2;
    CHECK(result.evaluated_count == expected);
  }
}

TEST_CASE("greedy equals the oracle at every budget through the plateau") {
  Rng rng(1234);
  for (int i = 0; i < 40; ++i) {
    const auto J = 2 + static_cast<std::size_t>(rng.bounded(5));
    const int k = rng.bounded(2) == 0 ? 3 : 5;
    std::vector<double> ps;
    for (std::size_t j = 0; j < J; ++j) ps.push_back(1.0 - rng.uniform() * 0.5);
    const auto problem = binomial_problem(ps, k);
    const auto frontier = buoca_greedy(problem);
    for (const auto& point : frontier.points) {
      if (frontier.plateau_step && point.m > *frontier.plateau_step) break;
      const auto oracle = exhaustive_optimal(problem, point.budget);
      CHECK(std::fabs(point.ccr - oracle.best_ccr) <= 1e-12);
    }
  }
}

TEST_CASE("greedy never beats the oracle, even off the concave domain") {
  Rng rng(888);
  for (int i = 0; i < 30; ++i) {
    // Hand-scrambled curves: monotone structure is deliberately absent.
    AllocationProblem problem;
    problem.k = 5;
    problem.unit_cost = 1;
    const auto J = 1 + static_cast<std::size_t>(rng.bounded(3));
    for (std::size_t j = 0; j < J; ++j) {
      SuccessCurve curve;
      curve.k = 5;
      curve.values = {rng.uniform(), rng.uniform(), rng.uniform()};
      problem.curves.push_back(curve);
    }
    const auto frontier = buoca_greedy(problem);
    for (const auto& point : frontier.points) {
      const auto oracle = exhaustive_optimal(problem, point.budget);
      CHECK(point.ccr <= oracle.best_ccr + 1e-12);
    }
  }
}

TEST_CASE("a non-concave curve produces a strict greedy-oracle gap") {
  AllocationProblem problem;
  problem.k = 5;
  problem.unit_cost = 1;
  SuccessCurve trap;
  trap.k = 5;
  trap.values = {0.5, 0.4, 0.9};  // dips before it pays off
  problem.curves.push_back(trap);

  const auto frontier = buoca_greedy(problem);
  CHECK(frontier.plateau_step == 2);
  const auto& last = frontier.points.back();
  CHECK(last.budget == Rational(5));
  CHECK(last.ccr == doctest::Approx(0.5).epsilon(1e-12));

  const auto oracle = exhaustive_optimal(problem, 5);
  CHECK(oracle.best_ccr == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(oracle.best_ccr > last.ccr + 0.1);
}
