#include "doctest.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "buoca/allocator.hpp"
#include "buoca/errors.hpp"
#include "buoca/rng.hpp"
#include "buoca/success_model.hpp"

using namespace buoca;

namespace {

AllocationProblem binomial_problem(const std::vector<double>& ps, int k,
                                   const Rational& unit_cost = 1) {
  AllocationProblem problem;
  problem.k = k;
  problem.unit_cost = unit_cost;
  for (const double p : ps) problem.curves.push_back(binomial_success_curve(p, k));
  return problem;
}

AllocationProblem random_concave_problem(Rng& rng) {
  const auto J = 2 + static_cast<std::size_t>(rng.bounded(5));
  const int k = rng.bounded(2) == 0 ? 3 : 5;
  std::vector<double> ps;
  for (std::size_t j = 0; j < J; ++j) ps.push_back(1.0 - rng.uniform() * 0.5);
  return binomial_problem(ps, k);
}

}  // namespace

TEST_CASE("allocation cost is the unit cost times total workers") {
  CHECK(allocation_cost(Allocation{{1, 1, 1}}, 5) == Rational(15));
  CHECK(allocation_cost(Allocation{{3, 1}}, 1) == Rational(4));
  CHECK(allocation_cost(Allocation::constant(970, 1), 5) == Rational(4850));
  CHECK(allocation_cost(Allocation{{3, 5}}, Rational(1, 2)) == Rational(4));
}

TEST_CASE("allocation validation enforces odd counts within range") {
  const Allocation even{{2, 1}};
  const Allocation oversized{{1, 5}};
  const Allocation negative{{-1, 1}};
  CHECK_THROWS_AS(even.validate(3), ValidationError);
  CHECK_THROWS_AS(oversized.validate(3), ValidationError);
  CHECK_THROWS_AS(negative.validate(3), ValidationError);
  Allocation{{1, 3}}.validate(3);
}

TEST_CASE("ccr averages the per-sample curve values") {
  const auto problem = binomial_problem({0.9, 0.6}, 3);
  CHECK(ccr(Allocation{{1, 1}}, problem) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(ccr(Allocation{{3, 3}}, problem) ==
        doctest::Approx((0.972 + 0.648) / 2).epsilon(1e-12));
  const auto flat = binomial_problem({0.5, 0.5, 0.5}, 5);
  for (const auto& alloc :
       {Allocation{{1, 1, 1}}, Allocation{{5, 3, 1}}, Allocation{{5, 5, 5}}}) {
    CHECK(ccr(alloc, flat) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("greedy frontier reproduces the two-sample fixture") {
  const auto frontier = buoca_greedy(binomial_problem({0.9, 0.6}, 3));
  REQUIRE(frontier.points.size() == 3);
  CHECK(frontier.points[0].budget == Rational(2));
  CHECK(frontier.points[0].allocation.n == std::vector<int>{1, 1});
  CHECK(frontier.points[0].ccr == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(frontier.points[1].budget == Rational(4));
  CHECK(frontier.points[1].allocation.n == std::vector<int>{3, 1});
  CHECK(frontier.points[1].ccr == doctest::Approx(0.786).epsilon(1e-12));
  CHECK(frontier.points[2].budget == Rational(6));
  CHECK(frontier.points[2].allocation.n == std::vector<int>{3, 3});
  CHECK(frontier.points[2].ccr == doctest::Approx(0.81).epsilon(1e-12));
  CHECK(!frontier.plateau_step.has_value());
}

TEST_CASE("flat curves freeze immediately, plateauing at the second point") {
  const auto frontier = buoca_greedy(binomial_problem({0.5, 0.5, 0.5}, 5));
  REQUIRE(frontier.points.size() == 1 + 3 * 2);
  CHECK(frontier.plateau_step == 2);
  for (const auto& point : frontier.points) {
    CHECK(point.allocation.n == std::vector<int>{1, 1, 1});
    CHECK(point.ccr == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(point.cost == Rational(3));
  }
  CHECK(frontier.points.back().budget == Rational(15));
}

TEST_CASE("single-sample frontier walks the curve itself") {
  const auto frontier = buoca_greedy(binomial_problem({0.9}, 5));
  REQUIRE(frontier.points.size() == 3);
  const double expected_ccr[] = {0.9, 0.972, 0.99144};
  const int expected_budget[] = {1, 3, 5};
  for (int i = 0; i < 3; ++i) {
    CHECK(frontier.points[i].ccr == doctest::Approx(expected_ccr[i]).epsilon(1e-12));
    CHECK(frontier.points[i].budget == Rational(expected_budget[i]));
  }
}

TEST_CASE("argmax ties break to the lowest sample index") {
  const auto frontier = buoca_greedy(binomial_problem({0.8, 0.8}, 3));
  CHECK(frontier.points[1].allocation.n == std::vector<int>{3, 1});
}

TEST_CASE("budget law and monotonicity hold on random instances") {
  Rng rng(414243);
  for (int i = 0; i < 60; ++i) {
    const auto problem = random_concave_problem(rng);
    const auto frontier = buoca_greedy(problem);
    const auto J = static_cast<std::int64_t>(problem.size());
    REQUIRE(frontier.points.size() ==
            1 + problem.size() * static_cast<std::size_t>(problem.k - 1) / 2);
    for (std::size_t t = 0; t < frontier.points.size(); ++t) {
      const auto& point = frontier.points[t];
      CHECK(point.m == static_cast<int>(t) + 1);
      CHECK(point.budget == problem.unit_cost * (J + 2 * point.m - 2));
      CHECK(point.cost <= point.budget);
      if (t > 0) {
        CHECK(point.ccr >= frontier.points[t - 1].ccr - 1e-15);
        CHECK(frontier.points[t - 1].cost <= point.cost);
      }
    }
  }
}

TEST_CASE("pre-plateau points spend the whole budget") {
  Rng rng(99);
  for (int i = 0; i < 40; ++i) {
    const auto frontier = buoca_greedy(random_concave_problem(rng));
    for (const auto& point : frontier.points) {
      if (frontier.plateau_step && point.m >= *frontier.plateau_step) {
        CHECK(point.allocation.n ==
              frontier.points[static_cast<std::size_t>(*frontier.plateau_step) - 1]
                  .allocation.n);
      } else {
        CHECK(point.cost == point.budget);
      }
    }
  }
}

TEST_CASE("consecutive allocations differ by one +2 step or not at all") {
  Rng rng(2718);
  for (int i = 0; i < 40; ++i) {
    const auto frontier = buoca_greedy(random_concave_problem(rng));
    for (std::size_t t = 1; t < frontier.points.size(); ++t) {
      const auto& prev = frontier.points[t - 1].allocation.n;
      const auto& next = frontier.points[t].allocation.n;
      int bumped = 0;
      for (std::size_t j = 0; j < prev.size(); ++j) {
        if (next[j] == prev[j] + 2) {
          ++bumped;
        } else {
          CHECK(next[j] == prev[j]);
        }
      }
      CHECK(bumped <= 1);
    }
  }
}

TEST_CASE("incremental ccr matches a from-scratch evaluation") {
  Rng rng(5150);
  for (int i = 0; i < 40; ++i) {
    const auto problem = random_concave_problem(rng);
    const auto frontier = buoca_greedy(problem);
    for (const auto& point : frontier.points) {
      CHECK(std::fabs(point.ccr - ccr(point.allocation, problem)) <= 1e-9);
    }
  }
}

TEST_CASE("sorted variant matches greedy point for point") {
  Rng rng(31337);
  for (int i = 0; i < 60; ++i) {
    const auto problem = random_concave_problem(rng);
    const auto greedy = buoca_greedy(problem);
    const auto sorted = buoca_sorted(problem);
    REQUIRE(greedy.points.size() == sorted.points.size());
    CHECK(greedy.plateau_step == sorted.plateau_step);
    for (std::size_t t = 0; t < greedy.points.size(); ++t) {
      CHECK(greedy.points[t].cost == sorted.points[t].cost);
      CHECK(greedy.points[t].budget == sorted.points[t].budget);
      CHECK(std::fabs(greedy.points[t].ccr - sorted.points[t].ccr) <= 1e-12);
    }
  }
}

TEST_CASE("sorted variant reproduces the two-sample fixture") {
  const auto frontier = buoca_sorted(binomial_problem({0.9, 0.6}, 3));
  REQUIRE(frontier.points.size() == 3);
  CHECK(frontier.points[1].allocation.n == std::vector<int>{3, 1});
  CHECK(frontier.points[1].ccr == doctest::Approx(0.786).epsilon(1e-12));
}

TEST_CASE("sorted variant refuses a non-concave curve") {
  auto problem = binomial_problem({0.9}, 5);
  SuccessCurve bent;
  bent.k = 5;
  bent.values = {0.5, 0.4, 0.9};
  problem.curves.push_back(bent);
  CHECK_THROWS_AS(buoca_sorted(problem), PreconditionError);
  CHECK_NOTHROW(buoca_greedy(problem));
}

TEST_CASE("allocation_at_budget picks the largest affordable point") {
  const auto frontier = buoca_greedy(binomial_problem({0.9, 0.6}, 3));
  CHECK(allocation_at_budget(frontier, 5).allocation.n == std::vector<int>{3, 1});
  CHECK(allocation_at_budget(frontier, 4).allocation.n == std::vector<int>{3, 1});
  CHECK(allocation_at_budget(frontier, 2).allocation.n == std::vector<int>{1, 1});
  CHECK(allocation_at_budget(frontier, 6).allocation.n == std::vector<int>{3, 3});
  CHECK(allocation_at_budget(frontier, 100).allocation.n == std::vector<int>{3, 3});
  CHECK(allocation_at_budget(frontier, Rational(9, 2)).m == 2);
  CHECK_THROWS_AS(allocation_at_budget(frontier, 1), InfeasibleBudgetError);
}

TEST_CASE("fractional unit costs keep budgets exact") {
  const auto problem = binomial_problem({0.9, 0.6}, 3, Rational(1, 2));
  const auto frontier = buoca_greedy(problem);
  CHECK(frontier.points[0].budget == Rational(1));
  CHECK(frontier.points[1].budget == Rational(2));
  CHECK(frontier.points[2].budget == Rational(3));
  CHECK(allocation_cost(frontier.points[2].allocation, problem.unit_cost) ==
        Rational(3));
}

TEST_CASE("from_estimates builds curves at the pilot k or an extrapolated cap") {
  SuccessEstimates estimates;
  estimates.k = 3;
  estimates.matches = {3, 2};
  const auto problem = AllocationProblem::from_estimates(estimates, 1);
  CHECK(problem.k == 3);
  REQUIRE(problem.curves.size() == 2);
  CHECK(problem.curves[0].at(1) == 1.0);
  CHECK(problem.curves[1].at(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  const auto wide = AllocationProblem::from_estimates(estimates, 1, 7);
  CHECK(wide.k == 7);
  CHECK(wide.curves[1].steps() == 4);
  CHECK_THROWS_AS(AllocationProblem::from_estimates(estimates, 1, 4), ValidationError);
  CHECK_THROWS_AS(AllocationProblem::from_estimates(estimates, 1, 1), ValidationError);
}

TEST_CASE("class counts histogram the allocation") {
  const auto counts = allocation_class_counts(Allocation{{1, 3, 3, 5, 1, 1}});
  CHECK(counts.at(1) == 3);
  CHECK(counts.at(3) == 2);
  CHECK(counts.at(5) == 1);
  CHECK(counts.size() == 3);
}

TEST_CASE("fixed allocation curve evaluates the constant schemes") {
  const auto problem = binomial_problem({0.9, 0.6}, 3);
  const auto fixed = fixed_allocation_curve(problem);
  REQUIRE(fixed.size() == 2);
  CHECK(fixed[0].n == 1);
  CHECK(fixed[0].cost == Rational(2));
  CHECK(fixed[0].ccr == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(fixed[1].n == 3);
  CHECK(fixed[1].cost == Rational(6));
  CHECK(fixed[1].ccr == doctest::Approx(0.81).epsilon(1e-12));
}

TEST_CASE("frontier csv carries exact budgets and optional allocations") {
  const auto frontier = buoca_greedy(binomial_problem({0.9, 0.6}, 3, Rational(1, 2)));
  std::ostringstream full;
  write_frontier_csv(frontier, full);
  std::istringstream lines(full.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "m,budget,cost,ccr,n_1,n_2");
  std::getline(lines, line);
  CHECK(line.substr(0, 4) == "1,1,");

  std::ostringstream slim;
  write_frontier_csv(frontier, slim, false);
  std::istringstream slim_lines(slim.str());
  std::getline(slim_lines, line);
  CHECK(line == "m,budget,cost,ccr");
}

TEST_CASE("frontier json reports the plateau and class counts") {
  const auto doc = frontier_to_json(buoca_greedy(binomial_problem({0.5, 0.5}, 3)));
  CHECK(doc["format"] == "buoca.frontier/1");
  CHECK(doc["plateau_step"] == 2);
  CHECK(doc["points"].size() == 3);
  CHECK(doc["points"][0]["class_counts"]["1"] == 2);
  const auto open = frontier_to_json(buoca_greedy(binomial_problem({0.9}, 3)));
  CHECK(open["plateau_step"].is_null());
}

TEST_CASE("problem validation rejects mismatched curves and bad costs") {
  auto problem = binomial_problem({0.9, 0.6}, 3);
  problem.curves[1] = binomial_success_curve(0.6, 5);
  CHECK_THROWS_AS(problem.validate(), ValidationError);

  auto free_labels = binomial_problem({0.9}, 3, 0);
  CHECK_THROWS_AS(free_labels.validate(), ValidationError);

  AllocationProblem empty;
  empty.k = 3;
  CHECK_THROWS_AS(empty.validate(), ValidationError);
}
