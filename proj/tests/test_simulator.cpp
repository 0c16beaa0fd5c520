#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "buoca/allocator.hpp"
#include "buoca/errors.hpp"
#include "buoca/pilot.hpp"
#include "buoca/rng.hpp"
#include "buoca/simulator.hpp"
#include "buoca/success_model.hpp"

using namespace buoca;

namespace {

// One sample whose k workers are `correct` matches plus fill-ins drawn from
// the wrong labels in rotation.
PilotDataset one_sample(int k, int correct, int wrong_kinds = 1) {
  PilotDataset data;
  data.k = k;
  data.sample_ids = {"s1"};
  data.expert_labels = {"right"};
  std::vector<std::string> row;
  for (int i = 0; i < correct; ++i) row.push_back("right");
  for (int i = 0; i < k - correct; ++i) {
    row.push_back("wrong" + std::to_string(i % wrong_kinds));
  }
  data.worker_labels = {row};
  return data;
}

}  // namespace

TEST_CASE("plurality label picks the strict majority") {
  const auto outcome = plurality_label({"neg", "neg", "pos"}, TieRule::fractional);
  CHECK(outcome.winners == std::vector<std::string>{"neg"});
  CHECK(!outcome.tie());
  CHECK(plurality_credit(outcome, "neg") == 1.0);
  CHECK(plurality_credit(outcome, "pos") == 0.0);
}

TEST_CASE("full three-way tie splits credit under the fractional rule") {
  const auto outcome = plurality_label({"pos", "neg", "neu"}, TieRule::fractional);
  CHECK(outcome.winners.size() == 3);
  CHECK(plurality_credit(outcome, "neg") == doctest::Approx(1.0 / 3.0));
  CHECK(plurality_credit(outcome, "other") == 0.0);
}

TEST_CASE("two-way plurality tie on five labels") {
  const auto outcome = plurality_label({"a", "a", "b", "b", "c"}, TieRule::fractional);
  CHECK(outcome.winners == std::vector<std::string>{"a", "b"});
  CHECK(plurality_credit(outcome, "a") == doctest::Approx(0.5));
  CHECK(plurality_credit(outcome, "c") == 0.0);
}

TEST_CASE("fail rule zeroes any tie") {
  const auto outcome = plurality_label({"a", "b"}, TieRule::fail);
  CHECK(outcome.failed_tie);
  CHECK(plurality_credit(outcome, "a") == 0.0);
  CHECK_THROWS_AS(plurality_label({}, TieRule::fractional), ValidationError);
}

TEST_CASE("three-of-five fixture has accuracy exactly 7/10 at n=3") {
  const auto data = one_sample(5, 3);
  const auto report = exact_subset_accuracy(data, Allocation{{3}});
  CHECK(report.per_sample_accuracy[0] == 0.7);
  CHECK(report.mean_accuracy == 0.7);
  CHECK(report.total_cost == Rational(3));
}

TEST_CASE("n=1 accuracy equals the match fraction") {
  for (int k : {3, 5, 7}) {
    for (int correct = 0; correct <= k; ++correct) {
      const auto data = one_sample(k, correct, 2);
      const auto report = exact_subset_accuracy(data, Allocation{{1}});
      CHECK(report.per_sample_accuracy[0] ==
            doctest::Approx(double(correct) / k).epsilon(1e-15));
    }
  }
}

TEST_CASE("n=k reduces to the single full-pool vote") {
  CHECK(exact_subset_accuracy(one_sample(5, 3), Allocation{{5}}).mean_accuracy == 1.0);
  CHECK(exact_subset_accuracy(one_sample(5, 2, 1), Allocation{{5}}).mean_accuracy == 0.0);
  // 2 right vs 2 of one wrong label plus 1 of another: two-way tie, expert in it.
  const auto tied = one_sample(5, 2, 2);
  CHECK(exact_subset_accuracy(tied, Allocation{{5}}, TieRule::fractional)
            .mean_accuracy == doctest::Approx(0.5));
  CHECK(exact_subset_accuracy(tied, Allocation{{5}}, TieRule::fail).mean_accuracy == 0.0);
}

TEST_CASE("multi-class subsets enumerate compositions exactly") {
  // Pool: 2 right, 2 wrongA, 1 wrongB; size-3 subsets (10 total) by hand:
  // 3 outright wins (both rights drawn), 4 three-way 1-1-1 ties worth 1/3,
  // 3 losses to a wrongA pair.
  const auto data = one_sample(5, 2, 2);
  const auto fractional = exact_subset_accuracy(data, Allocation{{3}});
  CHECK(fractional.per_sample_accuracy[0] == doctest::Approx((3 + 4.0 / 3.0) / 10));
  const auto strict = exact_subset_accuracy(data, Allocation{{3}}, TieRule::fail);
  CHECK(strict.per_sample_accuracy[0] == doctest::Approx(3.0 / 10));
}

TEST_CASE("monte carlo is deterministic and order-independent") {
  PilotDataset data;
  data.k = 5;
  data.sample_ids = {"a", "b", "c"};
  data.expert_labels = {"x", "y", "x"};
  data.worker_labels = {{"x", "x", "y", "x", "y"},
                        {"y", "y", "y", "x", "x"},
                        {"x", "y", "x", "x", "x"}};
  const Allocation alloc{{3, 3, 5}};
  const auto first = monte_carlo_accuracy(data, alloc, 42, 5000);
  const auto second = monte_carlo_accuracy(data, alloc, 42, 5000);
  CHECK(first.per_sample_accuracy == second.per_sample_accuracy);
  const auto reseeded = monte_carlo_accuracy(data, alloc, 43, 5000);
  CHECK(first.per_sample_accuracy != reseeded.per_sample_accuracy);
  CHECK_THROWS_AS(monte_carlo_accuracy(data, alloc, 42, 0), ValidationError);
}

TEST_CASE("monte carlo agrees with exact within the binomial bound") {
  const auto data = one_sample(5, 3);
  const std::uint64_t trials = 200000;
  const auto mc = monte_carlo_accuracy(data, Allocation{{3}}, 7, trials);
  CHECK(std::fabs(mc.per_sample_accuracy[0] - 0.7) <= 0.005);

  PilotDataset mixed;
  mixed.k = 7;
  mixed.sample_ids = {"a", "b"};
  mixed.expert_labels = {"u", "v"};
  mixed.worker_labels = {{"u", "u", "u", "w", "w", "v", "u"},
                         {"v", "w", "v", "v", "u", "w", "v"}};
  const Allocation alloc{{3, 5}};
  const auto exact = exact_subset_accuracy(mixed, alloc);
  const auto sampled = monte_carlo_accuracy(mixed, alloc, 11, trials);
  for (std::size_t j = 0; j < 2; ++j) {
    const double q = exact.per_sample_accuracy[j];
    const double bound = 3.0 * std::sqrt(q * (1 - q) / double(trials)) + 1e-9;
    CHECK(std::fabs(sampled.per_sample_accuracy[j] - q) <= bound);
  }
}

TEST_CASE("fixed baseline is the constant allocation priced at c*J*n") {
  PilotDataset data;
  data.k = 5;
  data.unit_cost = Rational(1, 2);
  data.sample_ids = {"a", "b", "c", "d"};
  data.expert_labels = {"x", "x", "y", "y"};
  data.worker_labels = {{"x", "x", "x", "y", "y"},
                        {"x", "y", "y", "y", "x"},
                        {"y", "y", "x", "x", "x"},
                        {"y", "y", "y", "y", "y"}};
  const auto three = fixed_allocation_baseline(data, 3);
  CHECK(three.total_cost == Rational(6));
  const auto full = fixed_allocation_baseline(data, 5);
  CHECK(full.total_cost == Rational(10));

  const auto singles = fixed_allocation_baseline(data, 1);
  const auto est = estimate_success_probabilities(data);
  double mean_p = 0.0;
  for (std::size_t j = 0; j < est.size(); ++j) mean_p += est.value(j);
  mean_p /= double(est.size());
  CHECK(singles.mean_accuracy == doctest::Approx(mean_p).epsilon(1e-12));
  CHECK_THROWS_AS(fixed_allocation_baseline(data, 7), ValidationError);
}

TEST_CASE("large pools approach the binomial curve value") {
  // 63 workers, 50 agreeing: small subsets behave like q(n) at p = 50/63.
  const int pool = 63;
  const int matches = 50;
  PilotDataset data;
  data.k = pool;
  data.sample_ids = {"s"};
  data.expert_labels = {"good"};
  std::vector<std::string> row;
  for (int i = 0; i < pool; ++i) {
    row.push_back(i < matches ? "good" : "bad");
  }
  data.worker_labels = {row};
  const double p = double(matches) / double(pool);
  for (const int n : {1, 3, 5, 7}) {
    const auto report = exact_subset_accuracy(data, Allocation{{n}});
    const double q = binomial_success_curve(p, 7).at(n);
    CHECK(std::fabs(report.per_sample_accuracy[0] - q) <= 0.02);
  }
}

TEST_CASE("cost moves by exactly 2c per single increment") {
  PilotDataset data = one_sample(5, 3);
  data.unit_cost = Rational(3, 2);
  const auto base = exact_subset_accuracy(data, Allocation{{1}});
  const auto bumped = exact_subset_accuracy(data, Allocation{{3}});
  CHECK(bumped.total_cost - base.total_cost == Rational(3));
}

TEST_CASE("report validation catches misaligned allocations") {
  const auto data = one_sample(5, 3);
  CHECK_THROWS_AS(exact_subset_accuracy(data, Allocation{{3, 3}}), ValidationError);
  CHECK_THROWS_AS(exact_subset_accuracy(data, Allocation{{7}}), ValidationError);
  CHECK_THROWS_AS(exact_subset_accuracy(data, Allocation{{2}}), ValidationError);
}

TEST_CASE("report serializers carry ids, counts, and accuracies") {
  const auto data = one_sample(5, 3);
  const Allocation alloc{{3}};
  const auto report = exact_subset_accuracy(data, alloc);

  std::ostringstream out;
  write_report_csv(report, data, alloc, out);
  CHECK(out.str() == "sample_id,n,accuracy\ns1,3,0.7\n");

  const auto doc = report_to_json(report, data, alloc);
  CHECK(doc["format"] == "buoca.simulation/1");
  CHECK(doc["method"] == "exact");
  CHECK(doc["mean_accuracy"] == 0.7);
  CHECK(doc["samples"][0]["id"] == "s1");
  CHECK(doc["samples"][0]["n"] == 3);
}
