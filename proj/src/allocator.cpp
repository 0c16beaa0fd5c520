#include "buoca/allocator.hpp"

#include <algorithm>
#include <ostream>
#include <string>
#include <tuple>

#include "buoca/csv.hpp"
#include "buoca/errors.hpp"

namespace buoca {

void AllocationProblem::validate() const {
  if (curves.empty()) throw ValidationError("allocation problem has no samples");
  if (!(Rational(0) < unit_cost)) {
    throw ValidationError("allocation problem needs a positive unit cost");
  }
  for (const auto& curve : curves) {
    curve.validate();
    if (curve.k != k) {
      throw ValidationError("all success curves must share the problem's worker cap");
    }
  }
}

AllocationProblem AllocationProblem::from_estimates(const SuccessEstimates& estimates,
                                                    const Rational& unit_cost,
                                                    int k_max) {
  if (k_max == 0) k_max = estimates.k;
  if (k_max < estimates.k) {
    throw ValidationError("extrapolation cap k_max below the pilot worker count");
  }
  AllocationProblem problem;
  problem.unit_cost = unit_cost;
  problem.k = k_max;
  problem.curves.reserve(estimates.size());
  for (std::size_t j = 0; j < estimates.size(); ++j) {
    problem.curves.push_back(binomial_success_curve(estimates.value(j), k_max));
  }
  problem.validate();
  return problem;
}

int Allocation::total_workers() const {
  int total = 0;
  for (int v : n) total += v;
  return total;
}

void Allocation::validate(int k) const {
  if (n.empty()) throw ValidationError("empty allocation");
  for (int v : n) {
    if (v < 1 || v > k || v % 2 == 0) {
      throw ValidationError("allocation entries must be odd and within [1," +
                            std::to_string(k) + "], got " + std::to_string(v));
    }
  }
}

Allocation Allocation::constant(std::size_t count, int value) {
  Allocation alloc;
  alloc.n.assign(count, value);
  return alloc;
}

Rational allocation_cost(const Allocation& alloc, const Rational& unit_cost) {
  return unit_cost * alloc.total_workers();
}

double ccr(const Allocation& alloc, const AllocationProblem& problem) {
  problem.validate();
  if (alloc.size() != problem.size()) {
    throw ValidationError("allocation and problem sizes differ");
  }
  alloc.validate(problem.k);
  double total = 0.0;
  for (std::size_t j = 0; j < alloc.size(); ++j) {
    total += problem.curves[j].at(alloc.n[j]);
  }
  return total / static_cast<double>(alloc.size());
}

namespace {

// Shared emission loop: both frontier builders produce the same point grid,
// they only differ in how the next increment is chosen. choose() returns
// the sample to bump by two, or -1 once no strictly positive gain is left.
template <typename ChooseNext>
BudgetFrontier trace_frontier(const AllocationProblem& problem, ChooseNext choose) {
  const auto J = problem.size();
  const int steps_total = static_cast<int>(J) * (problem.k - 1) / 2;

  BudgetFrontier frontier;
  frontier.J = J;
  frontier.k = problem.k;
  frontier.unit_cost = problem.unit_cost;

  Allocation alloc = Allocation::constant(J, 1);
  double ccr_sum = 0.0;
  for (const auto& curve : problem.curves) ccr_sum += curve.at(1);

  const auto J_int = static_cast<std::int64_t>(J);
  frontier.points.reserve(static_cast<std::size_t>(steps_total) + 1);
  frontier.points.push_back({1, problem.unit_cost * J_int, problem.unit_cost * J_int,
                             ccr_sum / static_cast<double>(J), alloc});

  bool frozen = false;
  for (int m = 1; m <= steps_total; ++m) {
    if (!frozen) {
      const int pick = choose(alloc);
      if (pick < 0) {
        frontier.plateau_step = m + 1;  // the point this step would have improved
        frozen = true;
      } else {
        const auto j = static_cast<std::size_t>(pick);
        ccr_sum += problem.curves[j].at(alloc.n[j] + 2) - problem.curves[j].at(alloc.n[j]);
        alloc.n[j] += 2;
      }
    }
    const auto& last = frontier.points.back();
    FrontierPoint point;
    point.m = m + 1;
    point.budget = problem.unit_cost * (J_int + 2 * m);
    point.cost = frozen ? last.cost : problem.unit_cost * alloc.total_workers();
    point.ccr = frozen ? last.ccr : ccr_sum / static_cast<double>(J);
    point.allocation = alloc;
    frontier.points.push_back(std::move(point));
  }
  return frontier;
}

}  // namespace

BudgetFrontier buoca_greedy(const AllocationProblem& problem) {
  problem.validate();
  return trace_frontier(problem, [&problem](const Allocation& alloc) {
    int best = -1;
    double best_gain = 0.0;
    for (std::size_t j = 0; j < alloc.size(); ++j) {
      if (alloc.n[j] + 2 > problem.k) continue;  // sample already at the cap
      const double gain =
          problem.curves[j].at(alloc.n[j] + 2) - problem.curves[j].at(alloc.n[j]);
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<int>(j);
      }
    }
    return best;  // -1 when every remaining gain is <= 0
  });
}

BudgetFrontier buoca_sorted(const AllocationProblem& problem) {
  problem.validate();
  for (std::size_t j = 0; j < problem.size(); ++j) {
    if (classify_curve(problem.curves[j]) == CurveClass::Other) {
      throw PreconditionError(
          "sorted allocation requires every curve non-increasing or "
          "non-decreasing concave; sample " + std::to_string(j) + " is neither");
    }
  }

  // All first-order differences up front, largest first. Concavity keeps
  // each sample's own differences in increment order, so a single pass
  // replays the greedy trajectory.
  struct Step {
    double gain;
    std::size_t j;
    int t;
  };
  std::vector<Step> order;
  order.reserve(problem.size() * static_cast<std::size_t>((problem.k - 1) / 2));
  for (std::size_t j = 0; j < problem.size(); ++j) {
    for (const auto& [t, d] : first_order_differences(problem.curves[j])) {
      order.push_back({d, j, t});
    }
  }
  std::sort(order.begin(), order.end(), [](const Step& a, const Step& b) {
    return std::tie(b.gain, a.j, a.t) < std::tie(a.gain, b.j, b.t);
  });

  std::size_t cursor = 0;
  return trace_frontier(problem, [&order, &cursor](const Allocation&) {
    if (cursor >= order.size() || order[cursor].gain <= 0.0) return -1;
    return static_cast<int>(order[cursor++].j);
  });
}

const FrontierPoint& allocation_at_budget(const BudgetFrontier& frontier,
                                          const Rational& beta) {
  if (frontier.points.empty()) throw ValidationError("empty frontier");
  if (beta < frontier.points.front().budget) {
    throw InfeasibleBudgetError("budget " + beta.str() +
                                " cannot buy one worker per sample (needs " +
                                frontier.points.front().budget.str() + ")");
  }
  const FrontierPoint* best = &frontier.points.front();
  for (const auto& point : frontier.points) {
    if (point.budget <= beta) best = &point;
  }
  return *best;
}

std::map<int, std::size_t> allocation_class_counts(const Allocation& alloc) {
  std::map<int, std::size_t> counts;
  for (int v : alloc.n) ++counts[v];
  return counts;
}

std::vector<FixedCurvePoint> fixed_allocation_curve(const AllocationProblem& problem) {
  problem.validate();
  std::vector<FixedCurvePoint> points;
  for (int n = 1; n <= problem.k; n += 2) {
    double total = 0.0;
    for (const auto& curve : problem.curves) total += curve.at(n);
    points.push_back({n,
                      problem.unit_cost * (static_cast<std::int64_t>(problem.size()) * n),
                      total / static_cast<double>(problem.size())});
  }
  return points;
}

void write_frontier_csv(const BudgetFrontier& frontier, std::ostream& out,
                        bool include_allocations) {
  std::vector<std::string> row{"m", "budget", "cost", "ccr"};
  if (include_allocations) {
    for (std::size_t j = 1; j <= frontier.J; ++j) row.push_back("n_" + std::to_string(j));
  }
  csv::write_row(out, row);
  for (const auto& point : frontier.points) {
    row.clear();
    row.push_back(std::to_string(point.m));
    row.push_back(point.budget.str());
    row.push_back(point.cost.str());
    row.push_back(csv::number(point.ccr));
    if (include_allocations) {
      for (int v : point.allocation.n) row.push_back(std::to_string(v));
    }
    csv::write_row(out, row);
  }
}

nlohmann::json frontier_to_json(const BudgetFrontier& frontier,
                                bool include_allocations) {
  nlohmann::json doc;
  doc["format"] = "buoca.frontier/1";
  doc["J"] = frontier.J;
  doc["k"] = frontier.k;
  doc["unit_cost"] = frontier.unit_cost.str();
  if (frontier.plateau_step) {
    doc["plateau_step"] = *frontier.plateau_step;
  } else {
    doc["plateau_step"] = nullptr;
  }
  nlohmann::json points = nlohmann::json::array();
  for (const auto& point : frontier.points) {
    nlohmann::json p;
    p["m"] = point.m;
    p["budget"] = point.budget.to_double();
    p["cost"] = point.cost.to_double();
    p["ccr"] = point.ccr;
    nlohmann::json counts;
    for (const auto& [cls, count] : allocation_class_counts(point.allocation)) {
      counts[std::to_string(cls)] = count;
    }
    p["class_counts"] = std::move(counts);
    if (include_allocations) p["allocation"] = point.allocation.n;
    points.push_back(std::move(p));
  }
  doc["points"] = std::move(points);
  return doc;
}

}  // namespace buoca
