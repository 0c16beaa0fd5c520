#include "buoca/simulator.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>

#include "buoca/csv.hpp"
#include "buoca/errors.hpp"
#include "buoca/rng.hpp"
#include "buoca/success_model.hpp"

namespace buoca {

namespace {

void check_alloc_against_data(const PilotDataset& data, const Allocation& alloc) {
  data.validate();
  if (alloc.size() != data.size()) {
    throw ValidationError("allocation covers " + std::to_string(alloc.size()) +
                          " samples, dataset has " + std::to_string(data.size()));
  }
  alloc.validate(data.k);
}

// Distinct labels of one sample with their multiplicities, plus the index
// of the expert label within that list (-1 when no worker chose it).
struct LabelTypes {
  std::vector<int> counts;
  int expert_index = -1;
};

LabelTypes label_types(const std::vector<std::string>& workers, const std::string& expert) {
  std::map<std::string, int> tally;
  for (const auto& w : workers) ++tally[w];
  LabelTypes types;
  int index = 0;
  for (const auto& [label, count] : tally) {
    if (label == expert) types.expert_index = index;
    types.counts.push_back(count);
    ++index;
  }
  return types;
}

// Exact per-sample accuracy: iterate over all compositions (s_1..s_L) of n
// across the label types, each covering prod C(c_i, s_i) of the C(k, n)
// subsets. Credits are accumulated as integer subset counts per tie width,
// so the only rounding is the final division.
double exact_sample_accuracy(const LabelTypes& types, int n, int k, TieRule rule) {
  std::uint64_t unique_wins = 0;
  // tied_by_width[r] = subsets where the expert ties r other-or-self labels
  std::map<int, std::uint64_t> tied_by_width;

  std::vector<int> chosen(types.counts.size(), 0);
  auto evaluate = [&] {
    if (types.expert_index < 0) return;
    const int expert_count = chosen[static_cast<std::size_t>(types.expert_index)];
    if (expert_count == 0) return;
    int top = 0, top_multiplicity = 0;
    for (int s : chosen) {
      if (s > top) {
        top = s;
        top_multiplicity = 1;
      } else if (s == top) {
        ++top_multiplicity;
      }
    }
    if (expert_count != top) return;
    std::uint64_t weight = 1;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      weight *= binomial_coefficient(types.counts[i], chosen[i]);
    }
    if (top_multiplicity == 1) {
      unique_wins += weight;
    } else {
      tied_by_width[top_multiplicity] += weight;
    }
  };

  // Depth-first composition walk with remaining-capacity pruning.
  const std::size_t L = types.counts.size();
  std::vector<int> suffix_capacity(L + 1, 0);
  for (std::size_t i = L; i-- > 0;) {
    suffix_capacity[i] = suffix_capacity[i + 1] + types.counts[i];
  }
  auto walk = [&](auto&& self, std::size_t depth, int remaining) -> void {
    if (depth == L) {
      if (remaining == 0) evaluate();
      return;
    }
    if (remaining > suffix_capacity[depth]) return;
    const int cap = std::min(types.counts[depth], remaining);
    for (int s = 0; s <= cap; ++s) {
      chosen[depth] = s;
      self(self, depth + 1, remaining - s);
    }
    chosen[depth] = 0;
  };
  walk(walk, 0, n);

  const auto total = static_cast<double>(binomial_coefficient(k, n));
  double credit = static_cast<double>(unique_wins);
  if (rule == TieRule::fractional) {
    for (const auto& [width, weight] : tied_by_width) {
      credit += static_cast<double>(weight) / width;
    }
  }
  return credit / total;
}

SimulationReport finish_report(std::vector<double> per_sample, const PilotDataset& data,
                               const Allocation& alloc, SimulationMethod method,
                               TieRule rule) {
  SimulationReport report;
  report.per_sample_accuracy = std::move(per_sample);
  report.mean_accuracy =
      std::accumulate(report.per_sample_accuracy.begin(),
                      report.per_sample_accuracy.end(), 0.0) /
      static_cast<double>(report.per_sample_accuracy.size());
  report.total_cost = allocation_cost(alloc, data.unit_cost);
  report.method = method;
  report.tie_rule = rule;
  return report;
}

}  // namespace

PluralityOutcome plurality_label(const std::vector<std::string>& labels, TieRule rule) {
  if (labels.empty()) throw ValidationError("plurality of an empty label set");
  std::map<std::string, int> tally;
  for (const auto& l : labels) ++tally[l];
  int top = 0;
  for (const auto& [label, count] : tally) top = std::max(top, count);
  PluralityOutcome outcome;
  for (const auto& [label, count] : tally) {
    if (count == top) outcome.winners.push_back(label);
  }
  outcome.failed_tie = rule == TieRule::fail && outcome.winners.size() > 1;
  return outcome;
}

double plurality_credit(const PluralityOutcome& outcome, const std::string& expert) {
  if (outcome.failed_tie) return 0.0;
  const bool expert_among =
      std::find(outcome.winners.begin(), outcome.winners.end(), expert) !=
      outcome.winners.end();
  if (!expert_among) return 0.0;
  return 1.0 / static_cast<double>(outcome.winners.size());
}

SimulationReport exact_subset_accuracy(const PilotDataset& data, const Allocation& alloc,
                                       TieRule rule) {
  check_alloc_against_data(data, alloc);
  std::vector<double> per_sample(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto types = label_types(data.worker_labels[j], data.expert_labels[j]);
    per_sample[j] = exact_sample_accuracy(types, alloc.n[j], data.k, rule);
  }
  return finish_report(std::move(per_sample), data, alloc,
                       {SimulationMethod::Kind::exact, 0, 0}, rule);
}

SimulationReport monte_carlo_accuracy(const PilotDataset& data, const Allocation& alloc,
                                      std::uint64_t seed, std::uint64_t trials,
                                      TieRule rule) {
  check_alloc_against_data(data, alloc);
  if (trials == 0) throw ValidationError("monte carlo needs at least one trial");

  std::vector<double> per_sample(data.size());
  std::vector<std::size_t> indices(static_cast<std::size_t>(data.k));
  std::vector<std::string> drawn;
  for (std::size_t j = 0; j < data.size(); ++j) {
    Rng rng = Rng::derive(seed, j);
    const auto n = static_cast<std::size_t>(alloc.n[j]);
    double credit_sum = 0.0;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
      std::iota(indices.begin(), indices.end(), std::size_t{0});
      // Partial Fisher-Yates: the first n entries become the drawn subset.
      for (std::size_t i = 0; i < n; ++i) {
        const auto pick = i + static_cast<std::size_t>(rng.bounded(indices.size() - i));
        std::swap(indices[i], indices[pick]);
      }
      drawn.clear();
      for (std::size_t i = 0; i < n; ++i) {
        drawn.push_back(data.worker_labels[j][indices[i]]);
      }
      credit_sum += plurality_credit(plurality_label(drawn, rule), data.expert_labels[j]);
    }
    per_sample[j] = credit_sum / static_cast<double>(trials);
  }
  return finish_report(std::move(per_sample), data, alloc,
                       {SimulationMethod::Kind::monte_carlo, seed, trials}, rule);
}

SimulationReport fixed_allocation_baseline(const PilotDataset& data, int n_fixed,
                                           TieRule rule) {
  return exact_subset_accuracy(data, Allocation::constant(data.size(), n_fixed), rule);
}

void write_report_csv(const SimulationReport& report, const PilotDataset& data,
                      const Allocation& alloc, std::ostream& out) {
  std::vector<std::string> row{"sample_id", "n", "accuracy"};
  csv::write_row(out, row);
  for (std::size_t j = 0; j < data.size(); ++j) {
    row.clear();
    row.push_back(data.sample_ids[j]);
    row.push_back(std::to_string(alloc.n[j]));
    row.push_back(csv::number(report.per_sample_accuracy[j]));
    csv::write_row(out, row);
  }
}

nlohmann::json report_to_json(const SimulationReport& report, const PilotDataset& data,
                              const Allocation& alloc) {
  nlohmann::json doc;
  doc["format"] = "buoca.simulation/1";
  doc["method"] =
      report.method.kind == SimulationMethod::Kind::exact ? "exact" : "monte_carlo";
  if (report.method.kind == SimulationMethod::Kind::monte_carlo) {
    doc["seed"] = report.method.seed;
    doc["trials"] = report.method.trials;
  }
  doc["tie_rule"] = report.tie_rule == TieRule::fractional ? "fractional" : "fail";
  doc["total_cost"] = report.total_cost.to_double();
  doc["mean_accuracy"] = report.mean_accuracy;
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t j = 0; j < data.size(); ++j) {
    samples.push_back({{"id", data.sample_ids[j]},
                       {"n", alloc.n[j]},
                       {"accuracy", report.per_sample_accuracy[j]}});
  }
  doc["samples"] = std::move(samples);
  return doc;
}

}  // namespace buoca
