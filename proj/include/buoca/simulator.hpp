#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "buoca/allocator.hpp"
#include "buoca/pilot.hpp"

namespace buoca {

// What a multi-class plurality tie is worth: `fractional` credits the
// expert label 1/|tied| when it is among the tied set, `fail` treats any
// tie as a fusion failure worth zero.
enum class TieRule { fractional, fail };

struct PluralityOutcome {
  std::vector<std::string> winners;  // most frequent labels, sorted
  bool failed_tie = false;           // tie under TieRule::fail

  bool tie() const { return winners.size() > 1; }
};

PluralityOutcome plurality_label(const std::vector<std::string>& labels, TieRule rule);

// Credit earned against the expert label: 1 for a unique correct winner,
// 1/|tied| under the fractional rule when the expert is among the tied
// set, 0 otherwise (and always 0 for a failed tie).
double plurality_credit(const PluralityOutcome& outcome, const std::string& expert);

struct SimulationMethod {
  enum class Kind { exact, monte_carlo } kind = Kind::exact;
  std::uint64_t seed = 0;    // monte_carlo only
  std::uint64_t trials = 0;  // monte_carlo only
};

struct SimulationReport {
  std::vector<double> per_sample_accuracy;
  double mean_accuracy = 0.0;
  Rational total_cost;
  SimulationMethod method;
  TieRule tie_rule = TieRule::fractional;
};

// Deployment accuracy if sample j were labeled by n_j of its k recorded
// workers: the average plurality credit over all C(k, n_j) subsets,
// computed exactly by enumerating label-count compositions weighted by
// products of binomial coefficients (no subset listing).
SimulationReport exact_subset_accuracy(const PilotDataset& data, const Allocation& alloc,
                                       TieRule rule = TieRule::fractional);

// Same estimand by sampling worker subsets; per-sample generators are
// derived from (seed, sample index) so results are independent of
// evaluation order. Requires trials >= 1.
SimulationReport monte_carlo_accuracy(const PilotDataset& data, const Allocation& alloc,
                                      std::uint64_t seed, std::uint64_t trials,
                                      TieRule rule = TieRule::fractional);

// Constant allocation n_fixed for every sample, evaluated exactly.
SimulationReport fixed_allocation_baseline(const PilotDataset& data, int n_fixed,
                                           TieRule rule = TieRule::fractional);

// CSV schema: sample_id,n,accuracy.
void write_report_csv(const SimulationReport& report, const PilotDataset& data,
                      const Allocation& alloc, std::ostream& out);

nlohmann::json report_to_json(const SimulationReport& report, const PilotDataset& data,
                              const Allocation& alloc);

}  // namespace buoca
