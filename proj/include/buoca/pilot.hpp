#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "buoca/rational.hpp"

namespace buoca {

// A pilot study: every sample labeled by the same k workers plus one expert.
// Worker identity does not matter downstream, only the label multiset per
// sample, but column order is preserved for round-tripping.
struct PilotDataset {
  std::vector<std::string> sample_ids;
  std::vector<std::string> expert_labels;
  std::vector<std::vector<std::string>> worker_labels;  // J rows of k labels
  int k = 1;
  Rational unit_cost = 1;
  std::vector<std::string> label_set;  // empty means unconstrained

  std::size_t size() const { return sample_ids.size(); }

  // Throws ValidationError: even or non-positive k, empty dataset, ragged
  // rows, empty labels, duplicate ids, labels outside a declared label set,
  // negative unit cost.
  void validate() const;
};

enum class PilotFormat { csv, json };

// CSV schema: header sample_id,expert,w1,...,wk (k read off the header).
// JSON schema: {"k":..,"unit_cost":..,"label_set":[..]?,"samples":[
//   {"id":..,"expert":..,"workers":[..]},..]}
PilotDataset load_pilot(const std::filesystem::path& path, PilotFormat format);

// Format inferred from the extension (.csv / .json).
PilotDataset load_pilot(const std::filesystem::path& path);

void save_pilot(const PilotDataset& data, const std::filesystem::path& path,
                PilotFormat format);

// Per-sample success probability as the exact fraction of workers agreeing
// with the expert. Kept as (matches, k) so no precision is lost before the
// curve construction.
struct SuccessEstimates {
  std::vector<int> matches;
  int k = 1;

  std::size_t size() const { return matches.size(); }
  double value(std::size_t j) const {
    return static_cast<double>(matches[j]) / static_cast<double>(k);
  }
};

SuccessEstimates estimate_success_probabilities(const PilotDataset& data);

}  // namespace buoca
