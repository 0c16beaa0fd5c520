#include "buoca/synth.hpp"

#include <cmath>
#include <string>

#include "buoca/errors.hpp"
#include "buoca/rng.hpp"

namespace buoca {

void SynthSpec::validate() const {
  if (mixture.empty()) throw ValidationError("synthetic mixture has no components");
  double total = 0.0;
  for (const auto& component : mixture) {
    if (!(component.p >= 0.0 && component.p <= 1.0)) {
      throw ValidationError("mixture probabilities must lie in [0,1]");
    }
    if (component.weight < 0.0) {
      throw ValidationError("mixture weights must be non-negative");
    }
    total += component.weight;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw ValidationError("mixture weights must sum to 1, got " + std::to_string(total));
  }
  if (J == 0) throw ValidationError("synthetic dataset needs at least one sample");
  if (k < 1 || k % 2 == 0) {
    throw ValidationError("synthetic worker count k must be odd and positive");
  }
  if (label_set.size() < 2) {
    throw ValidationError("synthetic label set needs at least two labels");
  }
  if (feature_noise < 0.0) throw ValidationError("feature noise must be non-negative");
  if (noise_columns < 0) throw ValidationError("noise column count must be non-negative");
}

SynthResult generate_synthetic(const SynthSpec& spec) {
  spec.validate();

  SynthResult result;
  result.pilot.k = spec.k;
  result.pilot.unit_cost = spec.unit_cost;
  result.pilot.label_set = spec.label_set;

  result.features.columns.push_back("difficulty");
  for (int c = 1; c <= spec.noise_columns; ++c) {
    result.features.columns.push_back("noise" + std::to_string(c));
  }

  std::size_t id_width = 1;
  for (std::size_t v = spec.J; v >= 10; v /= 10) ++id_width;

  Rng rng(spec.seed);
  const auto L = spec.label_set.size();
  for (std::size_t j = 0; j < spec.J; ++j) {
    // Fixed draw order per sample: component, expert, k workers, features.
    const double roll = rng.uniform();
    double cumulative = 0.0;
    double p = spec.mixture.back().p;
    for (const auto& component : spec.mixture) {
      cumulative += component.weight;
      if (roll < cumulative) {
        p = component.p;
        break;
      }
    }
    result.true_p.push_back(p);

    const auto expert = static_cast<std::size_t>(rng.bounded(L));
    std::vector<std::string> workers;
    workers.reserve(static_cast<std::size_t>(spec.k));
    int matches = 0;
    for (int w = 0; w < spec.k; ++w) {
      if (rng.uniform() < p) {
        workers.push_back(spec.label_set[expert]);
        ++matches;
      } else {
        auto wrong = static_cast<std::size_t>(rng.bounded(L - 1));
        if (wrong >= expert) ++wrong;
        workers.push_back(spec.label_set[wrong]);
      }
    }

    std::string id = std::to_string(j + 1);
    if (id.size() < id_width) id.insert(0, id_width - id.size(), '0');
    id.insert(0, "s");
    result.pilot.sample_ids.push_back(id);
    result.pilot.expert_labels.push_back(spec.label_set[expert]);
    result.pilot.worker_labels.push_back(std::move(workers));

    const double disagreement =
        1.0 - static_cast<double>(matches) / static_cast<double>(spec.k);
    result.features.data.push_back(disagreement + spec.feature_noise * rng.normal());
    for (int c = 0; c < spec.noise_columns; ++c) {
      result.features.data.push_back(rng.normal());
    }
  }
  result.features.sample_ids = result.pilot.sample_ids;

  result.pilot.validate();
  result.features.validate();
  return result;
}

}  // namespace buoca
