#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "buoca/features.hpp"
#include "buoca/pilot.hpp"

namespace buoca {

// Synthetic pilot generator: each sample draws a true success probability
// from a finite mixture, an expert label uniform over the label set, and k
// i.i.d. worker labels (correct with the sample's probability, otherwise
// uniform over the wrong labels).
struct MixtureComponent {
  double p = 0.5;
  double weight = 1.0;
};

struct SynthSpec {
  std::vector<MixtureComponent> mixture;  // weights must sum to 1 (1e-9)
  std::size_t J = 0;
  int k = 1;
  std::vector<std::string> label_set{"positive", "neutral", "negative"};
  Rational unit_cost = 1;
  // The informativeness knob. The difficulty column is the realized
  // disagreement rate (1 - matching workers / k) plus this much Gaussian
  // noise; 0 leaks realized difficulty exactly, large values drown it.
  double feature_noise = 0.05;
  int noise_columns = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthResult {
  PilotDataset pilot;
  FeatureMatrix features;
  std::vector<double> true_p;  // per-sample mixture draw
};

SynthResult generate_synthetic(const SynthSpec& spec);

}  // namespace buoca
