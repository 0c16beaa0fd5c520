#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "json.hpp"

#include "buoca/allocator.hpp"
#include "buoca/features.hpp"
#include "buoca/pilot.hpp"
#include "buoca/simulator.hpp"

namespace buoca {

// Per-sample worker-count classes taken from a chosen frontier point,
// with the provenance needed to reproduce them.
struct AllocationLabelSet {
  std::vector<int> labels;
  Rational reference_budget;
  int reference_step = 1;
};

AllocationLabelSet labels_from_frontier(const BudgetFrontier& frontier,
                                        const FrontierPoint& reference);

// fold_of[i] in [0, folds). Within each class, members are shuffled by the
// seed and dealt round-robin, so per-class fold counts differ by at most 1.
struct FoldPlan {
  std::vector<int> fold_of;
  int folds = 0;
};

FoldPlan stratified_kfold(const std::vector<int>& labels, int folds, std::uint64_t seed);

struct ForestSettings {
  int trees = 100;
  int max_depth = 12;
  // Candidate columns per split; 0 means ceil(sqrt(cols)).
  int max_features = 0;
  enum class Weighting { balanced_subsample, uniform } weighting =
      Weighting::balanced_subsample;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 means hardware concurrency
};

// Flat node array; leaves have column == -1 and carry leaf_class as an
// index into the model's class list.
struct TreeNode {
  int column = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_class = -1;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  int predict(const double* row) const;  // returns class index
};

struct AllocationModel {
  std::vector<std::string> columns;  // training schema, enforced at predict
  std::vector<int> classes;          // sorted distinct labels
  ForestSettings settings;
  std::vector<DecisionTree> trees;
};

// Bagged Gini decision trees: per-tree bootstrap resamples, per-node
// random column subsets, balanced-subsample class weights. Per-tree
// generators derive from (seed, tree index), so parallel and serial
// training produce identical models.
AllocationModel train_allocation_model(const FeatureMatrix& features,
                                       const AllocationLabelSet& labels,
                                       const ForestSettings& settings);

// Plurality vote over trees; ties break to the lowest class value.
// Throws ValidationError when the feature schema does not match.
std::vector<int> predict(const AllocationModel& model, const FeatureMatrix& features);

nlohmann::json model_to_json(const AllocationModel& model);
AllocationModel model_from_json(const nlohmann::json& doc);

// Small exhaustive search over (trees, depth, max_features) by mean
// cross-validated classification accuracy; ties keep the earliest combo.
struct GridSearchEntry {
  int trees;
  int max_depth;
  int max_features;
  double cv_accuracy;
};
struct GridSearchResult {
  ForestSettings best;
  double best_accuracy = 0.0;
  std::vector<GridSearchEntry> table;
};
GridSearchResult grid_search(const FeatureMatrix& features,
                             const AllocationLabelSet& labels,
                             const std::vector<int>& trees_grid,
                             const std::vector<int>& depth_grid,
                             const std::vector<int>& max_features_grid, int folds,
                             std::uint64_t seed);

// Earliest frontier point whose allocation has at least min_per_class
// samples in every class 1,3,...,k; throws PreconditionError when no
// point qualifies.
const FrontierPoint& auto_reference_point(const BudgetFrontier& frontier,
                                          std::size_t min_per_class);

// Out-of-fold deployment: train on all folds but one, predict worker
// counts for the held-out fold, stitch the predictions into one full
// allocation, then price it and simulate it against the recorded labels.
struct DeploymentReport {
  struct FoldResult {
    int fold = 0;
    std::size_t test_count = 0;
    Rational spent_cost;
    double sim_accuracy = 0.0;
  };
  std::vector<FoldResult> folds;
  Allocation predicted;
  Rational spent_cost;
  double sim_accuracy = 0.0;
  Rational reference_budget;
  Rational reference_cost;
  double reference_ccr = 0.0;
  double reference_sim_accuracy = 0.0;
  int reference_step = 1;
  std::map<int, std::size_t> label_class_counts;
  ForestSettings settings;
  int fold_count = 0;
  TieRule tie_rule = TieRule::fractional;
};

DeploymentReport cross_validated_deployment(const PilotDataset& data,
                                            const FeatureMatrix& features,
                                            const BudgetFrontier& frontier,
                                            const FrontierPoint& reference, int folds,
                                            std::uint64_t seed,
                                            const ForestSettings& settings,
                                            TieRule rule = TieRule::fractional);

nlohmann::json deployment_to_json(const DeploymentReport& report);

}  // namespace buoca
