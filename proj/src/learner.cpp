#include "buoca/learner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "buoca/errors.hpp"
#include "buoca/rng.hpp"

namespace buoca {

namespace {

// Training view: row indices into the feature matrix (with bootstrap
// multiplicity), class indices, and one weight per class.
struct TrainView {
  const FeatureMatrix* features;
  const std::vector<int>* class_of_row;  // class index per dataset row
  std::vector<double> class_weights;
};

struct SplitChoice {
  bool found = false;
  int column = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

double gini_from_sums(const std::vector<double>& weight_by_class, double total) {
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (double w : weight_by_class) sum_sq += w * w;
  return 1.0 - sum_sq / (total * total);
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainView& view, const ForestSettings& settings,
              std::size_t class_count, Rng rng)
      : view_(view),
        settings_(settings),
        class_count_(class_count),
        rng_(rng),
        columns_(view.features->cols()) {
    std::iota(columns_.begin(), columns_.end(), 0);
  }

  DecisionTree build(std::vector<std::uint32_t> rows) {
    tree_.nodes.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  int leaf(const std::vector<std::uint32_t>& rows) {
    std::vector<double> weight(class_count_, 0.0);
    for (auto r : rows) {
      const int c = (*view_.class_of_row)[r];
      weight[static_cast<std::size_t>(c)] += view_.class_weights[static_cast<std::size_t>(c)];
    }
    int best = 0;
    for (std::size_t c = 1; c < class_count_; ++c) {
      if (weight[c] > weight[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
      // ties keep the lowest class index (classes are stored sorted)
    }
    TreeNode node;
    node.leaf_class = best;
    tree_.nodes.push_back(node);
    return static_cast<int>(tree_.nodes.size()) - 1;
  }

  SplitChoice best_split(const std::vector<std::uint32_t>& rows) {
    const auto cols = view_.features->cols();
    std::size_t candidates = settings_.max_features > 0
                                 ? static_cast<std::size_t>(settings_.max_features)
                                 : static_cast<std::size_t>(
                                       std::ceil(std::sqrt(static_cast<double>(cols))));
    candidates = std::min(candidates, cols);

    // Partial Fisher-Yates over the column list; first `candidates` win.
    for (std::size_t i = 0; i < candidates; ++i) {
      const auto pick = i + static_cast<std::size_t>(rng_.bounded(cols - i));
      std::swap(columns_[i], columns_[pick]);
    }

    std::vector<double> total_weight(class_count_, 0.0);
    double total = 0.0;
    for (auto r : rows) {
      const int c = (*view_.class_of_row)[r];
      const double w = view_.class_weights[static_cast<std::size_t>(c)];
      total_weight[static_cast<std::size_t>(c)] += w;
      total += w;
    }

    SplitChoice choice;
    std::vector<std::pair<double, int>> order;  // (value, class index)
    std::vector<double> left_weight(class_count_, 0.0);
    for (std::size_t ci = 0; ci < candidates; ++ci) {
      const std::size_t col = columns_[ci];
      order.clear();
      for (auto r : rows) {
        order.emplace_back(view_.features->at(r, col), (*view_.class_of_row)[r]);
      }
      std::sort(order.begin(), order.end());
      if (order.front().first == order.back().first) continue;  // constant column

      std::fill(left_weight.begin(), left_weight.end(), 0.0);
      double left_total = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const double w = view_.class_weights[static_cast<std::size_t>(order[i].second)];
        left_weight[static_cast<std::size_t>(order[i].second)] += w;
        left_total += w;
        if (order[i].first == order[i + 1].first) continue;  // not a boundary
        double right_total = total - left_total;
        double impurity = 0.0;
        if (left_total > 0.0) impurity += left_total * gini_from_sums(left_weight, left_total);
        if (right_total > 0.0) {
          double right_sq = 0.0;
          for (std::size_t c = 0; c < class_count_; ++c) {
            const double rw = total_weight[c] - left_weight[c];
            right_sq += rw * rw;
          }
          impurity += right_total * (1.0 - right_sq / (right_total * right_total));
        }
        if (!choice.found || impurity < choice.impurity) {
          choice.found = true;
          choice.column = static_cast<int>(col);
          choice.threshold = order[i].first + (order[i + 1].first - order[i].first) / 2.0;
          choice.impurity = impurity;
        }
      }
    }
    return choice;
  }

  int grow(std::vector<std::uint32_t> rows, int depth) {
    bool pure = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if ((*view_.class_of_row)[rows[i]] != (*view_.class_of_row)[rows[0]]) {
        pure = false;
        break;
      }
    }
    if (pure || depth >= settings_.max_depth || rows.size() < 2) return leaf(rows);

    const SplitChoice choice = best_split(rows);
    if (!choice.found) return leaf(rows);

    std::vector<std::uint32_t> left_rows, right_rows;
    for (auto r : rows) {
      if (view_.features->at(r, static_cast<std::size_t>(choice.column)) <=
          choice.threshold) {
        left_rows.push_back(r);
      } else {
        right_rows.push_back(r);
      }
    }
    rows.clear();
    rows.shrink_to_fit();

    TreeNode node;
    node.column = choice.column;
    node.threshold = choice.threshold;
    tree_.nodes.push_back(node);
    const int index = static_cast<int>(tree_.nodes.size()) - 1;
    const int left = grow(std::move(left_rows), depth + 1);
    const int right = grow(std::move(right_rows), depth + 1);
    tree_.nodes[static_cast<std::size_t>(index)].left = left;
    tree_.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  }

  const TrainView& view_;
  const ForestSettings& settings_;
  std::size_t class_count_;
  Rng rng_;
  std::vector<std::size_t> columns_;
  DecisionTree tree_;
};

std::vector<double> bootstrap_class_weights(const std::vector<std::uint32_t>& rows,
                                            const std::vector<int>& class_of_row,
                                            std::size_t class_count,
                                            ForestSettings::Weighting weighting) {
  std::vector<double> weights(class_count, 1.0);
  if (weighting == ForestSettings::Weighting::uniform) return weights;
  std::vector<std::size_t> counts(class_count, 0);
  std::size_t present = 0;
  for (auto r : rows) ++counts[static_cast<std::size_t>(class_of_row[r])];
  for (auto c : counts) present += c > 0 ? 1 : 0;
  for (std::size_t c = 0; c < class_count; ++c) {
    weights[c] = counts[c] == 0
                     ? 0.0
                     : static_cast<double>(rows.size()) /
                           (static_cast<double>(present) * static_cast<double>(counts[c]));
  }
  return weights;
}

int predict_class_index(const AllocationModel& model, const double* row) {
  std::vector<int> votes(model.classes.size(), 0);
  for (const auto& tree : model.trees) {
    ++votes[static_cast<std::size_t>(tree.predict(row))];
  }
  int best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;  // classes are sorted, so ties keep the lowest class value
}

}  // namespace

AllocationLabelSet labels_from_frontier(const BudgetFrontier& frontier,
                                        const FrontierPoint& reference) {
  AllocationLabelSet labels;
  labels.labels = reference.allocation.n;
  labels.reference_budget = reference.budget;
  labels.reference_step = reference.m;
  if (labels.labels.size() != frontier.J) {
    throw ValidationError("reference point does not belong to the frontier");
  }
  return labels;
}

FoldPlan stratified_kfold(const std::vector<int>& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("stratified folds need folds >= 2");
  if (labels.empty()) throw ValidationError("stratified folds need at least one label");

  std::map<int, std::vector<std::size_t>> members;  // class -> row indices
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

  FoldPlan plan;
  plan.folds = folds;
  plan.fold_of.assign(labels.size(), 0);
  Rng rng(seed);
  for (auto& [cls, rows] : members) {
    rng.shuffle(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      plan.fold_of[rows[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }
  }
  return plan;
}

int DecisionTree::predict(const double* row) const {
  int index = 0;
  while (nodes[static_cast<std::size_t>(index)].column >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(index)];
    index = row[node.column] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(index)].leaf_class;
}

AllocationModel train_allocation_model(const FeatureMatrix& features,
                                       const AllocationLabelSet& labels,
                                       const ForestSettings& settings) {
  features.validate();
  if (features.rows() != labels.labels.size()) {
    throw ValidationError("feature rows and labels differ in length");
  }
  if (features.rows() == 0) throw ValidationError("cannot train on zero rows");
  if (settings.trees < 1 || settings.max_depth < 1) {
    throw ValidationError("forest needs trees >= 1 and max_depth >= 1");
  }

  AllocationModel model;
  model.columns = features.columns;
  model.settings = settings;
  model.classes = labels.labels;
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                      model.classes.end());

  std::vector<int> class_of_row(labels.labels.size());
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const auto it =
        std::lower_bound(model.classes.begin(), model.classes.end(), labels.labels[i]);
    class_of_row[i] = static_cast<int>(it - model.classes.begin());
  }

  const auto row_count = static_cast<std::uint32_t>(features.rows());
  model.trees.resize(static_cast<std::size_t>(settings.trees));
  auto build_tree = [&](std::size_t t) {
    Rng rng = Rng::derive(settings.seed, t);
    std::vector<std::uint32_t> rows(row_count);
    for (auto& r : rows) {
      r = static_cast<std::uint32_t>(rng.bounded(row_count));
    }
    TrainView view{&features, &class_of_row,
                   bootstrap_class_weights(rows, class_of_row, model.classes.size(),
                                           settings.weighting)};
    TreeBuilder builder(view, settings, model.classes.size(), rng);
    model.trees[t] = builder.build(std::move(rows));
  };

  unsigned thread_count = settings.threads > 0
                              ? static_cast<unsigned>(settings.threads)
                              : std::max(1u, std::thread::hardware_concurrency());
  thread_count = std::min<unsigned>(thread_count,
                                    static_cast<unsigned>(settings.trees));
  if (thread_count <= 1) {
    for (std::size_t t = 0; t < model.trees.size(); ++t) build_tree(t);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < thread_count; ++w) {
      workers.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < model.trees.size();
             t = next.fetch_add(1)) {
          build_tree(t);
        }
      });
    }
    for (auto& worker : workers) worker.join();
  }
  return model;
}

std::vector<int> predict(const AllocationModel& model, const FeatureMatrix& features) {
  features.validate();
  if (features.columns != model.columns) {
    throw ValidationError("feature schema does not match the trained model");
  }
  std::vector<int> out;
  out.reserve(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const int index = predict_class_index(model, features.data.data() + r * features.cols());
    out.push_back(model.classes[static_cast<std::size_t>(index)]);
  }
  return out;
}

nlohmann::json model_to_json(const AllocationModel& model) {
  nlohmann::json doc;
  doc["format"] = "buoca.allocation_model/1";
  doc["columns"] = model.columns;
  doc["classes"] = model.classes;
  doc["settings"] = {
      {"trees", model.settings.trees},
      {"max_depth", model.settings.max_depth},
      {"max_features", model.settings.max_features},
      {"weighting", model.settings.weighting == ForestSettings::Weighting::uniform
                        ? "uniform"
                        : "balanced_subsample"},
      {"seed", model.settings.seed},
  };
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : tree.nodes) {
      nodes.push_back({node.column, node.threshold, node.left, node.right,
                       node.leaf_class});
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  return doc;
}

AllocationModel model_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != std::string("buoca.allocation_model/1")) {
    throw ParseError("unrecognized model format tag");
  }
  AllocationModel model;
  model.columns = doc.at("columns").get<std::vector<std::string>>();
  model.classes = doc.at("classes").get<std::vector<int>>();
  const auto& settings = doc.at("settings");
  model.settings.trees = settings.at("trees").get<int>();
  model.settings.max_depth = settings.at("max_depth").get<int>();
  model.settings.max_features = settings.at("max_features").get<int>();
  model.settings.weighting = settings.at("weighting").get<std::string>() == "uniform"
                                 ? ForestSettings::Weighting::uniform
                                 : ForestSettings::Weighting::balanced_subsample;
  model.settings.seed = settings.at("seed").get<std::uint64_t>();
  for (const auto& tree_doc : doc.at("trees")) {
    DecisionTree tree;
    for (const auto& node_doc : tree_doc) {
      TreeNode node;
      node.column = node_doc.at(0).get<int>();
      node.threshold = node_doc.at(1).get<double>();
      node.left = node_doc.at(2).get<int>();
      node.right = node_doc.at(3).get<int>();
      node.leaf_class = node_doc.at(4).get<int>();
      tree.nodes.push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

namespace {

FeatureMatrix select_rows(const FeatureMatrix& features,
                          const std::vector<std::size_t>& rows) {
  FeatureMatrix out;
  out.columns = features.columns;
  out.sample_ids.reserve(rows.size());
  out.data.reserve(rows.size() * features.cols());
  for (auto r : rows) {
    out.sample_ids.push_back(features.sample_ids[r]);
    const auto* begin = features.data.data() + r * features.cols();
    out.data.insert(out.data.end(), begin, begin + features.cols());
  }
  return out;
}

double cv_accuracy(const FeatureMatrix& features, const AllocationLabelSet& labels,
                   const FoldPlan& plan, const ForestSettings& settings) {
  std::size_t hits = 0;
  for (int fold = 0; fold < plan.folds; ++fold) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
      (plan.fold_of[i] == fold ? test_rows : train_rows).push_back(i);
    }
    if (train_rows.empty() || test_rows.empty()) continue;
    AllocationLabelSet train_labels;
    train_labels.reference_budget = labels.reference_budget;
    train_labels.reference_step = labels.reference_step;
    for (auto r : train_rows) train_labels.labels.push_back(labels.labels[r]);
    ForestSettings fold_settings = settings;
    fold_settings.seed = mix_seed(settings.seed, static_cast<std::uint64_t>(fold) + 1);
    const auto model =
        train_allocation_model(select_rows(features, train_rows), train_labels,
                               fold_settings);
    const auto predicted = predict(model, select_rows(features, test_rows));
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      if (predicted[i] == labels.labels[test_rows[i]]) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(labels.labels.size());
}

}  // namespace

GridSearchResult grid_search(const FeatureMatrix& features,
                             const AllocationLabelSet& labels,
                             const std::vector<int>& trees_grid,
                             const std::vector<int>& depth_grid,
                             const std::vector<int>& max_features_grid, int folds,
                             std::uint64_t seed) {
  if (trees_grid.empty() || depth_grid.empty() || max_features_grid.empty()) {
    throw ValidationError("grid search needs non-empty grids");
  }
  const FoldPlan plan = stratified_kfold(labels.labels, folds, seed);
  GridSearchResult result;
  bool first = true;
  for (int trees : trees_grid) {
    for (int depth : depth_grid) {
      for (int max_features : max_features_grid) {
        ForestSettings settings;
        settings.trees = trees;
        settings.max_depth = depth;
        settings.max_features = max_features;
        settings.seed = seed;
        const double accuracy = cv_accuracy(features, labels, plan, settings);
        result.table.push_back({trees, depth, max_features, accuracy});
        if (first || accuracy > result.best_accuracy) {
          first = false;
          result.best = settings;
          result.best_accuracy = accuracy;
        }
      }
    }
  }
  return result;
}

const FrontierPoint& auto_reference_point(const BudgetFrontier& frontier,
                                          std::size_t min_per_class) {
  for (const auto& point : frontier.points) {
    const auto counts = allocation_class_counts(point.allocation);
    bool ok = true;
    for (int cls = 1; cls <= frontier.k; cls += 2) {
      const auto it = counts.find(cls);
      if (it == counts.end() || it->second < min_per_class) {
        ok = false;
        break;
      }
    }
    if (ok) return point;
  }
  throw PreconditionError(
      "no frontier point has " + std::to_string(min_per_class) +
      " samples in every worker-count class; pick a reference budget explicitly");
}

DeploymentReport cross_validated_deployment(const PilotDataset& data,
                                            const FeatureMatrix& features,
                                            const BudgetFrontier& frontier,
                                            const FrontierPoint& reference, int folds,
                                            std::uint64_t seed,
                                            const ForestSettings& settings,
                                            TieRule rule) {
  data.validate();
  features.validate();
  if (features.rows() != data.size()) {
    throw ValidationError("feature rows do not match the pilot dataset");
  }
  if (features.sample_ids != data.sample_ids) {
    throw ValidationError("feature sample ids do not match the pilot dataset");
  }
  if (frontier.k > data.k) {
    throw ValidationError("frontier extrapolates beyond the recorded worker pool");
  }

  const AllocationLabelSet labels = labels_from_frontier(frontier, reference);
  const FoldPlan plan = stratified_kfold(labels.labels, folds, seed);

  DeploymentReport report;
  report.predicted.n.assign(data.size(), 1);
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
      (plan.fold_of[i] == fold ? test_rows : train_rows).push_back(i);
    }
    if (test_rows.empty()) continue;
    if (train_rows.empty()) {
      throw ValidationError("a training fold is empty; reduce the fold count");
    }
    AllocationLabelSet train_labels;
    train_labels.reference_budget = labels.reference_budget;
    train_labels.reference_step = labels.reference_step;
    for (auto r : train_rows) train_labels.labels.push_back(labels.labels[r]);
    ForestSettings fold_settings = settings;
    fold_settings.seed = mix_seed(settings.seed, static_cast<std::uint64_t>(fold) + 1);
    const auto model = train_allocation_model(select_rows(features, train_rows),
                                              train_labels, fold_settings);
    const auto predicted = predict(model, select_rows(features, test_rows));
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      report.predicted.n[test_rows[i]] = predicted[i];
    }
  }

  const auto outcome = exact_subset_accuracy(data, report.predicted, rule);
  const auto reference_outcome = exact_subset_accuracy(data, reference.allocation, rule);

  for (int fold = 0; fold < folds; ++fold) {
    DeploymentReport::FoldResult fr;
    fr.fold = fold;
    int workers = 0;
    double accuracy = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (plan.fold_of[i] != fold) continue;
      ++fr.test_count;
      workers += report.predicted.n[i];
      accuracy += outcome.per_sample_accuracy[i];
    }
    fr.spent_cost = data.unit_cost * workers;
    fr.sim_accuracy = fr.test_count > 0
                          ? accuracy / static_cast<double>(fr.test_count)
                          : 0.0;
    report.folds.push_back(fr);
  }

  report.spent_cost = outcome.total_cost;
  report.sim_accuracy = outcome.mean_accuracy;
  report.reference_budget = reference.budget;
  report.reference_cost = reference.cost;
  report.reference_ccr = reference.ccr;
  report.reference_sim_accuracy = reference_outcome.mean_accuracy;
  report.reference_step = reference.m;
  report.label_class_counts = allocation_class_counts(reference.allocation);
  report.settings = settings;
  report.fold_count = folds;
  report.tie_rule = rule;
  return report;
}

nlohmann::json deployment_to_json(const DeploymentReport& report) {
  nlohmann::json doc;
  doc["format"] = "buoca.deployment/1";
  doc["reference"] = {
      {"step", report.reference_step},
      {"budget", report.reference_budget.to_double()},
      {"cost", report.reference_cost.to_double()},
      {"ccr", report.reference_ccr},
      {"simulated_accuracy", report.reference_sim_accuracy},
  };
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& fr : report.folds) {
    folds.push_back({{"fold", fr.fold},
                     {"test_count", fr.test_count},
                     {"spent_cost", fr.spent_cost.to_double()},
                     {"accuracy", fr.sim_accuracy}});
  }
  doc["folds"] = std::move(folds);
  doc["aggregate"] = {
      {"spent_cost", report.spent_cost.to_double()},
      {"accuracy", report.sim_accuracy},
  };
  nlohmann::json counts;
  for (const auto& [cls, count] : report.label_class_counts) {
    counts[std::to_string(cls)] = count;
  }
  doc["label_class_counts"] = std::move(counts);
  doc["settings"] = {
      {"trees", report.settings.trees},
      {"max_depth", report.settings.max_depth},
      {"max_features", report.settings.max_features},
      {"weighting", report.settings.weighting == ForestSettings::Weighting::uniform
                        ? "uniform"
                        : "balanced_subsample"},
      {"seed", report.settings.seed},
      {"folds", report.fold_count},
  };
  doc["tie_rule"] = report.tie_rule == TieRule::fractional ? "fractional" : "fail";
  doc["predicted_allocation"] = report.predicted.n;
  return doc;
}

}  // namespace buoca
