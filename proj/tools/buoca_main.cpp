#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "buoca/allocator.hpp"
#include "buoca/csv.hpp"
#include "buoca/errors.hpp"
#include "buoca/features.hpp"
#include "buoca/learner.hpp"
#include "buoca/oracle.hpp"
#include "buoca/pilot.hpp"
#include "buoca/rng.hpp"
#include "buoca/simulator.hpp"
#include "buoca/success_model.hpp"
#include "buoca/synth.hpp"

namespace {

using buoca::Rational;
using nlohmann::json;
namespace fs = std::filesystem;

enum class OutFormat { csv, json_doc };

OutFormat resolve_format(const std::string& flag, const std::string& out) {
  if (flag == "json") return OutFormat::json_doc;
  if (flag == "csv") return OutFormat::csv;
  if (!out.empty() && fs::path(out).extension() == ".json") return OutFormat::json_doc;
  return OutFormat::csv;
}

std::string format_name(OutFormat format) {
  return format == OutFormat::json_doc ? "json" : "csv";
}

void write_text_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw buoca::IoError("cannot open for writing: " + path.string());
  out << body;
  out.flush();
  if (!out) throw buoca::IoError("write failed: " + path.string());
}

void emit(const std::string& out_path, const std::string& body) {
  if (out_path.empty()) {
    std::cout << body;
  } else {
    write_text_file(out_path, body);
  }
}

std::string json_body(const json& doc) { return doc.dump(2) + "\n"; }

// CSV outputs carry their run configuration in a sidecar next to the file.
void write_sidecar(const std::string& out_path, const json& config) {
  if (out_path.empty()) return;
  fs::path side(out_path);
  side.replace_extension(".run.json");
  write_text_file(side, json_body(config));
}

double parse_double(std::string_view text, const std::string& what) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw buoca::ValidationError("cannot parse " + what + ": " + std::string(text));
  }
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (const char ch : text) {
    if (ch == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  parts.push_back(current);
  return parts;
}

buoca::TieRule parse_tie_rule(const std::string& text) {
  if (text == "fail") return buoca::TieRule::fail;
  if (text == "fractional") return buoca::TieRule::fractional;
  throw buoca::ValidationError("unknown tie rule: " + text);
}

std::vector<buoca::MixtureComponent> parse_mixture(const std::string& text) {
  std::vector<buoca::MixtureComponent> mixture;
  for (const auto& part : split(text, ',')) {
    const auto fields = split(part, ':');
    if (fields.size() != 2) {
      throw buoca::ValidationError("mixture components look like p:weight, got: " + part);
    }
    mixture.push_back({parse_double(fields[0], "mixture probability"),
                       parse_double(fields[1], "mixture weight")});
  }
  return mixture;
}

buoca::PilotDataset load_pilot_with_cost(const std::string& path,
                                         const std::string& unit_cost_flag) {
  auto data = buoca::load_pilot(path);
  if (!unit_cost_flag.empty()) data.unit_cost = Rational::parse(unit_cost_flag);
  data.validate();
  return data;
}

struct BuiltFrontier {
  buoca::AllocationProblem problem;
  buoca::BudgetFrontier frontier;
  std::string algorithm;
};

// Uses the sort-once variant whenever every success curve satisfies its
// concavity precondition, otherwise falls back to the stepwise greedy.
BuiltFrontier build_frontier(const buoca::PilotDataset& data, int k_max) {
  BuiltFrontier built;
  const auto estimates = buoca::estimate_success_probabilities(data);
  built.problem = buoca::AllocationProblem::from_estimates(estimates, data.unit_cost, k_max);
  const bool sorted_ok =
      std::all_of(built.problem.curves.begin(), built.problem.curves.end(),
                  [](const buoca::SuccessCurve& curve) {
                    return buoca::classify_curve(curve) != buoca::CurveClass::Other;
                  });
  if (sorted_ok) {
    built.frontier = buoca::buoca_sorted(built.problem);
    built.algorithm = "sorted";
  } else {
    built.frontier = buoca::buoca_greedy(built.problem);
    built.algorithm = "greedy";
  }
  return built;
}

buoca::Allocation read_allocation_csv(const std::string& path,
                                      const buoca::PilotDataset& data) {
  const auto rows = buoca::csv::read_file(path);
  if (rows.empty() || rows.front() != buoca::csv::Row{"sample_id", "n"}) {
    throw buoca::ParseError("allocation file header must be sample_id,n");
  }
  if (rows.size() - 1 != data.size()) {
    throw buoca::ValidationError("allocation file row count does not match the pilot");
  }
  buoca::Allocation alloc;
  alloc.n.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 2) {
      throw buoca::ParseError("allocation rows need exactly 2 fields");
    }
    if (row[0] != data.sample_ids[i - 1]) {
      throw buoca::ValidationError("allocation ids must match the pilot order: " + row[0]);
    }
    int value = 0;
    const char* begin = row[1].data();
    const char* end = begin + row[1].size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
      throw buoca::ParseError("cannot parse worker count: " + row[1]);
    }
    alloc.n.push_back(value);
  }
  return alloc;
}

struct EstimateOpts {
  std::string pilot, out, format, unit_cost;
};

int run_estimate(const EstimateOpts& o) {
  const auto data = load_pilot_with_cost(o.pilot, o.unit_cost);
  const auto estimates = buoca::estimate_success_probabilities(data);
  const OutFormat format = resolve_format(o.format, o.out);
  const json config{{"command", "estimate"},
                    {"pilot", o.pilot},
                    {"out", o.out},
                    {"format", format_name(format)},
                    {"unit_cost", data.unit_cost.str()}};
  if (format == OutFormat::json_doc) {
    json doc;
    doc["format"] = "buoca.estimates/1";
    doc["config"] = config;
    doc["k"] = data.k;
    doc["unit_cost"] = data.unit_cost.str();
    json samples = json::array();
    for (std::size_t j = 0; j < data.size(); ++j) {
      samples.push_back({{"id", data.sample_ids[j]},
                         {"matches", estimates.matches[j]},
                         {"p", estimates.value(j)}});
    }
    doc["samples"] = std::move(samples);
    emit(o.out, json_body(doc));
  } else {
    std::ostringstream out;
    buoca::csv::write_row(out, std::vector<std::string>{"sample_id", "matches", "k", "p"});
    for (std::size_t j = 0; j < data.size(); ++j) {
      buoca::csv::write_row(
          out, std::vector<std::string>{data.sample_ids[j],
                                        std::to_string(estimates.matches[j]),
                                        std::to_string(data.k),
                                        buoca::csv::number(estimates.value(j))});
    }
    emit(o.out, out.str());
    write_sidecar(o.out, config);
  }
  return 0;
}

struct CurveOpts {
  std::string pilot, out, format, unit_cost;
  int k_max = 0;
  bool ccr_only = false;
};

int run_curve(const CurveOpts& o) {
  const auto data = load_pilot_with_cost(o.pilot, o.unit_cost);
  const auto built = build_frontier(data, o.k_max);
  const auto baselines = buoca::fixed_allocation_curve(built.problem);
  const OutFormat format = resolve_format(o.format, o.out);
  json config{{"command", "curve"},
              {"pilot", o.pilot},
              {"out", o.out},
              {"format", format_name(format)},
              {"unit_cost", data.unit_cost.str()},
              {"k_max", o.k_max},
              {"ccr_only", o.ccr_only},
              {"algorithm", built.algorithm}};
  if (format == OutFormat::json_doc) {
    json doc = buoca::frontier_to_json(built.frontier, !o.ccr_only);
    doc["config"] = config;
    json baseline_json = json::array();
    for (const auto& baseline : baselines) {
      baseline_json.push_back({{"n", baseline.n},
                               {"cost", baseline.cost.to_double()},
                               {"ccr", baseline.ccr}});
    }
    doc["baselines"] = std::move(baseline_json);
    emit(o.out, json_body(doc));
  } else {
    std::ostringstream out;
    buoca::write_frontier_csv(built.frontier, out, !o.ccr_only);
    emit(o.out, out.str());
    if (!o.out.empty()) {
      fs::path baseline_path(o.out);
      baseline_path.replace_extension(".baselines.csv");
      std::ostringstream baseline_out;
      buoca::csv::write_row(baseline_out, std::vector<std::string>{"n", "cost", "ccr"});
      for (const auto& baseline : baselines) {
        buoca::csv::write_row(baseline_out,
                              std::vector<std::string>{std::to_string(baseline.n),
                                                       baseline.cost.str(),
                                                       buoca::csv::number(baseline.ccr)});
      }
      write_text_file(baseline_path, baseline_out.str());
      config["baselines_file"] = baseline_path.string();
    }
    write_sidecar(o.out, config);
  }
  return 0;
}

struct SimulateOpts {
  std::string pilot, out, format, unit_cost, alloc_file, budget;
  std::string method = "exact";
  std::string tie_rule = "fractional";
  int fixed = 0;
  std::uint64_t seed = 0;
  std::uint64_t trials = 100000;
};

int run_simulate(const SimulateOpts& o, bool fixed_given, bool seed_given) {
  const auto data = load_pilot_with_cost(o.pilot, o.unit_cost);
  const int sources = int(fixed_given) + int(!o.budget.empty()) + int(!o.alloc_file.empty());
  if (sources != 1) {
    throw buoca::ValidationError("provide exactly one of --fixed, --budget, --alloc-file");
  }
  const auto rule = parse_tie_rule(o.tie_rule);
  buoca::Allocation alloc;
  json source;
  if (fixed_given) {
    alloc = buoca::Allocation::constant(data.size(), o.fixed);
    source = {{"fixed", o.fixed}};
  } else if (!o.budget.empty()) {
    const auto built = build_frontier(data, 0);
    const auto& point = buoca::allocation_at_budget(built.frontier, Rational::parse(o.budget));
    alloc = point.allocation;
    source = {{"budget", o.budget},
              {"frontier_step", point.m},
              {"frontier_budget", point.budget.str()},
              {"algorithm", built.algorithm}};
  } else {
    alloc = read_allocation_csv(o.alloc_file, data);
    source = {{"alloc_file", o.alloc_file}};
  }
  alloc.validate(data.k);

  buoca::SimulationReport report;
  if (o.method == "exact") {
    report = buoca::exact_subset_accuracy(data, alloc, rule);
  } else if (o.method == "mc") {
    if (!seed_given) {
      throw buoca::ValidationError("--method mc requires an explicit --seed");
    }
    if (o.trials == 0) throw buoca::ValidationError("--trials must be >= 1");
    report = buoca::monte_carlo_accuracy(data, alloc, o.seed, o.trials, rule);
  } else {
    throw buoca::ValidationError("unknown method: " + o.method);
  }

  const OutFormat format = resolve_format(o.format, o.out);
  json config{{"command", "simulate"},
              {"pilot", o.pilot},
              {"out", o.out},
              {"format", format_name(format)},
              {"unit_cost", data.unit_cost.str()},
              {"method", o.method},
              {"tie_rule", o.tie_rule},
              {"source", source}};
  if (o.method == "mc") {
    config["seed"] = o.seed;
    config["trials"] = o.trials;
  }
  if (format == OutFormat::json_doc) {
    json doc = buoca::report_to_json(report, data, alloc);
    doc["config"] = config;
    emit(o.out, json_body(doc));
  } else {
    std::ostringstream out;
    buoca::write_report_csv(report, data, alloc, out);
    emit(o.out, out.str());
    config["mean_accuracy"] = report.mean_accuracy;
    config["total_cost"] = report.total_cost.str();
    write_sidecar(o.out, config);
  }
  return 0;
}

struct TrainEvalOpts {
  std::string pilot, features, tweets, out, save_model, unit_cost, reference_budget;
  std::string tie_rule = "fractional";
  bool auto_reference = false;
  int min_per_class = 5;
  int folds = 5;
  int trees = 100;
  int max_depth = 12;
  int max_features = 0;
  int threads = 0;
  std::uint64_t seed = 0;
};

int run_train_eval(const TrainEvalOpts& o) {
  const auto data = load_pilot_with_cost(o.pilot, o.unit_cost);
  if (o.features.empty() == o.tweets.empty()) {
    throw buoca::ValidationError("provide exactly one of --features or --tweets");
  }
  buoca::FeatureMatrix features;
  if (!o.features.empty()) {
    features = buoca::load_feature_csv(o.features);
  } else {
    const auto [ids, texts] = buoca::load_text_corpus_csv(o.tweets);
    buoca::SarcasmMatrix sarcasm;
    sarcasm.sample_ids = ids;
    sarcasm.rows.reserve(texts.size());
    for (const auto& text : texts) sarcasm.rows.push_back(buoca::sarcasm_features(text));
    const auto tfidf = buoca::tfidf_fit_transform(ids, texts);
    features = buoca::assemble_features(&sarcasm, &tfidf, nullptr);
  }
  features.validate();

  const bool budget_given = !o.reference_budget.empty();
  if (budget_given == o.auto_reference) {
    throw buoca::ValidationError("provide exactly one of --reference-budget or --auto-reference");
  }
  const auto built = build_frontier(data, 0);
  const buoca::FrontierPoint& reference =
      budget_given
          ? buoca::allocation_at_budget(built.frontier, Rational::parse(o.reference_budget))
          : buoca::auto_reference_point(built.frontier,
                                        static_cast<std::size_t>(o.min_per_class));

  buoca::ForestSettings settings;
  settings.trees = o.trees;
  settings.max_depth = o.max_depth;
  settings.max_features = o.max_features;
  settings.seed = o.seed;
  settings.threads = o.threads;
  const auto rule = parse_tie_rule(o.tie_rule);
  const auto report = buoca::cross_validated_deployment(data, features, built.frontier,
                                                        reference, o.folds, o.seed,
                                                        settings, rule);

  json config{{"command", "train-eval"},
              {"pilot", o.pilot},
              {"features", o.features},
              {"tweets", o.tweets},
              {"out", o.out},
              {"save_model", o.save_model},
              {"unit_cost", data.unit_cost.str()},
              {"reference_budget", o.reference_budget},
              {"auto_reference", o.auto_reference},
              {"min_per_class", o.min_per_class},
              {"folds", o.folds},
              {"trees", o.trees},
              {"max_depth", o.max_depth},
              {"max_features", o.max_features},
              {"threads", o.threads},
              {"seed", o.seed},
              {"tie_rule", o.tie_rule},
              {"algorithm", built.algorithm}};
  json doc = buoca::deployment_to_json(report);
  doc["config"] = config;
  emit(o.out, json_body(doc));

  if (!o.save_model.empty()) {
    const auto labels = buoca::labels_from_frontier(built.frontier, reference);
    const auto model = buoca::train_allocation_model(features, labels, settings);
    write_text_file(o.save_model, json_body(buoca::model_to_json(model)));
  }
  return 0;
}

struct SynthOpts {
  std::string mixture, out_prefix, label_set;
  std::string unit_cost = "1";
  std::uint64_t J = 0;
  int k = 1;
  double feature_noise = 0.05;
  int noise_columns = 2;
  std::uint64_t seed = 0;
};

int run_synth(const SynthOpts& o) {
  buoca::SynthSpec spec;
  spec.mixture = parse_mixture(o.mixture);
  spec.J = o.J;
  spec.k = o.k;
  if (!o.label_set.empty()) spec.label_set = split(o.label_set, ',');
  spec.unit_cost = Rational::parse(o.unit_cost);
  spec.feature_noise = o.feature_noise;
  spec.noise_columns = o.noise_columns;
  spec.seed = o.seed;
  const auto result = buoca::generate_synthetic(spec);

  const std::string pilot_path = o.out_prefix + ".pilot.csv";
  const std::string feature_path = o.out_prefix + ".features.csv";
  buoca::save_pilot(result.pilot, pilot_path, buoca::PilotFormat::csv);
  buoca::save_feature_csv(result.features, feature_path);

  const auto estimates = buoca::estimate_success_probabilities(result.pilot);
  double empirical_mean_p = 0.0;
  for (std::size_t j = 0; j < estimates.size(); ++j) empirical_mean_p += estimates.value(j);
  empirical_mean_p /= static_cast<double>(estimates.size());
  double mixture_mean_p = 0.0;
  for (const auto& component : spec.mixture) {
    mixture_mean_p += component.p * component.weight;
  }

  const json config{{"command", "synth"},
                    {"mixture", o.mixture},
                    {"J", o.J},
                    {"k", o.k},
                    {"label_set", spec.label_set},
                    {"unit_cost", spec.unit_cost.str()},
                    {"feature_noise", o.feature_noise},
                    {"noise_columns", o.noise_columns},
                    {"seed", o.seed},
                    {"out", o.out_prefix},
                    {"pilot_file", pilot_path},
                    {"features_file", feature_path},
                    {"empirical_mean_p", empirical_mean_p},
                    {"mixture_mean_p", mixture_mean_p}};
  write_text_file(o.out_prefix + ".run.json", json_body(config));
  return 0;
}

struct VerifyOpts {
  std::string out;
  int instances = 50;
  std::uint64_t seed = 0;
  double tol = 1e-12;
};

struct VerifyCheck {
  std::string name;
  bool pass = false;
  json detail;
};

int run_verify(const VerifyOpts& o) {
  buoca::OracleOptions oracle_options;
  if (const char* cap = std::getenv("BUOCA_ORACLE_CAP")) {
    const std::string_view text(cap);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw buoca::ValidationError("BUOCA_ORACLE_CAP must be an unsigned integer");
    }
    oracle_options.enumeration_cap = value;
  }

  std::vector<VerifyCheck> checks;

  // Closed-form identity and monotonicity-class checks on a dense p grid.
  {
    double max_deviation = 0.0;
    bool identities_pass = true;
    int misclassified = 0;
    for (int ip = 1; ip <= 99; ++ip) {
      const double p = ip / 100.0;
      const auto report = buoca::verify_theorem2_identities(p, 21, o.tol);
      max_deviation = std::max(max_deviation, report.max_abs_deviation);
      identities_pass = identities_pass && report.all_pass;
      for (int k = 3; k <= 21; k += 2) {
        const auto curve = buoca::binomial_success_curve(p, k);
        const auto expected = p < 0.5 ? buoca::CurveClass::NonIncreasing
                                      : buoca::CurveClass::NonDecreasingConcave;
        if (buoca::classify_curve(curve) != expected) ++misclassified;
      }
    }
    checks.push_back({"curve-identities", identities_pass && misclassified == 0,
                      json{{"grid_points", 99},
                           {"k", 21},
                           {"max_abs_deviation", max_deviation},
                           {"misclassified_curves", misclassified},
                           {"tolerance", o.tol}}});
  }

  // Greedy-vs-exhaustive equivalence, sorted-variant agreement, and the
  // budget law, on random concave instances small enough to brute-force.
  {
    buoca::Rng rng(o.seed);
    double max_gap = 0.0;
    int oracle_failures = 0;
    int sorted_failures = 0;
    int law_failures = 0;
    std::uint64_t evaluated = 0;
    for (int i = 0; i < o.instances; ++i) {
      const auto J = 2 + static_cast<int>(rng.bounded(5));
      const int k = rng.bounded(2) == 0 ? 3 : 5;
      buoca::AllocationProblem problem;
      problem.k = k;
      problem.unit_cost = 1;
      for (int j = 0; j < J; ++j) {
        const double p = 1.0 - rng.uniform() * 0.5;
        problem.curves.push_back(buoca::binomial_success_curve(p, k));
      }
      const auto greedy = buoca::buoca_greedy(problem);
      const auto sorted = buoca::buoca_sorted(problem);
      for (std::size_t t = 0; t < greedy.points.size(); ++t) {
        const auto& point = greedy.points[t];
        if (point.budget != problem.unit_cost * (J + 2 * point.m - 2)) ++law_failures;
        const auto& twin = sorted.points[t];
        if (std::abs(point.ccr - twin.ccr) > o.tol || point.cost != twin.cost) {
          ++sorted_failures;
        }
        if (greedy.plateau_step && point.m > *greedy.plateau_step) continue;
        const auto oracle = buoca::exhaustive_optimal(problem, point.budget, oracle_options);
        evaluated += oracle.evaluated_count;
        const double gap = std::abs(point.ccr - oracle.best_ccr);
        max_gap = std::max(max_gap, gap);
        if (gap > o.tol) ++oracle_failures;
      }
    }
    checks.push_back({"oracle-equivalence", oracle_failures == 0,
                      json{{"instances", o.instances},
                           {"max_gap", max_gap},
                           {"allocations_evaluated", evaluated},
                           {"tolerance", o.tol}}});
    checks.push_back({"sorted-greedy-equivalence", sorted_failures == 0,
                      json{{"instances", o.instances}, {"mismatches", sorted_failures}}});
    checks.push_back({"budget-law", law_failures == 0,
                      json{{"instances", o.instances}, {"violations", law_failures}}});
  }

  bool all_pass = true;
  for (const auto& check : checks) {
    all_pass = all_pass && check.pass;
    std::cout << (check.pass ? "PASS " : "FAIL ") << check.name << ' '
              << check.detail.dump() << '\n';
  }
  if (!o.out.empty()) {
    json doc;
    doc["format"] = "buoca.verify/1";
    doc["config"] = {{"command", "verify"},
                     {"instances", o.instances},
                     {"seed", o.seed},
                     {"tolerance", o.tol},
                     {"oracle_cap", oracle_options.enumeration_cap},
                     {"out", o.out}};
    json list = json::array();
    for (const auto& check : checks) {
      list.push_back({{"name", check.name}, {"pass", check.pass}, {"detail", check.detail}});
    }
    doc["checks"] = std::move(list);
    doc["all_pass"] = all_pass;
    write_text_file(o.out, json_body(doc));
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-optimized crowd worker allocation toolkit"};
  app.require_subcommand(1);
  std::function<int()> runner;

  EstimateOpts estimate_opts;
  auto* estimate = app.add_subcommand(
      "estimate", "Per-sample success probabilities from a pilot study");
  estimate->add_option("--pilot", estimate_opts.pilot, "Pilot file (.csv or .json)")
      ->required();
  estimate->add_option("--out", estimate_opts.out, "Output path (stdout when omitted)");
  estimate->add_option("--format", estimate_opts.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  estimate->add_option("--unit-cost", estimate_opts.unit_cost,
                       "Override the pilot's per-label cost");
  estimate->callback([&] { runner = [&] { return run_estimate(estimate_opts); }; });

  CurveOpts curve_opts;
  auto* curve = app.add_subcommand("curve", "Trace the budget-CCR frontier");
  curve->add_option("--pilot", curve_opts.pilot, "Pilot file (.csv or .json)")->required();
  curve->add_option("--out", curve_opts.out, "Output path (stdout when omitted)");
  curve->add_option("--format", curve_opts.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  curve->add_option("--unit-cost", curve_opts.unit_cost,
                    "Override the pilot's per-label cost");
  curve->add_option("--k-max", curve_opts.k_max,
                    "Extrapolate the success model to this odd worker cap")
      ->check(CLI::NonNegativeNumber);
  curve->add_flag("--ccr-only", curve_opts.ccr_only, "Omit per-sample allocation columns");
  curve->callback([&] { runner = [&] { return run_curve(curve_opts); }; });

  SimulateOpts simulate_opts;
  auto* simulate = app.add_subcommand("simulate", "Simulate deployment accuracy on a pilot");
  simulate->add_option("--pilot", simulate_opts.pilot, "Pilot file (.csv or .json)")
      ->required();
  simulate->add_option("--out", simulate_opts.out, "Output path (stdout when omitted)");
  simulate->add_option("--format", simulate_opts.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("--unit-cost", simulate_opts.unit_cost,
                       "Override the pilot's per-label cost");
  auto* fixed_opt = simulate->add_option("--fixed", simulate_opts.fixed,
                                         "Assign this many workers to every sample");
  simulate->add_option("--budget", simulate_opts.budget,
                       "Use the frontier allocation at this budget");
  simulate->add_option("--alloc-file", simulate_opts.alloc_file,
                       "CSV of per-sample worker counts (sample_id,n)");
  simulate->add_option("--method", simulate_opts.method, "exact or mc")
      ->check(CLI::IsMember({"exact", "mc"}));
  auto* sim_seed_opt =
      simulate->add_option("--seed", simulate_opts.seed, "Monte Carlo seed");
  simulate->add_option("--trials", simulate_opts.trials, "Monte Carlo trials per sample");
  simulate->add_option("--tie-rule", simulate_opts.tie_rule, "fractional or fail")
      ->check(CLI::IsMember({"fractional", "fail"}));
  simulate->callback([&, fixed_opt, sim_seed_opt] {
    const bool fixed_given = fixed_opt->count() > 0;
    const bool seed_given = sim_seed_opt->count() > 0;
    runner = [&, fixed_given, seed_given] {
      return run_simulate(simulate_opts, fixed_given, seed_given);
    };
  });

  TrainEvalOpts train_opts;
  auto* train = app.add_subcommand(
      "train-eval", "Cross-validated allocation classifier deployment");
  train->add_option("--pilot", train_opts.pilot, "Pilot file (.csv or .json)")->required();
  train->add_option("--features", train_opts.features, "Feature matrix CSV");
  train->add_option("--tweets", train_opts.tweets,
                    "Text corpus CSV (sample_id,text); features are derived");
  train->add_option("--out", train_opts.out, "Report path (stdout when omitted)");
  train->add_option("--save-model", train_opts.save_model, "Write the trained model here");
  train->add_option("--unit-cost", train_opts.unit_cost,
                    "Override the pilot's per-label cost");
  train->add_option("--reference-budget", train_opts.reference_budget,
                    "Frontier budget whose allocation provides training labels");
  train->add_flag("--auto-reference", train_opts.auto_reference,
                  "Pick the earliest frontier point with enough samples per class");
  train->add_option("--min-per-class", train_opts.min_per_class,
                    "Class support required by --auto-reference")
      ->check(CLI::PositiveNumber);
  train->add_option("--folds", train_opts.folds, "Cross-validation folds")
      ->check(CLI::PositiveNumber);
  train->add_option("--trees", train_opts.trees, "Forest size")->check(CLI::PositiveNumber);
  train->add_option("--max-depth", train_opts.max_depth, "Tree depth cap")
      ->check(CLI::PositiveNumber);
  train->add_option("--max-features", train_opts.max_features,
                    "Split candidates per node (0 = sqrt of columns)")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--threads", train_opts.threads, "Training threads (0 = hardware)")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--seed", train_opts.seed, "Seed for folds and forest")->required();
  train->add_option("--tie-rule", train_opts.tie_rule, "fractional or fail")
      ->check(CLI::IsMember({"fractional", "fail"}));
  train->callback([&] { runner = [&] { return run_train_eval(train_opts); }; });

  SynthOpts synth_opts;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic pilot with features");
  synth->add_option("--mixture", synth_opts.mixture,
                    "Difficulty mixture as p:weight[,p:weight...]")
      ->required();
  synth->add_option("--J", synth_opts.J, "Sample count")->required();
  synth->add_option("--k", synth_opts.k, "Workers per sample (odd)")->required();
  synth->add_option("--label-set", synth_opts.label_set, "Comma-separated labels");
  synth->add_option("--unit-cost", synth_opts.unit_cost, "Per-label cost");
  synth->add_option("--feature-noise", synth_opts.feature_noise,
                    "Gaussian noise added to the difficulty feature");
  synth->add_option("--noise-cols", synth_opts.noise_columns,
                    "Pure-noise feature columns")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", synth_opts.seed, "Generator seed")->required();
  synth->add_option("--out", synth_opts.out_prefix,
                    "Output prefix (writes <prefix>.pilot.csv, <prefix>.features.csv)")
      ->required();
  synth->callback([&] { runner = [&] { return run_synth(synth_opts); }; });

  VerifyOpts verify_opts;
  auto* verify = app.add_subcommand(
      "verify", "Self-checks: curve identities and optimality of the greedy frontier");
  verify->add_option("--instances", verify_opts.instances,
                     "Random instances for the oracle comparison")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", verify_opts.seed, "Instance generator seed")->required();
  verify->add_option("--tol", verify_opts.tol, "Comparison tolerance");
  verify->add_option("--out", verify_opts.out, "Write a JSON report here");
  verify->callback([&] { runner = [&] { return run_verify(verify_opts); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return runner();
  } catch (const buoca::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const buoca::PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const buoca::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
