#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "buoca/errors.hpp"
#include "buoca/pilot.hpp"
#include "buoca/rng.hpp"

using namespace buoca;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("buoca_pilot_test_" + name);
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

PilotDataset tiny_dataset() {
  PilotDataset data;
  data.sample_ids = {"s1", "s2"};
  data.expert_labels = {"yes", "no"};
  data.worker_labels = {{"yes", "yes", "no"}, {"no", "yes", "no"}};
  data.k = 3;
  data.unit_cost = Rational(1, 2);
  data.label_set = {"yes", "no"};
  return data;
}

}  // namespace

TEST_CASE("csv loads header-declared k and both rows") {
  const auto path = temp_file("ok.csv");
  write_file(path,
             "sample_id,expert,w1,w2,w3\n"
             "s1,yes,yes,yes,no\n"
             "s2,no,no,yes,no\n");
  const auto data = load_pilot(path, PilotFormat::csv);
  CHECK(data.size() == 2);
  CHECK(data.k == 3);
  CHECK(data.sample_ids == std::vector<std::string>{"s1", "s2"});
  CHECK(data.expert_labels == std::vector<std::string>{"yes", "no"});
  CHECK(data.worker_labels[1] == std::vector<std::string>{"no", "yes", "no"});
  CHECK(data.unit_cost == Rational(1));
  fs::remove(path);
}

TEST_CASE("csv with a short row is rejected") {
  const auto path = temp_file("ragged.csv");
  write_file(path,
             "sample_id,expert,w1,w2,w3\n"
             "s1,yes,yes,yes\n");
  CHECK_THROWS_AS(load_pilot(path, PilotFormat::csv), ValidationError);
  fs::remove(path);
}

TEST_CASE("csv with a wrong header is rejected") {
  const auto path = temp_file("header.csv");
  write_file(path, "id,expert,w1,w2,w3\ns1,yes,yes,yes,no\n");
  CHECK_THROWS_AS(load_pilot(path, PilotFormat::csv), ParseError);
  fs::remove(path);
}

TEST_CASE("json with even k is rejected") {
  const auto path = temp_file("evenk.json");
  write_file(path, R"({"k": 4, "unit_cost": 1, "samples": [
    {"id": "s1", "expert": "a", "workers": ["a", "a", "a", "a"]}]})");
  CHECK_THROWS_AS(load_pilot(path, PilotFormat::json), ValidationError);
  fs::remove(path);
}

TEST_CASE("missing file raises an i/o error") {
  CHECK_THROWS_AS(load_pilot(temp_file("nope.csv"), PilotFormat::csv), IoError);
}

TEST_CASE("malformed json raises a parse error") {
  const auto path = temp_file("bad.json");
  write_file(path, "{not json");
  CHECK_THROWS_AS(load_pilot(path, PilotFormat::json), ParseError);
  fs::remove(path);
}

TEST_CASE("validate rejects duplicates, unknown labels, empty labels") {
  auto data = tiny_dataset();
  data.validate();

  auto dup = data;
  dup.sample_ids[1] = "s1";
  CHECK_THROWS_AS(dup.validate(), ValidationError);

  auto unknown = data;
  unknown.worker_labels[0][0] = "maybe";
  CHECK_THROWS_AS(unknown.validate(), ValidationError);

  auto empty_label = data;
  empty_label.expert_labels[0] = "";
  CHECK_THROWS_AS(empty_label.validate(), ValidationError);

  auto negative_cost = data;
  negative_cost.unit_cost = Rational(-1, 2);
  CHECK_THROWS_AS(negative_cost.validate(), ValidationError);

  auto even_k = data;
  even_k.k = 2;
  CHECK_THROWS_AS(even_k.validate(), ValidationError);
}

TEST_CASE("round-trip preserves every field in both formats") {
  const auto data = tiny_dataset();
  for (const auto format : {PilotFormat::csv, PilotFormat::json}) {
    const auto path =
        temp_file(format == PilotFormat::csv ? "roundtrip.csv" : "roundtrip.json");
    save_pilot(data, path, format);
    const auto back = load_pilot(path, format);
    CHECK(back.sample_ids == data.sample_ids);
    CHECK(back.expert_labels == data.expert_labels);
    CHECK(back.worker_labels == data.worker_labels);
    CHECK(back.k == data.k);
    if (format == PilotFormat::json) {
      CHECK(back.unit_cost == data.unit_cost);
      CHECK(back.label_set == data.label_set);
    }
    fs::remove(path);
  }
}

TEST_CASE("round-trip keeps quoted csv content intact") {
  PilotDataset data;
  data.sample_ids = {"s,1", R"(s"2)"};
  data.expert_labels = {"a b", "line\nbreak"};
  data.worker_labels = {{"a b", "x,y", "z"}, {"line\nbreak", R"(qu"ote)", "plain"}};
  data.k = 3;
  const auto path = temp_file("quoted.csv");
  save_pilot(data, path, PilotFormat::csv);
  const auto back = load_pilot(path);
  CHECK(back.sample_ids == data.sample_ids);
  CHECK(back.expert_labels == data.expert_labels);
  CHECK(back.worker_labels == data.worker_labels);
  fs::remove(path);
}

TEST_CASE("estimates are exact count fractions") {
  PilotDataset data;
  data.k = 7;
  data.sample_ids = {"s1"};
  data.expert_labels = {"neg"};
  data.worker_labels = {{"neg", "neg", "neg", "neg", "neg", "neg", "pos"}};
  const auto est = estimate_success_probabilities(data);
  CHECK(est.matches[0] == 6);
  CHECK(est.k == 7);
  CHECK(est.value(0) == doctest::Approx(6.0 / 7.0).epsilon(1e-15));

  PilotDataset none;
  none.k = 5;
  none.sample_ids = {"s1"};
  none.expert_labels = {"a"};
  none.worker_labels = {{"b", "b", "c", "b", "c"}};
  CHECK(estimate_success_probabilities(none).matches[0] == 0);

  PilotDataset three;
  three.k = 5;
  three.sample_ids = {"s1"};
  three.expert_labels = {"a"};
  three.worker_labels = {{"a", "b", "a", "b", "a"}};
  CHECK(estimate_success_probabilities(three).value(0) == 0.6);
}

TEST_CASE("labels compare case-sensitively with no normalization") {
  PilotDataset data;
  data.k = 3;
  data.sample_ids = {"s1"};
  data.expert_labels = {"Yes"};
  data.worker_labels = {{"yes", "Yes", "YES"}};
  CHECK(estimate_success_probabilities(data).matches[0] == 1);
}

TEST_CASE("estimation is invariant to worker column order") {
  Rng rng(20240817);
  PilotDataset data;
  data.k = 7;
  const std::vector<std::string> labels = {"a", "b", "c"};
  for (int j = 0; j < 25; ++j) {
    data.sample_ids.push_back("s" + std::to_string(j));
    data.expert_labels.push_back(labels[rng.bounded(3)]);
    std::vector<std::string> row;
    for (int w = 0; w < 7; ++w) row.push_back(labels[rng.bounded(3)]);
    data.worker_labels.push_back(row);
  }
  const auto base = estimate_success_probabilities(data);
  for (int trial = 0; trial < 10; ++trial) {
    auto shuffled = data;
    for (auto& row : shuffled.worker_labels) rng.shuffle(row);
    const auto est = estimate_success_probabilities(shuffled);
    CHECK(est.matches == base.matches);
  }
}

TEST_CASE("match counts sum to the total agreement count") {
  Rng rng(7);
  PilotDataset data;
  data.k = 5;
  const std::vector<std::string> labels = {"x", "y"};
  int total_agreements = 0;
  for (int j = 0; j < 40; ++j) {
    data.sample_ids.push_back("s" + std::to_string(j));
    data.expert_labels.push_back(labels[rng.bounded(2)]);
    std::vector<std::string> row;
    for (int w = 0; w < 5; ++w) {
      row.push_back(labels[rng.bounded(2)]);
      if (row.back() == data.expert_labels.back()) ++total_agreements;
    }
    data.worker_labels.push_back(row);
  }
  const auto est = estimate_success_probabilities(data);
  int sum = 0;
  for (const int matches : est.matches) sum += matches;
  CHECK(sum == total_agreements);
}
