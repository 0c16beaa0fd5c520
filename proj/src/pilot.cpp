#include "buoca/pilot.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

#include "buoca/csv.hpp"
#include "buoca/errors.hpp"

namespace buoca {

namespace {

using nlohmann::json;

PilotFormat infer_format(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".csv") return PilotFormat::csv;
  if (ext == ".json") return PilotFormat::json;
  throw ValidationError("cannot infer pilot format from extension: " + path.string());
}

PilotDataset load_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw ParseError("empty pilot CSV: " + path.string());

  const auto& header = rows.front();
  if (header.size() < 3 || header[0] != "sample_id" || header[1] != "expert") {
    throw ParseError("pilot CSV header must be sample_id,expert,w1,...,wk");
  }
  const int k = static_cast<int>(header.size()) - 2;
  for (int i = 0; i < k; ++i) {
    if (header[static_cast<std::size_t>(i) + 2] != "w" + std::to_string(i + 1)) {
      throw ParseError("pilot CSV worker columns must be named w1..wk");
    }
  }

  PilotDataset data;
  data.k = k;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (static_cast<int>(row.size()) != k + 2) {
      throw ValidationError("pilot CSV row " + std::to_string(r) + " has " +
                            std::to_string(row.size()) + " fields, expected " +
                            std::to_string(k + 2));
    }
    data.sample_ids.push_back(row[0]);
    data.expert_labels.push_back(row[1]);
    data.worker_labels.emplace_back(row.begin() + 2, row.end());
  }
  data.validate();
  return data;
}

PilotDataset load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("bad pilot JSON: " + std::string(e.what()));
  }
  if (!doc.is_object() || !doc.contains("k") || !doc.contains("samples")) {
    throw ParseError("pilot JSON needs top-level k and samples");
  }

  PilotDataset data;
  if (!doc["k"].is_number_integer()) throw ParseError("pilot JSON k must be an integer");
  data.k = doc["k"].get<int>();
  if (doc.contains("unit_cost")) {
    const auto& uc = doc["unit_cost"];
    if (uc.is_string()) {
      data.unit_cost = Rational::parse(uc.get<std::string>());
    } else if (uc.is_number_integer()) {
      data.unit_cost = Rational(uc.get<std::int64_t>());
    } else if (uc.is_number()) {
      data.unit_cost = Rational::from_double(uc.get<double>());
    } else {
      throw ParseError("pilot JSON unit_cost must be a number or a string");
    }
  }
  if (doc.contains("label_set")) {
    for (const auto& l : doc["label_set"]) {
      data.label_set.push_back(l.get<std::string>());
    }
  }
  for (const auto& s : doc["samples"]) {
    if (!s.contains("id") || !s.contains("expert") || !s.contains("workers")) {
      throw ParseError("pilot JSON sample needs id, expert, workers");
    }
    data.sample_ids.push_back(s["id"].get<std::string>());
    data.expert_labels.push_back(s["expert"].get<std::string>());
    std::vector<std::string> workers;
    for (const auto& w : s["workers"]) workers.push_back(w.get<std::string>());
    data.worker_labels.push_back(std::move(workers));
  }
  data.validate();
  return data;
}

}  // namespace

void PilotDataset::validate() const {
  if (k < 1 || k % 2 == 0) {
    throw ValidationError("worker count k must be odd and positive, got " +
                          std::to_string(k));
  }
  if (sample_ids.empty()) throw ValidationError("pilot dataset has no samples");
  if (expert_labels.size() != sample_ids.size() ||
      worker_labels.size() != sample_ids.size()) {
    throw ValidationError("pilot dataset columns have inconsistent lengths");
  }
  if (unit_cost.is_negative()) throw ValidationError("unit cost must be non-negative");

  std::unordered_set<std::string> seen;
  std::unordered_set<std::string> allowed(label_set.begin(), label_set.end());
  for (std::size_t j = 0; j < sample_ids.size(); ++j) {
    if (sample_ids[j].empty()) throw ValidationError("empty sample id");
    if (!seen.insert(sample_ids[j]).second) {
      throw ValidationError("duplicate sample id: " + sample_ids[j]);
    }
    if (worker_labels[j].size() != static_cast<std::size_t>(k)) {
      throw ValidationError("sample " + sample_ids[j] + " has " +
                            std::to_string(worker_labels[j].size()) +
                            " worker labels, expected " + std::to_string(k));
    }
    if (expert_labels[j].empty()) {
      throw ValidationError("sample " + sample_ids[j] + " has an empty expert label");
    }
    for (const auto& w : worker_labels[j]) {
      if (w.empty()) {
        throw ValidationError("sample " + sample_ids[j] + " has an empty worker label");
      }
    }
    if (!allowed.empty()) {
      auto check = [&](const std::string& label) {
        if (!allowed.count(label)) {
          throw ValidationError("sample " + sample_ids[j] +
                                " uses a label outside the declared label set: " + label);
        }
      };
      check(expert_labels[j]);
      for (const auto& w : worker_labels[j]) check(w);
    }
  }
}

PilotDataset load_pilot(const std::filesystem::path& path, PilotFormat format) {
  return format == PilotFormat::csv ? load_csv(path) : load_json(path);
}

PilotDataset load_pilot(const std::filesystem::path& path) {
  return load_pilot(path, infer_format(path));
}

void save_pilot(const PilotDataset& data, const std::filesystem::path& path,
                PilotFormat format) {
  data.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path.string());

  if (format == PilotFormat::csv) {
    std::vector<std::string> header{"sample_id", "expert"};
    for (int i = 1; i <= data.k; ++i) header.push_back("w" + std::to_string(i));
    csv::write_row(out, header);
    std::vector<std::string> row;
    for (std::size_t j = 0; j < data.size(); ++j) {
      row.clear();
      row.push_back(data.sample_ids[j]);
      row.push_back(data.expert_labels[j]);
      row.insert(row.end(), data.worker_labels[j].begin(), data.worker_labels[j].end());
      csv::write_row(out, row);
    }
  } else {
    json doc;
    doc["k"] = data.k;
    doc["unit_cost"] = data.unit_cost.str();
    if (!data.label_set.empty()) doc["label_set"] = data.label_set;
    json samples = json::array();
    for (std::size_t j = 0; j < data.size(); ++j) {
      samples.push_back({{"id", data.sample_ids[j]},
                         {"expert", data.expert_labels[j]},
                         {"workers", data.worker_labels[j]}});
    }
    doc["samples"] = std::move(samples);
    out << doc.dump(2) << '\n';
  }
  if (!out) throw IoError("failed writing file: " + path.string());
}

SuccessEstimates estimate_success_probabilities(const PilotDataset& data) {
  data.validate();
  SuccessEstimates est;
  est.k = data.k;
  est.matches.reserve(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    int m = 0;
    for (const auto& w : data.worker_labels[j]) {
      if (w == data.expert_labels[j]) ++m;
    }
    est.matches.push_back(m);
  }
  return est;
}

}  // namespace buoca
