#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace buoca {

// Seven boolean stylistic cues associated with sarcastic text. Detector
// lexicons are overridable; the defaults below are the documented contract.
struct SarcasmConfig {
  std::vector<std::string> emoticons{":)", ":(", ":-)", ":-(", ";)", ":D", ":P"};
  std::vector<std::string> lingo{"ahah", "haha", "lol",  "rofl",
                                 "omg",  "eww",  "lmao", "smh"};
  std::vector<std::string> emphasis_words{"yet", "sudden"};
  std::vector<std::string> comparison_words{"like", "would"};
};

struct SarcasmVector {
  bool quotes = false;      // a quoting pair: "..", curly pair, or '..'
  bool marks = false;       // ? ! or suspension points (... or the ellipsis char)
  bool all_caps = false;    // a standalone run of 2+ capitals
  bool emoticons = false;
  bool lingo = false;       // laugh/texting lexicon token
  bool yet_sudden = false;  // the emphasis words
  bool comparison = false;  // the comparison words

  std::array<int, 7> as_ints() const {
    return {quotes, marks, all_caps, emoticons, lingo, yet_sudden, comparison};
  }
  bool operator==(const SarcasmVector&) const = default;
};

// Column names for the seven flags, in SarcasmVector field order.
const std::array<std::string, 7>& sarcasm_column_names();

SarcasmVector sarcasm_features(std::string_view text,
                               const SarcasmConfig& config = SarcasmConfig{});

// Lowercased tokens split on non-alphanumerics. Bytes outside ASCII are
// treated as word characters, so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

struct TfIdfSettings {
  bool smooth_idf = true;  // idf = ln((1+N)/(1+df)) + 1; off: ln(N/df) + 1
  enum class Norm { none, l2 } norm = Norm::l2;
  // Keep only the most frequent terms (by corpus-wide raw count, ties
  // alphabetic) when positive; 0 keeps everything.
  std::size_t max_features = 0;
};

// Fitted vocabulary: terms sorted alphabetically, idf aligned by index.
struct TfIdfModel {
  std::vector<std::string> vocabulary;
  std::vector<double> idf;
  TfIdfSettings settings;
};

struct SparseRow {
  std::vector<std::pair<std::size_t, double>> entries;  // (column, weight) sorted
};

struct TfIdfMatrix {
  std::vector<std::string> sample_ids;
  TfIdfModel model;
  std::vector<SparseRow> rows;
};

TfIdfModel tfidf_fit(const std::vector<std::string>& corpus,
                     const TfIdfSettings& settings = {});

// Raw-count term frequencies weighted by the fitted idf, then normalized
// per row. Unknown terms are dropped.
std::vector<SparseRow> tfidf_transform(const TfIdfModel& model,
                                       const std::vector<std::string>& corpus);

TfIdfMatrix tfidf_fit_transform(const std::vector<std::string>& sample_ids,
                                const std::vector<std::string>& corpus,
                                const TfIdfSettings& settings = {});

// term -> index map plus idf and settings, for reproducible re-transforms.
nlohmann::json vocabulary_to_json(const TfIdfModel& model);
TfIdfModel vocabulary_from_json(const nlohmann::json& doc);

// Dense numeric design matrix with named columns, aligned to sample ids.
struct FeatureMatrix {
  std::vector<std::string> sample_ids;
  std::vector<std::string> columns;
  std::vector<double> data;  // row-major, rows() x cols()

  std::size_t rows() const { return sample_ids.size(); }
  std::size_t cols() const { return columns.size(); }
  double at(std::size_t row, std::size_t col) const {
    return data[row * columns.size() + col];
  }
  void validate() const;  // shape consistency, finite values, unique ids
};

// Sarcasm flags carried with their sample ids for alignment checks.
struct SarcasmMatrix {
  std::vector<std::string> sample_ids;
  std::vector<SarcasmVector> rows;
};

// Column-wise concatenation of any subset of the three sources, aligned on
// identical sample id sequences (a mismatch throws ValidationError).
// Columns are namespaced: sarcasm:<flag>, tfidf:<term>, ext:<name>.
FeatureMatrix assemble_features(const SarcasmMatrix* sarcasm, const TfIdfMatrix* tfidf,
                                const FeatureMatrix* external);

// CSV schema: sample_id,<col>,... with numeric cells.
FeatureMatrix load_feature_csv(const std::filesystem::path& path);
void write_feature_csv(const FeatureMatrix& features, std::ostream& out);
void save_feature_csv(const FeatureMatrix& features, const std::filesystem::path& path);

// CSV schema: sample_id,text. Returns (ids, texts).
std::pair<std::vector<std::string>, std::vector<std::string>> load_text_corpus_csv(
    const std::filesystem::path& path);

}  // namespace buoca
