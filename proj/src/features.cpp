#include "buoca/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "buoca/csv.hpp"
#include "buoca/errors.hpp"

namespace buoca {

namespace {

bool is_ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Word characters: ASCII alphanumerics plus any non-ASCII byte, so UTF-8
// sequences stay inside tokens.
bool is_word_char(unsigned char c) { return is_ascii_alnum(c) || c >= 0x80; }

bool contains_any(std::string_view text, const std::vector<std::string>& needles) {
  for (const auto& needle : needles) {
    if (text.find(needle) != std::string_view::npos) return true;
  }
  return false;
}

// A straight single quote only opens a quotation when it does not continue
// a word (rules out contractions like she'd) and only closes when it does
// not start one (rules out plural possessives).
bool has_single_quote_pair(std::string_view text) {
  bool open_seen = false;
  std::size_t open_pos = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\'') continue;
    const bool prev_word = i > 0 && is_word_char(static_cast<unsigned char>(text[i - 1]));
    const bool next_word =
        i + 1 < text.size() && is_word_char(static_cast<unsigned char>(text[i + 1]));
    if (open_seen && !next_word && i > open_pos + 1) return true;
    if (!prev_word && next_word) {
      open_seen = true;
      open_pos = i;
    }
  }
  return false;
}

bool detect_quotes(std::string_view text) {
  if (std::count(text.begin(), text.end(), '"') >= 2) return true;
  if (text.find("\xe2\x80\x9c") != std::string_view::npos &&
      text.find("\xe2\x80\x9d") != std::string_view::npos) {
    return true;  // curly double quotes
  }
  return has_single_quote_pair(text);
}

bool detect_marks(std::string_view text) {
  if (text.find('?') != std::string_view::npos) return true;
  if (text.find('!') != std::string_view::npos) return true;
  if (text.find("...") != std::string_view::npos) return true;
  return text.find("\xe2\x80\xa6") != std::string_view::npos;  // ellipsis char
}

bool detect_all_caps(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c >= 'A' && c <= 'Z') {
      std::size_t run_end = i;
      while (run_end < text.size() && text[run_end] >= 'A' && text[run_end] <= 'Z') {
        ++run_end;
      }
      const bool left_clear =
          i == 0 || !is_ascii_alnum(static_cast<unsigned char>(text[i - 1]));
      const bool right_clear =
          run_end == text.size() ||
          !is_ascii_alnum(static_cast<unsigned char>(text[run_end]));
      if (run_end - i >= 2 && left_clear && right_clear) return true;
      i = run_end;
    } else {
      ++i;
    }
  }
  return false;
}

bool has_token(const std::vector<std::string>& tokens,
               const std::vector<std::string>& lexicon) {
  const std::unordered_set<std::string> wanted(lexicon.begin(), lexicon.end());
  for (const auto& token : tokens) {
    if (wanted.count(token)) return true;
  }
  return false;
}

double idf_value(const TfIdfSettings& settings, std::size_t docs, std::size_t df) {
  if (settings.smooth_idf) {
    return std::log((1.0 + static_cast<double>(docs)) / (1.0 + static_cast<double>(df))) +
           1.0;
  }
  return std::log(static_cast<double>(docs) / static_cast<double>(df)) + 1.0;
}

}  // namespace

const std::array<std::string, 7>& sarcasm_column_names() {
  static const std::array<std::string, 7> names{
      "quotes", "marks", "all_caps", "emoticons", "lingo", "yet_sudden", "comparison"};
  return names;
}

SarcasmVector sarcasm_features(std::string_view text, const SarcasmConfig& config) {
  SarcasmVector v;
  v.quotes = detect_quotes(text);
  v.marks = detect_marks(text);
  v.all_caps = detect_all_caps(text);
  v.emoticons = contains_any(text, config.emoticons);
  const auto tokens = tokenize(text);
  v.lingo = has_token(tokens, config.lingo);
  v.yet_sudden = has_token(tokens, config.emphasis_words);
  v.comparison = has_token(tokens, config.comparison_words);
  return v;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_char(c)) {
      current.push_back(
          static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

TfIdfModel tfidf_fit(const std::vector<std::string>& corpus,
                     const TfIdfSettings& settings) {
  if (corpus.empty()) throw ValidationError("tf-idf fit on an empty corpus");

  std::map<std::string, std::size_t> df;     // document frequency
  std::map<std::string, std::size_t> total;  // corpus-wide raw counts
  for (const auto& doc : corpus) {
    std::unordered_set<std::string> seen;
    for (auto& token : tokenize(doc)) {
      ++total[token];
      if (seen.insert(token).second) ++df[token];
    }
  }

  TfIdfModel model;
  model.settings = settings;
  if (settings.max_features > 0 && df.size() > settings.max_features) {
    // Highest corpus counts win, alphabetic order breaks ties; the kept
    // vocabulary is then re-sorted alphabetically.
    std::vector<std::pair<std::string, std::size_t>> ranked(total.begin(), total.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    ranked.resize(settings.max_features);
    for (auto& [term, count] : ranked) model.vocabulary.push_back(std::move(term));
    std::sort(model.vocabulary.begin(), model.vocabulary.end());
  } else {
    for (const auto& [term, count] : df) model.vocabulary.push_back(term);
  }
  model.idf.reserve(model.vocabulary.size());
  for (const auto& term : model.vocabulary) {
    model.idf.push_back(idf_value(settings, corpus.size(), df.at(term)));
  }
  return model;
}

std::vector<SparseRow> tfidf_transform(const TfIdfModel& model,
                                       const std::vector<std::string>& corpus) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(model.vocabulary.size());
  for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
    index.emplace(model.vocabulary[i], i);
  }

  std::vector<SparseRow> rows;
  rows.reserve(corpus.size());
  std::map<std::size_t, double> counts;
  for (const auto& doc : corpus) {
    counts.clear();
    for (const auto& token : tokenize(doc)) {
      if (auto it = index.find(token); it != index.end()) counts[it->second] += 1.0;
    }
    SparseRow row;
    row.entries.reserve(counts.size());
    double norm_sq = 0.0;
    for (const auto& [col, tf] : counts) {
      const double w = tf * model.idf[col];
      row.entries.emplace_back(col, w);
      norm_sq += w * w;
    }
    if (model.settings.norm == TfIdfSettings::Norm::l2 && norm_sq > 0.0) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (auto& [col, w] : row.entries) w *= inv;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

TfIdfMatrix tfidf_fit_transform(const std::vector<std::string>& sample_ids,
                                const std::vector<std::string>& corpus,
                                const TfIdfSettings& settings) {
  if (sample_ids.size() != corpus.size()) {
    throw ValidationError("tf-idf ids and corpus have different lengths");
  }
  TfIdfMatrix matrix;
  matrix.sample_ids = sample_ids;
  matrix.model = tfidf_fit(corpus, settings);
  matrix.rows = tfidf_transform(matrix.model, corpus);
  return matrix;
}

nlohmann::json vocabulary_to_json(const TfIdfModel& model) {
  nlohmann::json doc;
  doc["format"] = "buoca.vocabulary/1";
  nlohmann::json vocab;
  for (std::size_t i = 0; i < model.vocabulary.size(); ++i) {
    vocab[model.vocabulary[i]] = i;
  }
  doc["vocabulary"] = std::move(vocab);
  doc["idf"] = model.idf;
  doc["smooth_idf"] = model.settings.smooth_idf;
  doc["norm"] = model.settings.norm == TfIdfSettings::Norm::l2 ? "l2" : "none";
  doc["max_features"] = model.settings.max_features;
  return doc;
}

TfIdfModel vocabulary_from_json(const nlohmann::json& doc) {
  TfIdfModel model;
  if (!doc.contains("vocabulary") || !doc.contains("idf")) {
    throw ParseError("vocabulary JSON needs vocabulary and idf");
  }
  std::vector<std::pair<std::size_t, std::string>> ordered;
  for (const auto& [term, idx] : doc["vocabulary"].items()) {
    ordered.emplace_back(idx.get<std::size_t>(), term);
  }
  std::sort(ordered.begin(), ordered.end());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i].first != i) throw ParseError("vocabulary JSON indices are not dense");
    model.vocabulary.push_back(ordered[i].second);
  }
  model.idf = doc["idf"].get<std::vector<double>>();
  if (model.idf.size() != model.vocabulary.size()) {
    throw ParseError("vocabulary JSON idf length mismatch");
  }
  model.settings.smooth_idf = doc.value("smooth_idf", true);
  model.settings.norm = doc.value("norm", std::string("l2")) == "l2"
                            ? TfIdfSettings::Norm::l2
                            : TfIdfSettings::Norm::none;
  model.settings.max_features = doc.value("max_features", std::size_t{0});
  return model;
}

void FeatureMatrix::validate() const {
  if (data.size() != rows() * cols()) {
    throw ValidationError("feature matrix shape mismatch");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : sample_ids) {
    if (id.empty()) throw ValidationError("empty sample id in feature matrix");
    if (!seen.insert(id).second) {
      throw ValidationError("duplicate sample id in feature matrix: " + id);
    }
  }
  std::unordered_set<std::string> cols_seen;
  for (const auto& col : columns) {
    if (!cols_seen.insert(col).second) {
      throw ValidationError("duplicate feature column: " + col);
    }
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
  }
}

FeatureMatrix assemble_features(const SarcasmMatrix* sarcasm, const TfIdfMatrix* tfidf,
                                const FeatureMatrix* external) {
  const std::vector<std::string>* ids = nullptr;
  auto take_ids = [&ids](const std::vector<std::string>& candidate) {
    if (ids == nullptr) {
      ids = &candidate;
    } else if (*ids != candidate) {
      throw ValidationError("feature sources disagree on sample ids");
    }
  };
  if (sarcasm) take_ids(sarcasm->sample_ids);
  if (tfidf) take_ids(tfidf->sample_ids);
  if (external) take_ids(external->sample_ids);
  if (ids == nullptr) throw ValidationError("assemble_features needs at least one source");

  FeatureMatrix out;
  out.sample_ids = *ids;
  if (sarcasm) {
    if (sarcasm->rows.size() != out.rows()) {
      throw ValidationError("sarcasm rows do not match sample ids");
    }
    for (const auto& name : sarcasm_column_names()) {
      out.columns.push_back("sarcasm:" + name);
    }
  }
  if (tfidf) {
    if (tfidf->rows.size() != out.rows()) {
      throw ValidationError("tf-idf rows do not match sample ids");
    }
    for (const auto& term : tfidf->model.vocabulary) {
      out.columns.push_back("tfidf:" + term);
    }
  }
  if (external) {
    external->validate();
    for (const auto& col : external->columns) out.columns.push_back("ext:" + col);
  }

  out.data.assign(out.rows() * out.cols(), 0.0);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    std::size_t base = r * out.cols();
    if (sarcasm) {
      const auto flags = sarcasm->rows[r].as_ints();
      for (std::size_t i = 0; i < flags.size(); ++i) {
        out.data[base + i] = static_cast<double>(flags[i]);
      }
      base += flags.size();
    }
    if (tfidf) {
      for (const auto& [col, w] : tfidf->rows[r].entries) {
        out.data[base + col] = w;
      }
      base += tfidf->model.vocabulary.size();
    }
    if (external) {
      for (std::size_t c = 0; c < external->cols(); ++c) {
        out.data[base + c] = external->at(r, c);
      }
    }
  }
  out.validate();
  return out;
}

FeatureMatrix load_feature_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw ParseError("empty feature CSV: " + path.string());
  const auto& header = rows.front();
  if (header.size() < 2 || header[0] != "sample_id") {
    throw ParseError("feature CSV header must be sample_id,<columns...>");
  }

  FeatureMatrix matrix;
  matrix.columns.assign(header.begin() + 1, header.end());
  matrix.data.reserve((rows.size() - 1) * matrix.columns.size());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw ValidationError("feature CSV row " + std::to_string(r) + " has " +
                            std::to_string(row.size()) + " fields, expected " +
                            std::to_string(header.size()));
    }
    matrix.sample_ids.push_back(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) {
      double v = 0.0;
      const char* end = row[c].data() + row[c].size();
      auto res = std::from_chars(row[c].data(), end, v);
      if (res.ec != std::errc() || res.ptr != end) {
        throw ParseError("feature CSV cell is not numeric: '" + row[c] + "'");
      }
      matrix.data.push_back(v);
    }
  }
  matrix.validate();
  return matrix;
}

void write_feature_csv(const FeatureMatrix& features, std::ostream& out) {
  std::vector<std::string> row{"sample_id"};
  row.insert(row.end(), features.columns.begin(), features.columns.end());
  csv::write_row(out, row);
  for (std::size_t r = 0; r < features.rows(); ++r) {
    row.clear();
    row.push_back(features.sample_ids[r]);
    for (std::size_t c = 0; c < features.cols(); ++c) {
      row.push_back(csv::number(features.at(r, c)));
    }
    csv::write_row(out, row);
  }
}

void save_feature_csv(const FeatureMatrix& features, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path.string());
  write_feature_csv(features, out);
  if (!out) throw IoError("failed writing file: " + path.string());
}

std::pair<std::vector<std::string>, std::vector<std::string>> load_text_corpus_csv(
    const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw ParseError("empty text corpus CSV: " + path.string());
  if (rows.front().size() != 2 || rows.front()[0] != "sample_id" ||
      rows.front()[1] != "text") {
    throw ParseError("text corpus CSV header must be sample_id,text");
  }
  std::vector<std::string> ids, texts;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2) {
      throw ValidationError("text corpus CSV row " + std::to_string(r) +
                            " must have exactly sample_id and text");
    }
    ids.push_back(rows[r][0]);
    texts.push_back(rows[r][1]);
  }
  return {std::move(ids), std::move(texts)};
}

}  // namespace buoca
