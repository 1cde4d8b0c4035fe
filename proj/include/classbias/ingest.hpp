#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace classbias {

using ClassId = std::size_t;

/// Ordered set of distinct class names with a name -> id index.
/// Always holds at least two classes.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  explicit LabelVocabulary(std::vector<std::string> labels);

  /// Sorted, de-duplicated union of `labels`.
  static LabelVocabulary from_unsorted(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(ClassId id) const { return labels_.at(id); }

  std::optional<ClassId> find(const std::string& label) const;
  ClassId id_of(const std::string& label) const;  // throws ValueError
  bool contains(const std::string& label) const { return index_.contains(label); }

  friend bool operator==(const LabelVocabulary& a, const LabelVocabulary& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, ClassId> index_;
};

using AttributeMap = std::map<std::string, std::string>;

struct PredictionRecord {
  std::optional<std::string> instance_id;
  ClassId true_label = 0;
  ClassId pred_label = 0;
  std::optional<double> score;
  AttributeMap attributes;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// One model's predictions over a test set. Construction validates every
/// record against the vocabulary; instances are immutable afterwards.
class PredictionSet {
 public:
  PredictionSet(std::string model_name, LabelVocabulary vocabulary,
                std::vector<PredictionRecord> records);

  const std::string& model_name() const { return model_name_; }
  const LabelVocabulary& vocabulary() const { return vocabulary_; }
  const std::vector<PredictionRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;

 private:
  std::string model_name_;
  LabelVocabulary vocabulary_;
  std::vector<PredictionRecord> records_;
};

enum class FileFormat { csv, json };

struct ParseOptions {
  std::string true_col = "true_label";
  std::string pred_col = "pred_label";
  std::string score_col = "score";
  std::string id_col = "instance_id";
  /// Model name; defaults to the file stem.
  std::optional<std::string> model_name;
  /// When set, labels outside it are rejected and ids follow its order.
  std::optional<LabelVocabulary> vocabulary;
};

/// Picks csv or json from the file extension (anything but .json is csv).
FileFormat format_from_path(const std::filesystem::path& path);

PredictionSet parse_prediction_file(const std::filesystem::path& path, FileFormat format,
                                    const ParseOptions& options = {});
PredictionSet parse_prediction_csv(const std::string& text, const ParseOptions& options);
PredictionSet parse_prediction_json(const std::string& text, const ParseOptions& options);

/// Inverse of parse_prediction_csv under the same column options. Attribute
/// columns are written in sorted name order.
std::string write_prediction_csv(const PredictionSet& set, const ParseOptions& options = {});

/// Remaps every set onto the sorted union of their vocabularies.
std::vector<PredictionSet> align_vocabularies(const std::vector<PredictionSet>& sets);

/// Splits one CSV line-oriented document into rows of fields (RFC 4180 quoting).
std::vector<std::vector<std::string>> split_csv(const std::string& text);

}  // namespace classbias
