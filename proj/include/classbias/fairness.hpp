#pragma once

#include <optional>
#include <string>
#include <vector>

#include "classbias/bias_metrics.hpp"
#include "classbias/confusion.hpp"
#include "classbias/ingest.hpp"

namespace classbias {

/// A protected group: records whose `attribute` equals `value`, or, when
/// `negated`, every other record (including records without the attribute).
struct GroupSpec {
  std::string attribute;
  std::string value;
  bool negated = false;

  bool matches(const PredictionRecord& record) const;
  /// "sex=male" or "sex!=male".
  std::string to_string() const;
  /// Parses "attr=value" and "attr!=value".
  static GroupSpec parse(const std::string& text);

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

/// Records of `set` selected by `group`; the subset keeps the vocabulary and
/// is named "<model>[<group>]". Throws EmptyGroupError on an empty selection.
PredictionSet select_group(const PredictionSet& set, const GroupSpec& group);

/// Element-wise sum of the per-class one-vs-rest counts.
ClassConfusion pooled_confusion(const ClassErrorProfile& profile);

/// Unweighted mean of the per-class rates, over classes with defined rates.
struct MacroRates {
  std::optional<double> fpr;
  std::optional<double> fnr;
};
MacroRates macro_rates(const ClassErrorProfile& profile);

struct GroupFairnessReport {
  GroupSpec group;
  std::size_t subset_size = 0;
  double top1 = 0.0;
  double full_top1 = 0.0;
  BiasScores scores;
  /// Relative change of the subset's macro-averaged FPR/FNR against the full
  /// set; empty when the full-set rate is 0 or either side is undefined.
  std::optional<double> aggregate_delta_fpr;
  std::optional<double> aggregate_delta_fnr;
  ClassConfusion full_pooled;
  ClassConfusion subset_pooled;
};

/// Compares a model on its full test set (base) with the same model on the
/// subset selected by `group` (alternative).
GroupFairnessReport group_fairness(const PredictionSet& set, const GroupSpec& group,
                                   const DegeneratePolicy& policy = {});

struct BinaryGroupRates {
  std::string value;
  std::size_t size = 0;
  std::optional<double> fpr;
  std::optional<double> fnr;
  std::optional<double> mean_score;
  std::optional<double> mean_residual;
};

struct BinaryFairnessReport {
  std::string attribute;
  std::string positive_label;
  double fped = 0.0;
  double fned = 0.0;
  /// Present when every record has a score and the attribute has exactly two
  /// values: group order is lexicographic, DIMS = mean(first) - mean(second).
  std::optional<double> dims;
  std::optional<double> diamr;
  std::optional<double> overall_fpr;
  std::optional<double> overall_fnr;
  std::vector<GroupSpec> groups;
  std::vector<BinaryGroupRates> group_rates;
  /// Groups whose FPR or FNR is undefined and was left out of the sums.
  std::vector<std::string> skipped_groups;
};

struct BinaryFairnessOptions {
  /// Label treated as the positive class; defaults to the second vocabulary label.
  std::optional<std::string> positive_label;
  /// Fail with MissingScoreError rather than omitting DIMS/DIAMR.
  bool require_scores = false;
};

/// FPED/FNED (sum over groups of |overall rate - group rate|, positive-class
/// rates) and DIMS/DIAMR (difference of group mean scores, and absolute
/// difference of group mean residuals |y - score| with y the 0/1 truth).
BinaryFairnessReport binary_fairness(const PredictionSet& set, const std::string& attribute,
                                     const DegeneratePolicy& policy = {},
                                     const BinaryFairnessOptions& options = {});

}  // namespace classbias
