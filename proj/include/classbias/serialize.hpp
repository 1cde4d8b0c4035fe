#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "classbias/bias_metrics.hpp"
#include "classbias/compare.hpp"
#include "classbias/confusion.hpp"
#include "classbias/fairness.hpp"

namespace classbias {

using Json = nlohmann::ordered_json;

// JSON documents keep full double precision; undefined values become null.

/// {model, classes: [{label, fpr, fnr, tp, fp, fn, tn}], top1}
Json to_json(const ClassErrorProfile& profile);

/// {base, alt, cev, sde, cev_normalized, sde_normalized, excluded_classes, n_used,
///  mean_delta_fpr, mean_delta_fnr}
Json to_json(const BiasScores& scores, const LabelVocabulary& vocabulary);

/// Array of {class, delta_fpr, delta_fnr, excluded_reason}, one per vocabulary class.
Json to_json(const DeltaProfile& deltas);

/// {metric, sort_key, normalization, models, values, reasons}
Json to_json(const MetricMatrix& matrix);

Json to_json(const GroupFairnessReport& report, const LabelVocabulary& vocabulary);
Json to_json(const BinaryFairnessReport& report);

/// Fixed-point text with `decimals` digits; "" for an empty value.
std::string format_fixed(std::optional<double> value, int decimals = 5);

/// Shortest round-trip text; "" for an empty value.
std::string format_full(std::optional<double> value);

/// Joins fields into one CSV line (quoting where needed), with trailing newline.
std::string csv_line(const std::vector<std::string>& fields);

/// Left-aligned first column, right-aligned others, two-space gutters.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

/// Long-form (base, alt, metric, value) rows; empty cells carry no value.
std::string matrix_to_csv(const MetricMatrix& matrix);

/// class,delta_fpr,delta_fnr,excluded_reason
std::string deltas_to_csv(const DeltaProfile& deltas);

/// Columns group,top1,cev,sde,change_fpr,change_fnr with the changes
/// in percent. A leading "Full Test Set" row carries the full-set top-1.
std::string group_reports_to_csv(const std::vector<GroupFairnessReport>& reports);

}  // namespace classbias
