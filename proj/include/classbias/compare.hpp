#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "classbias/bias_metrics.hpp"
#include "classbias/confusion.hpp"

namespace classbias {

enum class MatrixMetric { cev, sde, cev_normalized, sde_normalized, delta_top1, cie_count };
enum class SortKey { top1, name, input_order };

std::string_view to_string(MatrixMetric metric);
std::string_view to_string(SortKey key);
MatrixMetric parse_matrix_metric(std::string_view text);
SortKey parse_sort_key(std::string_view text);

/// values[r][c] holds the metric with models[r] as base and models[c] as the
/// alternative. A cell that could not be computed is empty and its reason is
/// set ("degenerate_input", "normalization_degenerate").
struct MetricMatrix {
  MatrixMetric metric = MatrixMetric::cev;
  SortKey sort_key = SortKey::top1;
  std::vector<std::string> models;
  std::vector<std::vector<std::optional<double>>> values;
  std::vector<std::vector<std::optional<std::string>>> reasons;

  std::size_t size() const { return models.size(); }
};

/// alt.top1 - base.top1.
double delta_top1(const ClassErrorProfile& base, const ClassErrorProfile& alt);

/// Fan-out of the single-pair operations over every ordered pair. Normalized
/// metrics divide each cell by the row model's comparison against
/// `random_baseline`. Default order is descending top-1 (stable).
MetricMatrix build_matrix(const std::vector<ClassErrorProfile>& profiles, MatrixMetric metric,
                          const DegeneratePolicy& policy = {},
                          const std::optional<ClassErrorProfile>& random_baseline = std::nullopt,
                          SortKey sort_key = SortKey::top1);

struct NamedPopulation {
  std::string name;
  std::vector<PredictionSet> models;
};

/// CIE counts between every pair of populations. Top-1 ordering uses the
/// mean top-1 of each population's members.
MetricMatrix build_cie_matrix(const std::vector<NamedPopulation>& populations,
                              SortKey sort_key = SortKey::top1);

}  // namespace classbias
