#include "classbias/compare.hpp"

#include <algorithm>
#include <numeric>

#include "classbias/errors.hpp"

namespace classbias {

namespace {

std::vector<std::size_t> sort_order(const std::vector<std::string>& names,
                                    const std::vector<double>& top1, SortKey key) {
  std::vector<std::size_t> order(names.size());
  std::iota(order.begin(), order.end(), 0);
  switch (key) {
    case SortKey::top1:
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return top1[a] > top1[b]; });
      break;
    case SortKey::name:
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
      break;
    case SortKey::input_order:
      break;
  }
  return order;
}

MetricMatrix empty_matrix(MatrixMetric metric, SortKey key, std::vector<std::string> models) {
  const auto n = models.size();
  MetricMatrix m;
  m.metric = metric;
  m.sort_key = key;
  m.models = std::move(models);
  m.values.assign(n, std::vector<std::optional<double>>(n));
  m.reasons.assign(n, std::vector<std::optional<std::string>>(n));
  return m;
}

}  // namespace

std::string_view to_string(MatrixMetric metric) {
  switch (metric) {
    case MatrixMetric::cev:
      return "cev";
    case MatrixMetric::sde:
      return "sde";
    case MatrixMetric::cev_normalized:
      return "cev_normalized";
    case MatrixMetric::sde_normalized:
      return "sde_normalized";
    case MatrixMetric::delta_top1:
      return "delta_top1";
    case MatrixMetric::cie_count:
      return "cie_count";
  }
  return "unknown";
}

std::string_view to_string(SortKey key) {
  switch (key) {
    case SortKey::top1:
      return "top1";
    case SortKey::name:
      return "name";
    case SortKey::input_order:
      return "input_order";
  }
  return "unknown";
}

MatrixMetric parse_matrix_metric(std::string_view text) {
  for (auto m : {MatrixMetric::cev, MatrixMetric::sde, MatrixMetric::cev_normalized,
                 MatrixMetric::sde_normalized, MatrixMetric::delta_top1, MatrixMetric::cie_count}) {
    if (text == to_string(m)) return m;
  }
  throw ArgumentError("unknown matrix metric '" + std::string(text) + "'");
}

SortKey parse_sort_key(std::string_view text) {
  for (auto k : {SortKey::top1, SortKey::name, SortKey::input_order}) {
    if (text == to_string(k)) return k;
  }
  throw ArgumentError("unknown sort key '" + std::string(text) + "'");
}

double delta_top1(const ClassErrorProfile& base, const ClassErrorProfile& alt) {
  if (!(base.vocabulary == alt.vocabulary)) {
    throw AlignmentError("profiles '" + base.model_name + "' and '" + alt.model_name +
                         "' use different vocabularies");
  }
  return alt.top1 - base.top1;
}

MetricMatrix build_matrix(const std::vector<ClassErrorProfile>& profiles, MatrixMetric metric,
                          const DegeneratePolicy& policy,
                          const std::optional<ClassErrorProfile>& random_baseline,
                          SortKey sort_key) {
  if (metric == MatrixMetric::cie_count) {
    throw ArgumentError("cie_count needs per-instance populations; use build_cie_matrix");
  }
  if (profiles.size() < 2) throw ArgumentError("a metric matrix needs at least 2 models");
  for (const auto& p : profiles) {
    if (!(p.vocabulary == profiles.front().vocabulary)) {
      throw AlignmentError("profile '" + p.model_name + "' uses a different vocabulary");
    }
  }
  const bool normalized =
      metric == MatrixMetric::cev_normalized || metric == MatrixMetric::sde_normalized;
  if (normalized && !random_baseline) {
    throw ArgumentError(std::string(to_string(metric)) + " needs a random baseline");
  }

  std::vector<std::string> names;
  std::vector<double> top1;
  for (const auto& p : profiles) {
    names.push_back(p.model_name);
    top1.push_back(p.top1);
  }
  const auto order = sort_order(names, top1, sort_key);
  std::vector<std::string> sorted_names;
  for (auto i : order) sorted_names.push_back(names[i]);
  auto m = empty_matrix(metric, sort_key, std::move(sorted_names));

  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& base = profiles[order[r]];
    for (std::size_t c = 0; c < order.size(); ++c) {
      const auto& alt = profiles[order[c]];
      if (r == c && !normalized) {
        m.values[r][c] = 0.0;
        continue;
      }
      try {
        switch (metric) {
          case MatrixMetric::delta_top1:
            m.values[r][c] = delta_top1(base, alt);
            break;
          case MatrixMetric::cev:
            m.values[r][c] = compare_profiles(base, alt, policy).cev;
            break;
          case MatrixMetric::sde:
            m.values[r][c] = compare_profiles(base, alt, policy).sde;
            break;
          case MatrixMetric::cev_normalized:
          case MatrixMetric::sde_normalized: {
            auto scores = normalize_scores(compare_profiles(base, alt, policy), base,
                                           *random_baseline, policy);
            m.values[r][c] = metric == MatrixMetric::cev_normalized ? *scores.cev_normalized
                                                                    : *scores.sde_normalized;
            break;
          }
          case MatrixMetric::cie_count:
            break;
        }
      } catch (const NormalizationDegenerateError&) {
        m.reasons[r][c] = "normalization_degenerate";
      } catch (const DegenerateError&) {
        m.reasons[r][c] = "degenerate_input";
      }
    }
  }
  return m;
}

MetricMatrix build_cie_matrix(const std::vector<NamedPopulation>& populations,
                              SortKey sort_key) {
  if (populations.size() < 2) throw ArgumentError("a metric matrix needs at least 2 populations");
  std::vector<std::string> names;
  std::vector<double> top1;
  std::vector<PopulationLabeling> labelings;
  for (const auto& pop : populations) {
    if (pop.models.empty()) throw ArgumentError("population '" + pop.name + "' has no models");
    if (!(pop.models.front().vocabulary() == populations.front().models.front().vocabulary())) {
      throw AlignmentError("population '" + pop.name + "' uses a different vocabulary");
    }
    names.push_back(pop.name);
    labelings.push_back(modal_labels(pop.models, pop.name));
    double sum = 0.0;
    for (const auto& model : pop.models) sum += build_profile(model).top1;
    top1.push_back(sum / static_cast<double>(pop.models.size()));
  }
  const auto order = sort_order(names, top1, sort_key);
  std::vector<std::string> sorted_names;
  for (auto i : order) sorted_names.push_back(names[i]);
  auto m = empty_matrix(MatrixMetric::cie_count, sort_key, std::move(sorted_names));
  for (std::size_t r = 0; r < order.size(); ++r) {
    for (std::size_t c = 0; c < order.size(); ++c) {
      m.values[r][c] =
          static_cast<double>(count_cies(labelings[order[r]], labelings[order[c]]));
    }
  }
  return m;
}

}  // namespace classbias
