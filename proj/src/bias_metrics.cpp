#include "classbias/bias_metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "classbias/errors.hpp"

namespace classbias {

namespace {

void require_included(const DeltaProfile& deltas) {
  if (deltas.per_class.empty()) {
    throw DegenerateInputError("no classes left to compare between '" + deltas.base_model +
                               "' and '" + deltas.alt_model + "'");
  }
}

std::pair<double, double> mean_point(const DeltaProfile& deltas) {
  double fpr = 0.0;
  double fnr = 0.0;
  for (const auto& d : deltas.per_class) {
    fpr += d.delta_fpr;
    fnr += d.delta_fnr;
  }
  const auto n = static_cast<double>(deltas.per_class.size());
  return {fpr / n, fnr / n};
}

DeltaProfile restrict_to(const DeltaProfile& deltas, const std::vector<ClassId>& keep) {
  DeltaProfile out{deltas.base_model, deltas.alt_model, deltas.vocabulary, {}, deltas.excluded};
  std::set<ClassId> wanted(keep.begin(), keep.end());
  for (const auto& d : deltas.per_class) {
    if (wanted.erase(d.class_id)) out.per_class.push_back(d);
  }
  if (!wanted.empty()) {
    throw NormalizationDegenerateError(
        "random baseline comparison excludes class '" +
        deltas.vocabulary.label(*wanted.begin()) + "' that the scored comparison uses");
  }
  return out;
}

}  // namespace

DegeneratePolicy DegeneratePolicy::with_epsilon(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ArgumentError("epsilon policy needs a finite positive value");
  }
  return {Kind::epsilon, eps};
}

DegeneratePolicy DegeneratePolicy::parse(std::string_view text) {
  if (text == "exclude") return exclude();
  if (text == "strict") return strict();
  constexpr std::string_view prefix = "epsilon=";
  if (text.starts_with(prefix)) {
    auto body = text.substr(prefix.size());
    double eps = 0.0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), eps);
    if (ec == std::errc() && ptr == body.data() + body.size()) return with_epsilon(eps);
  }
  throw ArgumentError("unknown policy '" + std::string(text) +
                      "' (expected exclude, strict or epsilon=<value>)");
}

std::string DegeneratePolicy::to_string() const {
  switch (kind) {
    case Kind::exclude:
      return "exclude";
    case Kind::strict:
      return "strict";
    case Kind::epsilon: {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), epsilon);
      return "epsilon=" + std::string(buf, ptr);
    }
  }
  return "exclude";
}

std::string_view to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::undefined_base_rate:
      return "undefined_base_rate";
    case ExclusionReason::zero_base_rate:
      return "zero_base_rate";
    case ExclusionReason::undefined_alt_rate:
      return "undefined_alt_rate";
  }
  return "unknown";
}

std::vector<ClassId> DeltaProfile::included_ids() const {
  std::vector<ClassId> ids;
  ids.reserve(per_class.size());
  for (const auto& d : per_class) ids.push_back(d.class_id);
  return ids;
}

DeltaProfile compute_deltas(const ClassErrorProfile& base, const ClassErrorProfile& alt,
                            const DegeneratePolicy& policy) {
  if (!(base.vocabulary == alt.vocabulary) || base.per_class.size() != alt.per_class.size()) {
    throw AlignmentError("profiles '" + base.model_name + "' and '" + alt.model_name +
                         "' use different vocabularies");
  }

  DeltaProfile out{base.model_name, alt.model_name, base.vocabulary, {}, {}};
  const bool strict = policy.kind == DegeneratePolicy::Kind::strict;

  for (ClassId c = 0; c < base.per_class.size(); ++c) {
    const auto& b = base.per_class[c];
    const auto& a = alt.per_class[c];
    const auto& label = base.vocabulary.label(c);

    auto drop = [&](ExclusionReason reason) {
      if (strict) {
        throw DegenerateInputError("class '" + label + "': " + std::string(to_string(reason)) +
                                   " (strict policy)");
      }
      out.excluded.push_back({c, reason});
    };

    if (!b.fpr || !b.fnr) {
      drop(ExclusionReason::undefined_base_rate);
      continue;
    }
    if (!a.fpr || !a.fnr) {
      drop(ExclusionReason::undefined_alt_rate);
      continue;
    }
    double base_fpr = *b.fpr;
    double base_fnr = *b.fnr;
    if (base_fpr == 0.0 || base_fnr == 0.0) {
      if (policy.kind != DegeneratePolicy::Kind::epsilon) {
        drop(ExclusionReason::zero_base_rate);
        continue;
      }
      if (base_fpr == 0.0) base_fpr = policy.epsilon;
      if (base_fnr == 0.0) base_fnr = policy.epsilon;
    }
    // Numerators use the true base rate; only a zero divisor is substituted.
    out.per_class.push_back(
        {c, (*a.fpr - *b.fpr) / base_fpr, (*a.fnr - *b.fnr) / base_fnr});
  }

  require_included(out);
  return out;
}

double compute_cev(const DeltaProfile& deltas) {
  require_included(deltas);
  // Mean taken relative to the first point so identical points give exactly 0.
  const auto& first = deltas.per_class.front();
  const double n = static_cast<double>(deltas.per_class.size());
  double shift_fpr = 0.0;
  double shift_fnr = 0.0;
  for (const auto& d : deltas.per_class) {
    shift_fpr += d.delta_fpr - first.delta_fpr;
    shift_fnr += d.delta_fnr - first.delta_fnr;
  }
  const double mu_fpr = first.delta_fpr + shift_fpr / n;
  const double mu_fnr = first.delta_fnr + shift_fnr / n;
  double sum = 0.0;
  for (const auto& d : deltas.per_class) {
    const double dx = d.delta_fpr - mu_fpr;
    const double dy = d.delta_fnr - mu_fnr;
    sum += dx * dx + dy * dy;
  }
  return sum / n;
}

double compute_sde(const DeltaProfile& deltas) {
  require_included(deltas);
  double sum = 0.0;
  for (const auto& d : deltas.per_class) sum += std::abs(d.delta_fnr - d.delta_fpr);
  return sum / static_cast<double>(deltas.per_class.size());
}

BiasScores score_deltas(const DeltaProfile& deltas) {
  BiasScores scores;
  scores.base_model = deltas.base_model;
  scores.alt_model = deltas.alt_model;
  scores.cev = compute_cev(deltas);
  scores.sde = compute_sde(deltas);
  std::tie(scores.mean_delta_fpr, scores.mean_delta_fnr) = mean_point(deltas);
  scores.n_used = deltas.per_class.size();
  scores.included = deltas.included_ids();
  scores.excluded = deltas.excluded;
  return scores;
}

BiasScores compare_profiles(const ClassErrorProfile& base, const ClassErrorProfile& alt,
                            const DegeneratePolicy& policy) {
  return score_deltas(compute_deltas(base, alt, policy));
}

BiasScores normalize_scores(const BiasScores& raw, const ClassErrorProfile& base,
                            const ClassErrorProfile& random, const DegeneratePolicy& policy) {
  DeltaProfile divisor_deltas;
  try {
    divisor_deltas = compute_deltas(base, random, policy);
  } catch (const DegenerateInputError& e) {
    throw NormalizationDegenerateError(std::string("random baseline comparison failed: ") +
                                       e.what());
  }
  const auto divisor = restrict_to(divisor_deltas, raw.included);
  const double cev_div = compute_cev(divisor);
  const double sde_div = compute_sde(divisor);
  if (cev_div == 0.0 || sde_div == 0.0) {
    throw NormalizationDegenerateError(
        "random baseline comparison for '" + base.model_name + "' has zero " +
        (cev_div == 0.0 ? "CEV" : "SDE") + "; normalized scores are undefined");
  }
  BiasScores out = raw;
  out.cev_normalized = raw.cev / cev_div;
  out.sde_normalized = raw.sde / sde_div;
  return out;
}

std::size_t PopulationLabeling::tie_count() const {
  return static_cast<std::size_t>(std::count(tie_flags.begin(), tie_flags.end(), true));
}

PopulationLabeling modal_labels(const std::vector<PredictionSet>& population,
                                std::string population_name) {
  if (population.empty()) throw ArgumentError("modal labels need at least one model");
  const auto& first = population.front();
  const auto count = first.size();
  const auto n = first.vocabulary().size();
  for (const auto& model : population) {
    if (model.size() != count) {
      throw AlignmentError("model '" + model.model_name() + "' has " +
                           std::to_string(model.size()) + " instances, expected " +
                           std::to_string(count));
    }
    if (!(model.vocabulary() == first.vocabulary())) {
      throw AlignmentError("model '" + model.model_name() + "' uses a different vocabulary");
    }
    for (std::size_t i = 0; i < count; ++i) {
      const auto& id = model.records()[i].instance_id;
      const auto& ref = first.records()[i].instance_id;
      if (id && ref && *id != *ref) {
        throw AlignmentError("model '" + model.model_name() + "' row " + std::to_string(i + 1) +
                             " has instance id '" + *id + "', expected '" + *ref + "'");
      }
    }
  }

  PopulationLabeling out{std::move(population_name), {}, {}};
  out.modal_labels.reserve(count);
  out.tie_flags.reserve(count);
  std::vector<std::size_t> votes(n);
  for (std::size_t i = 0; i < count; ++i) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const auto& model : population) ++votes[model.records()[i].pred_label];
    const auto best = std::max_element(votes.begin(), votes.end());  // first max = lowest id
    out.modal_labels.push_back(static_cast<ClassId>(best - votes.begin()));
    out.tie_flags.push_back(std::count(votes.begin(), votes.end(), *best) > 1);
  }
  return out;
}

std::size_t count_cies(const PopulationLabeling& base_pop, const PopulationLabeling& alt_pop) {
  if (base_pop.size() != alt_pop.size()) {
    throw AlignmentError("populations cover " + std::to_string(base_pop.size()) + " and " +
                         std::to_string(alt_pop.size()) + " instances");
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < base_pop.size(); ++i) {
    if (base_pop.modal_labels[i] != alt_pop.modal_labels[i]) ++count;
  }
  return count;
}

}  // namespace classbias
