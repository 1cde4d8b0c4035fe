#include "classbias/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "classbias/errors.hpp"

namespace classbias {

namespace {

void require_attribute(const PredictionSet& set, const std::string& attribute) {
  const bool present = std::any_of(set.records().begin(), set.records().end(),
                                   [&](const auto& r) { return r.attributes.contains(attribute); });
  if (!present) {
    throw SchemaError("attribute '" + attribute + "' not present in '" + set.model_name() + "'");
  }
}

std::optional<double> relative_change(std::optional<double> alt, std::optional<double> base) {
  if (!alt || !base || *base == 0.0) return std::nullopt;
  return (*alt - *base) / *base;
}

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

bool GroupSpec::matches(const PredictionRecord& record) const {
  auto it = record.attributes.find(attribute);
  const bool equal = it != record.attributes.end() && it->second == value;
  return negated ? !equal : equal;
}

std::string GroupSpec::to_string() const {
  return attribute + (negated ? "!=" : "=") + value;
}

GroupSpec GroupSpec::parse(const std::string& text) {
  if (auto pos = text.find("!="); pos != std::string::npos && pos > 0) {
    return {text.substr(0, pos), text.substr(pos + 2), true};
  }
  if (auto pos = text.find('='); pos != std::string::npos && pos > 0) {
    return {text.substr(0, pos), text.substr(pos + 1), false};
  }
  throw ArgumentError("group '" + text + "' must look like attr=value or attr!=value");
}

PredictionSet select_group(const PredictionSet& set, const GroupSpec& group) {
  require_attribute(set, group.attribute);
  std::vector<PredictionRecord> subset;
  for (const auto& r : set.records()) {
    if (group.matches(r)) subset.push_back(r);
  }
  if (subset.empty()) {
    throw EmptyGroupError("group " + group.to_string() + " selects no records of '" +
                          set.model_name() + "'");
  }
  return PredictionSet(set.model_name() + "[" + group.to_string() + "]", set.vocabulary(),
                       std::move(subset));
}

ClassConfusion pooled_confusion(const ClassErrorProfile& profile) {
  ClassConfusion pooled;
  for (const auto& c : profile.per_class) {
    if (!c.confusion) throw ArgumentError("profile '" + profile.model_name + "' has no counts");
    pooled.tp += c.confusion->tp;
    pooled.fp += c.confusion->fp;
    pooled.fn += c.confusion->fn;
    pooled.tn += c.confusion->tn;
  }
  return pooled;
}

MacroRates macro_rates(const ClassErrorProfile& profile) {
  double fpr = 0.0, fnr = 0.0;
  std::size_t n_fpr = 0, n_fnr = 0;
  for (const auto& c : profile.per_class) {
    if (c.fpr) {
      fpr += *c.fpr;
      ++n_fpr;
    }
    if (c.fnr) {
      fnr += *c.fnr;
      ++n_fnr;
    }
  }
  MacroRates out;
  if (n_fpr) out.fpr = fpr / static_cast<double>(n_fpr);
  if (n_fnr) out.fnr = fnr / static_cast<double>(n_fnr);
  return out;
}

GroupFairnessReport group_fairness(const PredictionSet& set, const GroupSpec& group,
                                   const DegeneratePolicy& policy) {
  const auto subset = select_group(set, group);
  const auto full_profile = build_profile(set);
  const auto subset_profile = build_profile(subset);

  GroupFairnessReport report;
  report.group = group;
  report.subset_size = subset.size();
  report.top1 = subset_profile.top1;
  report.full_top1 = full_profile.top1;
  report.scores = compare_profiles(full_profile, subset_profile, policy);

  const auto full_macro = macro_rates(full_profile);
  const auto subset_macro = macro_rates(subset_profile);
  report.aggregate_delta_fpr = relative_change(subset_macro.fpr, full_macro.fpr);
  report.aggregate_delta_fnr = relative_change(subset_macro.fnr, full_macro.fnr);
  report.full_pooled = pooled_confusion(full_profile);
  report.subset_pooled = pooled_confusion(subset_profile);
  return report;
}

BinaryFairnessReport binary_fairness(const PredictionSet& set, const std::string& attribute,
                                     const DegeneratePolicy& policy,
                                     const BinaryFairnessOptions& options) {
  const auto& vocab = set.vocabulary();
  if (vocab.size() != 2) {
    throw UnsupportedTaskError("binary fairness metrics need exactly 2 classes, '" +
                               set.model_name() + "' has " + std::to_string(vocab.size()));
  }
  require_attribute(set, attribute);
  const ClassId positive = options.positive_label ? vocab.id_of(*options.positive_label) : 1;

  // Records without the attribute fall in the "" group.
  struct Tally {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::size_t size = 0, scored = 0;
    double score_sum = 0.0, residual_sum = 0.0;
  };
  std::map<std::string, Tally> groups;
  Tally overall;
  for (const auto& r : set.records()) {
    auto it = r.attributes.find(attribute);
    auto& g = groups[it == r.attributes.end() ? std::string() : it->second];
    const bool truth = r.true_label == positive;
    const bool pred = r.pred_label == positive;
    for (Tally* t : {&g, &overall}) {
      ++t->size;
      if (truth && pred) ++t->tp;
      if (!truth && pred) ++t->fp;
      if (truth && !pred) ++t->fn;
      if (!truth && !pred) ++t->tn;
      if (r.score) {
        ++t->scored;
        t->score_sum += *r.score;
        t->residual_sum += std::abs((truth ? 1.0 : 0.0) - *r.score);
      }
    }
  }
  if (groups.size() < 2) {
    throw UnsupportedTaskError("attribute '" + attribute + "' needs at least 2 distinct values");
  }

  BinaryFairnessReport report;
  report.attribute = attribute;
  report.positive_label = vocab.label(positive);
  report.overall_fpr = ratio(overall.fp, overall.fp + overall.tn);
  report.overall_fnr = ratio(overall.fn, overall.fn + overall.tp);
  if (!report.overall_fpr || !report.overall_fnr) {
    throw DegenerateInputError("overall FPR/FNR undefined: '" + set.model_name() +
                               "' lacks positive or negative instances");
  }

  const bool all_scored = overall.scored == overall.size;
  if (options.require_scores && !all_scored) {
    throw MissingScoreError("DIMS/DIAMR need a score on every record of '" + set.model_name() +
                            "'");
  }

  for (const auto& [value, t] : groups) {
    report.groups.push_back({attribute, value, false});
    BinaryGroupRates rates;
    rates.value = value;
    rates.size = t.size;
    rates.fpr = ratio(t.fp, t.fp + t.tn);
    rates.fnr = ratio(t.fn, t.fn + t.tp);
    if (t.scored == t.size) {
      rates.mean_score = t.score_sum / static_cast<double>(t.size);
      rates.mean_residual = t.residual_sum / static_cast<double>(t.size);
    }
    if (!rates.fpr || !rates.fnr) {
      if (policy.kind == DegeneratePolicy::Kind::strict) {
        throw DegenerateInputError("group " + attribute + "=" + value +
                                   " has an undefined FPR or FNR (strict policy)");
      }
      report.skipped_groups.push_back(value);
    } else {
      report.fped += std::abs(*report.overall_fpr - *rates.fpr);
      report.fned += std::abs(*report.overall_fnr - *rates.fnr);
    }
    report.group_rates.push_back(std::move(rates));
  }

  if (all_scored && report.group_rates.size() == 2) {
    const auto& first = report.group_rates[0];
    const auto& second = report.group_rates[1];
    report.dims = *first.mean_score - *second.mean_score;
    report.diamr = std::abs(*first.mean_residual - *second.mean_residual);
  }
  return report;
}

}  // namespace classbias
