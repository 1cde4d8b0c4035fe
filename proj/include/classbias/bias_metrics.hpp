#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "classbias/confusion.hpp"
#include "classbias/ingest.hpp"

namespace classbias {

/// What to do with a class whose base rate cannot serve as a divisor.
struct DegeneratePolicy {
  enum class Kind { exclude, epsilon, strict };

  Kind kind = Kind::exclude;
  double epsilon = 0.0;

  static DegeneratePolicy exclude() { return {}; }
  static DegeneratePolicy strict() { return {Kind::strict, 0.0}; }
  static DegeneratePolicy with_epsilon(double eps);

  /// Accepts "exclude", "strict" or "epsilon=<positive number>".
  static DegeneratePolicy parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const DegeneratePolicy&, const DegeneratePolicy&) = default;
};

enum class ExclusionReason {
  undefined_base_rate,
  zero_base_rate,
  /// The alternative has no instances on one side of the split for this class
  /// (e.g. a group subset with no members of the class).
  undefined_alt_rate,
};

std::string_view to_string(ExclusionReason reason);

struct ClassDelta {
  ClassId class_id = 0;
  double delta_fpr = 0.0;
  double delta_fnr = 0.0;

  friend bool operator==(const ClassDelta&, const ClassDelta&) = default;
};

struct ExcludedClass {
  ClassId class_id = 0;
  ExclusionReason reason = ExclusionReason::undefined_base_rate;

  friend bool operator==(const ExcludedClass&, const ExcludedClass&) = default;
};

/// Normalized per-class rate changes, (alt - base) / base.
struct DeltaProfile {
  std::string base_model;
  std::string alt_model;
  LabelVocabulary vocabulary;
  std::vector<ClassDelta> per_class;
  std::vector<ExcludedClass> excluded;

  std::vector<ClassId> included_ids() const;
};

struct BiasScores {
  std::string base_model;
  std::string alt_model;
  double cev = 0.0;
  double sde = 0.0;
  std::optional<double> cev_normalized;
  std::optional<double> sde_normalized;
  double mean_delta_fpr = 0.0;
  double mean_delta_fnr = 0.0;
  std::size_t n_used = 0;
  std::vector<ClassId> included;
  std::vector<ExcludedClass> excluded;
};

/// Per-class normalized deltas of `alt` relative to `base`.
///
/// Undefined rates on either side always drop the class (strict throws).
/// A zero base rate is dropped under exclude, replaced by epsilon under
/// epsilon, and rejected under strict.
DeltaProfile compute_deltas(const ClassErrorProfile& base, const ClassErrorProfile& alt,
                            const DegeneratePolicy& policy = {});

/// Mean squared distance of each (delta_fpr, delta_fnr) point from the mean point.
double compute_cev(const DeltaProfile& deltas);

/// Mean of |delta_fnr - delta_fpr|, the distance to the balance line without
/// the 1/sqrt(2) factor.
double compute_sde(const DeltaProfile& deltas);

/// Deltas, CEV, SDE and mean deltas for one base -> alt comparison.
BiasScores score_deltas(const DeltaProfile& deltas);
BiasScores compare_profiles(const ClassErrorProfile& base, const ClassErrorProfile& alt,
                            const DegeneratePolicy& policy = {});

/// Divides raw scores by the scores of base -> random computed over the same
/// included classes. Throws NormalizationDegenerateError when a divisor is 0
/// or the random comparison cannot cover raw's classes.
BiasScores normalize_scores(const BiasScores& raw, const ClassErrorProfile& base,
                            const ClassErrorProfile& random, const DegeneratePolicy& policy = {});

struct PopulationLabeling {
  std::string population_name;
  std::vector<ClassId> modal_labels;
  std::vector<bool> tie_flags;

  std::size_t size() const { return modal_labels.size(); }
  std::size_t tie_count() const;
};

/// Plurality label per instance across a population of models; ties go to
/// the lowest class id and are flagged.
PopulationLabeling modal_labels(const std::vector<PredictionSet>& population,
                                std::string population_name = "population");

/// Number of instances whose modal labels differ.
std::size_t count_cies(const PopulationLabeling& base_pop, const PopulationLabeling& alt_pop);

}  // namespace classbias
