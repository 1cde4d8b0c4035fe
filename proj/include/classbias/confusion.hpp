#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "classbias/ingest.hpp"

namespace classbias {

/// One-vs-rest counts for a single class.
struct ClassConfusion {
  ClassId class_id = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ClassConfusion&, const ClassConfusion&) = default;
};

/// Rates for one class. A rate is empty when its denominator is zero.
/// `confusion` is empty for expected-value profiles (analytic random baseline).
struct ClassRates {
  ClassId class_id = 0;
  std::optional<double> fpr;
  std::optional<double> fnr;
  std::optional<ClassConfusion> confusion;

  friend bool operator==(const ClassRates&, const ClassRates&) = default;
};

struct ClassErrorProfile {
  std::string model_name;
  LabelVocabulary vocabulary;
  std::vector<ClassRates> per_class;  // indexed by class id
  double top1 = 0.0;

  friend bool operator==(const ClassErrorProfile&, const ClassErrorProfile&) = default;
};

/// Rates from counts: fpr = fp/(fp+tn), fnr = fn/(fn+tp), empty on 0/0.
ClassRates rates_from_confusion(const ClassConfusion& confusion);

/// One entry per vocabulary class, built one-vs-rest from the records.
ClassErrorProfile build_profile(const PredictionSet& set);

/// Builds a profile straight from per-class (fpr, fnr) pairs without counts.
/// Rates must lie in [0, 1]; used for synthetic profiles and expected values.
ClassErrorProfile profile_from_rates(std::string model_name, LabelVocabulary vocabulary,
                                     const std::vector<std::pair<std::optional<double>,
                                                                 std::optional<double>>>& rates,
                                     double top1);

struct AnalyticRandom {};

struct SampledRandom {
  std::uint64_t seed = 0;
  std::uint64_t draws = 0;
};

using RandomMode = std::variant<AnalyticRandom, SampledRandom>;

/// Profile of a predictor that picks every class with probability 1/n.
///
/// Analytic mode returns the expectation, fpr = 1/n and fnr = (n-1)/n, leaving
/// a rate empty where the reference has no instances on that side of the
/// split (no positives -> fnr undefined, no negatives -> fpr undefined).
///
/// Sampled mode walks the reference's true-label multiset cyclically for
/// `draws` instances and predicts each uniformly at random from a seeded
/// 64-bit Mersenne Twister, so a given (seed, draws) is reproducible across
/// platforms. The reference must carry confusion counts in sampled mode.
ClassErrorProfile random_profile(const LabelVocabulary& vocabulary,
                                 const ClassErrorProfile& reference, const RandomMode& mode);

}  // namespace classbias
