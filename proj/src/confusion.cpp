#include "classbias/confusion.hpp"

#include <limits>
#include <random>

#include "classbias/errors.hpp"

namespace classbias {

namespace {

// Unbiased draw in [0, bound) by rejection; std::uniform_int_distribution
// differs between standard libraries.
std::uint64_t bounded_draw(std::mt19937_64& engine, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine();
  } while (x >= limit);
  return x % bound;
}

ClassErrorProfile from_counts(std::string model_name, const LabelVocabulary& vocabulary,
                              const std::vector<std::uint64_t>& true_counts,
                              const std::vector<std::uint64_t>& pred_counts,
                              const std::vector<std::uint64_t>& correct, std::uint64_t total) {
  ClassErrorProfile profile{std::move(model_name), vocabulary, {}, 0.0};
  profile.per_class.reserve(vocabulary.size());
  std::uint64_t hits = 0;
  for (ClassId c = 0; c < vocabulary.size(); ++c) {
    ClassConfusion cm;
    cm.class_id = c;
    cm.tp = correct[c];
    cm.fn = true_counts[c] - correct[c];
    cm.fp = pred_counts[c] - correct[c];
    cm.tn = total - cm.tp - cm.fn - cm.fp;
    hits += cm.tp;
    profile.per_class.push_back(rates_from_confusion(cm));
  }
  profile.top1 = total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
  return profile;
}

}  // namespace

ClassRates rates_from_confusion(const ClassConfusion& confusion) {
  ClassRates rates;
  rates.class_id = confusion.class_id;
  rates.confusion = confusion;
  if (auto neg = confusion.fp + confusion.tn; neg > 0) {
    rates.fpr = static_cast<double>(confusion.fp) / static_cast<double>(neg);
  }
  if (auto pos = confusion.fn + confusion.tp; pos > 0) {
    rates.fnr = static_cast<double>(confusion.fn) / static_cast<double>(pos);
  }
  return rates;
}

ClassErrorProfile build_profile(const PredictionSet& set) {
  const auto n = set.vocabulary().size();
  std::vector<std::uint64_t> true_counts(n), pred_counts(n), correct(n);
  for (const auto& r : set.records()) {
    ++true_counts[r.true_label];
    ++pred_counts[r.pred_label];
    if (r.true_label == r.pred_label) ++correct[r.true_label];
  }
  return from_counts(set.model_name(), set.vocabulary(), true_counts, pred_counts, correct,
                     set.size());
}

ClassErrorProfile profile_from_rates(
    std::string model_name, LabelVocabulary vocabulary,
    const std::vector<std::pair<std::optional<double>, std::optional<double>>>& rates,
    double top1) {
  if (rates.size() != vocabulary.size()) {
    throw AlignmentError("expected " + std::to_string(vocabulary.size()) + " rate pairs, got " +
                         std::to_string(rates.size()));
  }
  auto check = [](const std::optional<double>& r) {
    if (r && !(*r >= 0.0 && *r <= 1.0)) throw ValueError("rate outside [0, 1]");
  };
  ClassErrorProfile profile{std::move(model_name), std::move(vocabulary), {}, top1};
  for (ClassId c = 0; c < rates.size(); ++c) {
    check(rates[c].first);
    check(rates[c].second);
    profile.per_class.push_back(ClassRates{c, rates[c].first, rates[c].second, std::nullopt});
  }
  return profile;
}

ClassErrorProfile random_profile(const LabelVocabulary& vocabulary,
                                 const ClassErrorProfile& reference, const RandomMode& mode) {
  const auto n = vocabulary.size();
  if (!(reference.vocabulary == vocabulary)) {
    throw AlignmentError("random baseline vocabulary differs from the reference profile");
  }

  if (std::holds_alternative<AnalyticRandom>(mode)) {
    const double inv = 1.0 / static_cast<double>(n);
    ClassErrorProfile profile{"random", vocabulary, {}, inv};
    for (ClassId c = 0; c < n; ++c) {
      ClassRates rates{c, inv, static_cast<double>(n - 1) / static_cast<double>(n), std::nullopt};
      if (const auto& ref = reference.per_class.at(c); ref.confusion) {
        if (ref.confusion->tp + ref.confusion->fn == 0) rates.fnr.reset();
        if (ref.confusion->fp + ref.confusion->tn == 0) rates.fpr.reset();
      } else {
        if (!ref.fnr) rates.fnr.reset();
        if (!ref.fpr) rates.fpr.reset();
      }
      profile.per_class.push_back(rates);
    }
    return profile;
  }

  const auto& sampled = std::get<SampledRandom>(mode);
  if (sampled.draws == 0) throw ArgumentError("sampled random baseline needs draws > 0");

  // Expand the reference's true-label multiset in class order.
  std::vector<ClassId> truth;
  for (const auto& rates : reference.per_class) {
    if (!rates.confusion) {
      throw ArgumentError("sampled random baseline needs a reference profile with counts");
    }
    truth.insert(truth.end(), rates.confusion->tp + rates.confusion->fn, rates.class_id);
  }
  if (truth.empty()) throw EmptyInputError("reference profile has no instances");

  std::mt19937_64 engine(sampled.seed);
  std::vector<std::uint64_t> true_counts(n), pred_counts(n), correct(n);
  for (std::uint64_t k = 0; k < sampled.draws; ++k) {
    const ClassId t = truth[k % truth.size()];
    const auto p = static_cast<ClassId>(bounded_draw(engine, n));
    ++true_counts[t];
    ++pred_counts[p];
    if (t == p) ++correct[t];
  }
  return from_counts("random", vocabulary, true_counts, pred_counts, correct, sampled.draws);
}

}  // namespace classbias
