#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "classbias/bias_metrics.hpp"
#include "classbias/errors.hpp"
#include "oracle.hpp"
#include "test_support.hpp"

namespace classbias {
namespace {

using testing::make_set;

LabelVocabulary vocab(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < n; ++c) labels.push_back("c" + std::to_string(c));
  return LabelVocabulary(labels);
}

ClassErrorProfile rates(const std::string& name,
                        const std::vector<std::pair<std::optional<double>, std::optional<double>>>& r) {
  return profile_from_rates(name, vocab(r.size()), r, 0.5);
}

DeltaProfile delta_profile(const std::vector<std::pair<double, double>>& points) {
  DeltaProfile d{"base", "alt", vocab(std::max<std::size_t>(points.size(), 2)), {}, {}};
  for (std::size_t i = 0; i < points.size(); ++i) {
    d.per_class.push_back({i, points[i].first, points[i].second});
  }
  return d;
}

std::vector<oracle::RatePair> as_pairs(const DeltaProfile& d) {
  std::vector<oracle::RatePair> out;
  for (const auto& c : d.per_class) out.push_back({c.delta_fpr, c.delta_fnr});
  return out;
}

TEST(ComputeDeltas, IdentityIsZero) {
  auto base = rates("b", {{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}});
  auto d = compute_deltas(base, base);
  EXPECT_TRUE(d.excluded.empty());
  for (const auto& c : d.per_class) {
    EXPECT_EQ(c.delta_fpr, 0.0);
    EXPECT_EQ(c.delta_fnr, 0.0);
  }
}

TEST(ComputeDeltas, DirectEvaluation) {
  auto d = compute_deltas(rates("b", {{0.1, 0.2}, {0.5, 0.5}}), rates("a", {{0.2, 0.2}, {0.5, 0.5}}));
  EXPECT_DOUBLE_EQ(d.per_class[0].delta_fpr, 1.0);
  EXPECT_DOUBLE_EQ(d.per_class[0].delta_fnr, 0.0);
}

TEST(ComputeDeltas, ZeroBaseRateUnderEachPolicy) {
  auto base = rates("b", {{0.0, 0.2}, {0.1, 0.1}});
  auto alt = rates("a", {{0.05, 0.2}, {0.2, 0.1}});

  auto excluded = compute_deltas(base, alt, DegeneratePolicy::exclude());
  ASSERT_EQ(excluded.excluded.size(), 1u);
  EXPECT_EQ(excluded.excluded[0].class_id, 0u);
  EXPECT_EQ(excluded.excluded[0].reason, ExclusionReason::zero_base_rate);
  ASSERT_EQ(excluded.per_class.size(), 1u);
  EXPECT_EQ(excluded.per_class[0].class_id, 1u);

  auto eps = compute_deltas(base, alt, DegeneratePolicy::with_epsilon(0.01));
  ASSERT_EQ(eps.per_class.size(), 2u);
  EXPECT_DOUBLE_EQ(eps.per_class[0].delta_fpr, 5.0);
  EXPECT_DOUBLE_EQ(eps.per_class[0].delta_fnr, 0.0);

  try {
    compute_deltas(base, alt, DegeneratePolicy::strict());
    FAIL();
  } catch (const DegenerateInputError& e) {
    EXPECT_NE(std::string(e.what()).find("'c0'"), std::string::npos) << e.what();
  }
}

TEST(ComputeDeltas, UndefinedRates) {
  auto base = rates("b", {{std::nullopt, 0.2}, {0.1, 0.1}, {0.3, 0.3}});
  auto alt = rates("a", {{0.1, 0.2}, {0.2, std::nullopt}, {0.3, 0.3}});
  auto d = compute_deltas(base, alt, DegeneratePolicy::with_epsilon(1e-3));
  ASSERT_EQ(d.excluded.size(), 2u);
  EXPECT_EQ(d.excluded[0].reason, ExclusionReason::undefined_base_rate);
  EXPECT_EQ(d.excluded[1].reason, ExclusionReason::undefined_alt_rate);
  EXPECT_EQ(d.per_class.size() + d.excluded.size(), 3u);
  EXPECT_THROW(compute_deltas(base, alt, DegeneratePolicy::strict()), DegenerateInputError);
}

TEST(ComputeDeltas, Errors) {
  auto base = rates("b", {{0.1, 0.2}, {0.1, 0.1}});
  auto other = profile_from_rates("o", LabelVocabulary({"x", "y"}), {{0.1, 0.2}, {0.1, 0.1}}, 1);
  EXPECT_THROW(compute_deltas(base, other), AlignmentError);
  auto zero = rates("z", {{0.0, 0.0}, {0.0, 0.0}});
  EXPECT_THROW(compute_deltas(zero, base), DegenerateInputError);
}

TEST(DegeneratePolicy, Parse) {
  EXPECT_EQ(DegeneratePolicy::parse("exclude"), DegeneratePolicy::exclude());
  EXPECT_EQ(DegeneratePolicy::parse("strict"), DegeneratePolicy::strict());
  EXPECT_EQ(DegeneratePolicy::parse("epsilon=1e-6"), DegeneratePolicy::with_epsilon(1e-6));
  EXPECT_EQ(DegeneratePolicy::parse("epsilon=0.5").to_string(), "epsilon=0.5");
  EXPECT_THROW(DegeneratePolicy::parse("epsilon=0"), ArgumentError);
  EXPECT_THROW(DegeneratePolicy::parse("epsilon=abc"), ArgumentError);
  EXPECT_THROW(DegeneratePolicy::parse("lenient"), ArgumentError);
}

TEST(Cev, ConstantDeltasGiveZero) {
  EXPECT_EQ(compute_cev(delta_profile({{0.3, -0.2}, {0.3, -0.2}, {0.3, -0.2}})), 0.0);
}

TEST(Cev, ThreeClassExample) {
  auto d = delta_profile({{1, 0}, {0, 0.5}, {0, 0}});
  // 10/36 by hand; the oracle re-derives it independently.
  EXPECT_NEAR(compute_cev(d), 10.0 / 36.0, 1e-15);
  EXPECT_NEAR(compute_cev(d), oracle::cev(as_pairs(d)), 1e-15);
  EXPECT_NEAR(compute_cev(d), 0.27778, 5e-6);
}

TEST(Cev, SingleClassIsZero) {
  EXPECT_EQ(compute_cev(delta_profile({{4.0, -1.5}})), 0.0);
}

TEST(Cev, EmptyIsDegenerate) {
  EXPECT_THROW(compute_cev(delta_profile({})), DegenerateInputError);
  EXPECT_THROW(compute_sde(delta_profile({})), DegenerateInputError);
}

TEST(Sde, BalanceLineIsZero) {
  EXPECT_EQ(compute_sde(delta_profile({{0.5, 0.5}, {-2, -2}, {0, 0}})), 0.0);
}

TEST(Sde, ThreeClassExample) {
  EXPECT_DOUBLE_EQ(compute_sde(delta_profile({{1, 0}, {0, 0.5}, {0, 0}})), 0.5);
}

TEST(Sde, JointSignFlipInvariant) {
  auto d = delta_profile({{1, 0}, {0.25, 0.5}, {-3, 2}});
  auto flipped = delta_profile({{-1, 0}, {-0.25, -0.5}, {3, -2}});
  EXPECT_DOUBLE_EQ(compute_sde(d), compute_sde(flipped));
}

TEST(Normalize, SelfComparisonIsOne) {
  auto base = build_profile(make_set("m", {"a", "b", "c"}, {0, 0, 0, 1, 1, 1, 2, 2, 2, 2},
                                     {0, 0, 1, 1, 1, 2, 2, 2, 0, 0}));
  auto random = random_profile(base.vocabulary, base, AnalyticRandom{});
  auto raw = compare_profiles(base, random);
  auto norm = normalize_scores(raw, base, random);
  EXPECT_DOUBLE_EQ(*norm.cev_normalized, 1.0);
  EXPECT_DOUBLE_EQ(*norm.sde_normalized, 1.0);

  auto same = normalize_scores(compare_profiles(base, base), base, random);
  EXPECT_EQ(*same.cev_normalized, 0.0);
  EXPECT_EQ(*same.sde_normalized, 0.0);
}

TEST(Normalize, HalfOfRandomChangeReadsAsHalf) {
  // An alternative halfway (in every rate) between base and random scores
  // 0.5 on SDE and 0.25 on CEV (CEV is quadratic in the deltas).
  auto base = rates("b", {{0.1, 0.2}, {0.2, 0.3}, {0.05, 0.6}});
  auto random = rates("r", {{1.0 / 3, 2.0 / 3}, {1.0 / 3, 2.0 / 3}, {1.0 / 3, 2.0 / 3}});
  std::vector<std::pair<std::optional<double>, std::optional<double>>> mid;
  for (std::size_t c = 0; c < 3; ++c) {
    mid.push_back({(*base.per_class[c].fpr + *random.per_class[c].fpr) / 2,
                   (*base.per_class[c].fnr + *random.per_class[c].fnr) / 2});
  }
  auto alt = rates("a", mid);
  auto s = normalize_scores(compare_profiles(base, alt), base, random);
  EXPECT_NEAR(*s.sde_normalized, 0.5, 1e-12);
  EXPECT_NEAR(*s.cev_normalized, 0.25, 1e-12);
}

TEST(Normalize, ZeroDivisorIsReported) {
  // Every class has the same base rates, so base -> random moves all points together.
  auto base = rates("b", {{0.2, 0.4}, {0.2, 0.4}});
  auto random = rates("r", {{0.5, 0.5}, {0.5, 0.5}});
  auto alt = rates("a", {{0.3, 0.4}, {0.2, 0.1}});
  EXPECT_THROW(normalize_scores(compare_profiles(base, alt), base, random),
               NormalizationDegenerateError);
}

TEST(Normalize, UsesRawInclusionSet) {
  // Class 2 is excluded from raw (undefined alt rate); the divisor must drop it too.
  auto base = rates("b", {{0.1, 0.2}, {0.2, 0.3}, {0.05, 0.6}});
  auto random = rates("r", {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
  auto alt = rates("a", {{0.2, 0.2}, {0.2, 0.6}, {0.05, std::nullopt}});
  auto raw = compare_profiles(base, alt);
  ASSERT_EQ(raw.n_used, 2u);
  auto s = normalize_scores(raw, base, random);
  auto divisor = oracle::deltas({{0.1, 0.2}, {0.2, 0.3}}, {{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_NEAR(*s.cev_normalized, raw.cev / oracle::cev(divisor), 1e-12);
  EXPECT_NEAR(*s.sde_normalized, raw.sde / oracle::sde(divisor), 1e-12);
}

TEST(ModalLabels, SingleModelIsItself) {
  auto m = make_set("m", {"a", "b", "c"}, {0, 1, 2}, {2, 1, 0});
  auto l = modal_labels({m});
  EXPECT_EQ(l.modal_labels, (std::vector<ClassId>{2, 1, 0}));
  EXPECT_EQ(l.tie_count(), 0u);
}

TEST(ModalLabels, Majority) {
  auto m1 = make_set("m1", {"a", "b"}, {0}, {0});
  auto m2 = make_set("m2", {"a", "b"}, {0}, {0});
  auto m3 = make_set("m3", {"a", "b"}, {0}, {1});
  auto l = modal_labels({m3, m1, m2});
  EXPECT_EQ(l.modal_labels[0], 0u);
  EXPECT_FALSE(l.tie_flags[0]);
}

TEST(ModalLabels, TwoModelEnumeration) {
  // Every (p1, p2) over 4 classes: agreement -> that label; disagreement ->
  // lowest id with a tie flag.
  const int n = 4;
  std::vector<int> truth, p1, p2;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      truth.push_back(0);
      p1.push_back(a);
      p2.push_back(b);
    }
  }
  std::vector<std::string> labels{"a", "b", "c", "d"};
  auto l = modal_labels({make_set("x", labels, truth, p1), make_set("y", labels, truth, p2)});
  for (std::size_t i = 0; i < truth.size(); ++i) {
    EXPECT_EQ(l.modal_labels[i], static_cast<ClassId>(std::min(p1[i], p2[i])));
    EXPECT_EQ(l.tie_flags[i], p1[i] != p2[i]);
  }
}

TEST(ModalLabels, AlignmentErrors) {
  auto m1 = make_set("m1", {"a", "b"}, {0, 1}, {0, 1});
  auto m2 = make_set("m2", {"a", "b"}, {0}, {0});
  EXPECT_THROW(modal_labels({m1, m2}), AlignmentError);
  auto m3 = make_set("m3", {"a", "c"}, {0, 1}, {0, 1});
  EXPECT_THROW(modal_labels({m1, m3}), AlignmentError);
  EXPECT_THROW(modal_labels({}), ArgumentError);
}

TEST(CountCies, Definition) {
  PopulationLabeling a{"a", {0, 1, 2, 0, 1}, std::vector<bool>(5)};
  PopulationLabeling b{"b", {0, 2, 2, 1, 1}, std::vector<bool>(5)};
  EXPECT_EQ(count_cies(a, a), 0u);
  EXPECT_EQ(count_cies(a, b), 2u);
  PopulationLabeling c{"c", {0}, {false}};
  EXPECT_THROW(count_cies(a, c), AlignmentError);
}

TEST(CountCies, DegradationLadderIsNonDecreasing) {
  // Base population: 3 models of 300 instances, 3 classes. Step k corrupts
  // the first 10k class-0 instances in every alt model.
  std::mt19937 rng(17);
  std::vector<int> truth(300);
  for (int i = 0; i < 300; ++i) truth[i] = i % 3;
  std::vector<std::string> labels{"a", "b", "c"};
  std::vector<PredictionSet> base_pop;
  std::vector<std::vector<int>> base_preds;
  for (int m = 0; m < 3; ++m) {
    auto pred = truth;
    std::bernoulli_distribution noise(0.05);
    for (int i = 0; i < 300; ++i) {
      if (noise(rng)) pred[i] = (truth[i] + 1) % 3;
    }
    base_preds.push_back(pred);
    base_pop.push_back(make_set("base" + std::to_string(m), labels, truth, pred));
  }
  auto base_labels = modal_labels(base_pop);
  std::size_t previous = 0;
  for (int step = 0; step <= 5; ++step) {
    std::vector<PredictionSet> alt_pop;
    for (int m = 0; m < 3; ++m) {
      auto pred = base_preds[m];
      int corrupted = 0;
      for (int i = 0; i < 300 && corrupted < 10 * step; ++i) {
        if (truth[i] == 0) {
          pred[i] = 2;
          ++corrupted;
        }
      }
      alt_pop.push_back(make_set("alt" + std::to_string(m), labels, truth, pred));
    }
    auto count = count_cies(base_labels, modal_labels(alt_pop));
    EXPECT_GE(count, previous) << "step " << step;
    previous = count;
  }
  EXPECT_GT(previous, 0u);
}

// Property tests over random delta profiles.

std::vector<std::pair<double, double>> random_points(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
  return pts;
}

TEST(MetricProperty, NonNegativeAndPermutationInvariant) {
  std::mt19937 rng(21);
  std::uniform_int_distribution<std::size_t> size(1, 10);
  for (int trial = 0; trial < 500; ++trial) {
    auto pts = random_points(rng, size(rng));
    auto d = delta_profile(pts);
    const double cev = compute_cev(d);
    const double sde = compute_sde(d);
    ASSERT_GE(cev, 0.0);
    ASSERT_GE(sde, 0.0);
    std::shuffle(pts.begin(), pts.end(), rng);
    auto p = delta_profile(pts);
    ASSERT_NEAR(compute_cev(p), cev, 1e-12 * std::max(1.0, cev));
    ASSERT_NEAR(compute_sde(p), sde, 1e-12 * std::max(1.0, sde));
  }
}

TEST(MetricProperty, CevIsTranslationInvariant) {
  std::mt19937 rng(22);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  for (int trial = 0; trial < 300; ++trial) {
    auto pts = random_points(rng, 2 + trial % 9);
    const double sx = shift(rng), sy = shift(rng);
    auto moved = pts;
    for (auto& [x, y] : moved) {
      x += sx;
      y += sy;
    }
    ASSERT_NEAR(compute_cev(delta_profile(moved)), compute_cev(delta_profile(pts)), 1e-9);
  }
}

TEST(MetricProperty, SdeIsNotTranslationInvariant) {
  auto d = delta_profile({{0, 0}, {0, 0}});
  auto shifted = delta_profile({{1, 0}, {1, 0}});
  EXPECT_EQ(compute_sde(d), 0.0);
  EXPECT_EQ(compute_sde(shifted), 1.0);
  EXPECT_EQ(compute_cev(d), compute_cev(shifted));
}

TEST(MetricProperty, SdeZeroIffOnBalanceLine) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 1 + trial % 8; ++i) {
      const double v = u(rng);
      pts.push_back({v, v});
    }
    ASSERT_EQ(compute_sde(delta_profile(pts)), 0.0);
    pts[trial % pts.size()].second += 1e-3;
    ASSERT_GT(compute_sde(delta_profile(pts)), 0.0);
  }
}

TEST(MetricProperty, ScalingLaw) {
  std::mt19937 rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    auto pts = random_points(rng, 1 + trial % 10);
    const double cev = compute_cev(delta_profile(pts));
    const double sde = compute_sde(delta_profile(pts));
    for (double c : {0.5, 2.0, -1.0, 3.7}) {
      auto scaled = pts;
      for (auto& [x, y] : scaled) {
        x *= c;
        y *= c;
      }
      ASSERT_NEAR(compute_cev(delta_profile(scaled)), c * c * cev, 1e-9 * std::max(1.0, cev));
      ASSERT_NEAR(compute_sde(delta_profile(scaled)), std::abs(c) * sde, 1e-9 * std::max(1.0, sde));
    }
  }
}

TEST(MetricProperty, AgreesWithBruteForceOracle) {
  std::mt19937 rng(25);
  std::uniform_int_distribution<std::size_t> classes(2, 10);
  std::uniform_real_distribution<double> rate(1e-3, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = classes(rng);
    std::vector<std::pair<std::optional<double>, std::optional<double>>> b, a;
    std::vector<oracle::RatePair> ob, oa;
    for (std::size_t c = 0; c < n; ++c) {
      ob.push_back({rate(rng), rate(rng)});
      oa.push_back({rate(rng), rate(rng)});
      b.push_back({ob.back().fpr, ob.back().fnr});
      a.push_back({oa.back().fpr, oa.back().fnr});
    }
    auto s = compare_profiles(rates("b", b), rates("a", a));
    auto od = oracle::deltas(ob, oa);
    ASSERT_LE(oracle::relative_error(s.cev, oracle::cev(od)), 1e-9);
    ASSERT_LE(oracle::relative_error(s.sde, oracle::sde(od)), 1e-9);
  }
}

TEST(ScoreDeltas, MeanDeltas) {
  auto s = score_deltas(delta_profile({{1, 0}, {0, 0.5}, {0, 0}}));
  EXPECT_DOUBLE_EQ(s.mean_delta_fpr, 1.0 / 3);
  EXPECT_DOUBLE_EQ(s.mean_delta_fnr, 0.5 / 3);
  EXPECT_EQ(s.n_used, 3u);
  EXPECT_FALSE(s.cev_normalized.has_value());
}

}  // namespace
}  // namespace classbias
