// Python bindings. Structured results cross the boundary as JSON text and
// are decoded by the package's __init__.py.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "classbias/bias_metrics.hpp"
#include "classbias/compare.hpp"
#include "classbias/confusion.hpp"
#include "classbias/errors.hpp"
#include "classbias/fairness.hpp"
#include "classbias/ingest.hpp"
#include "classbias/serialize.hpp"

namespace py = pybind11;
using namespace classbias;

namespace {

RandomMode make_random_mode(const std::string& mode, std::uint64_t seed,
                            std::optional<std::uint64_t> draws, std::size_t reference_size) {
  if (mode == "analytic") return AnalyticRandom{};
  if (mode == "sampled") return SampledRandom{seed, draws.value_or(reference_size)};
  throw ArgumentError("unknown random mode '" + mode + "'");
}

PredictionSet from_lists(const std::string& name, const std::vector<std::string>& true_labels,
                         const std::vector<std::string>& pred_labels,
                         std::optional<std::vector<std::optional<double>>> scores,
                         std::optional<std::vector<AttributeMap>> attributes,
                         std::optional<std::vector<std::string>> labels) {
  if (true_labels.size() != pred_labels.size())
    throw AlignmentError("true and predicted label lists differ in length");
  if (scores && scores->size() != true_labels.size())
    throw AlignmentError("score list length differs from label lists");
  if (attributes && attributes->size() != true_labels.size())
    throw AlignmentError("attribute list length differs from label lists");
  LabelVocabulary vocab;
  if (labels) {
    vocab = LabelVocabulary(*labels);
  } else {
    std::vector<std::string> all(true_labels);
    all.insert(all.end(), pred_labels.begin(), pred_labels.end());
    vocab = LabelVocabulary::from_unsorted(std::move(all));
  }
  std::vector<PredictionRecord> records;
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    PredictionRecord r;
    r.true_label = vocab.id_of(true_labels[i]);
    r.pred_label = vocab.id_of(pred_labels[i]);
    if (scores) r.score = (*scores)[i];
    if (attributes) r.attributes = (*attributes)[i];
    records.push_back(std::move(r));
  }
  return PredictionSet(name, std::move(vocab), std::move(records));
}

std::string compare_json(const PredictionSet& base_set, const PredictionSet& alt_set,
                         const std::string& policy_text, bool normalize,
                         const std::string& random_mode, std::uint64_t seed,
                         std::optional<std::uint64_t> draws) {
  const auto policy = DegeneratePolicy::parse(policy_text);
  auto sets = align_vocabularies({base_set, alt_set});
  const auto base = build_profile(sets[0]);
  const auto alt = build_profile(sets[1]);
  auto scores = compare_profiles(base, alt, policy);
  if (normalize) {
    const auto random = random_profile(
        base.vocabulary, base, make_random_mode(random_mode, seed, draws, sets[0].size()));
    scores = normalize_scores(scores, base, random, policy);
  }
  auto doc = to_json(scores, base.vocabulary);
  doc["base_top1"] = base.top1;
  doc["alt_top1"] = alt.top1;
  doc["policy"] = policy.to_string();
  return doc.dump();
}

std::string deltas_json(const PredictionSet& base_set, const PredictionSet& alt_set,
                        const std::string& policy) {
  auto sets = align_vocabularies({base_set, alt_set});
  return to_json(compute_deltas(build_profile(sets[0]), build_profile(sets[1]),
                                DegeneratePolicy::parse(policy)))
      .dump();
}

std::string matrix_json(const std::vector<PredictionSet>& models, const std::string& metric_text,
                        const std::string& policy, const std::string& sort,
                        const std::string& random_mode, std::uint64_t seed,
                        std::optional<std::uint64_t> draws) {
  const auto metric = parse_matrix_metric(metric_text);
  const auto sort_key = parse_sort_key(sort);
  auto sets = align_vocabularies(models);
  if (metric == MatrixMetric::cie_count) {
    std::vector<NamedPopulation> pops;
    for (auto& s : sets) pops.push_back({s.model_name(), {s}});
    return to_json(build_cie_matrix(pops, sort_key)).dump();
  }
  std::vector<ClassErrorProfile> profiles;
  for (const auto& s : sets) profiles.push_back(build_profile(s));
  std::optional<ClassErrorProfile> random;
  if (metric == MatrixMetric::cev_normalized || metric == MatrixMetric::sde_normalized) {
    random = random_profile(profiles.front().vocabulary, profiles.front(),
                            make_random_mode(random_mode, seed, draws, sets.front().size()));
  }
  return to_json(build_matrix(profiles, metric, DegeneratePolicy::parse(policy), random, sort_key))
      .dump();
}

py::dict cie_result(const std::vector<PredictionSet>& base_pop,
                    const std::vector<PredictionSet>& alt_pop) {
  std::vector<PredictionSet> all(base_pop);
  all.insert(all.end(), alt_pop.begin(), alt_pop.end());
  auto sets = align_vocabularies(all);
  std::vector<PredictionSet> base(sets.begin(), sets.begin() + static_cast<long>(base_pop.size()));
  std::vector<PredictionSet> alt(sets.begin() + static_cast<long>(base_pop.size()), sets.end());
  const auto b = modal_labels(base, "base");
  const auto a = modal_labels(alt, "alt");
  py::dict out;
  out["instances"] = b.size();
  out["cie_count"] = count_cies(b, a);
  out["base_ties"] = b.tie_count();
  out["alt_ties"] = a.tie_count();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Class-wise bias and group-fairness metrics for classifier predictions";

  auto error = py::register_exception<Error>(m, "Error", PyExc_Exception);
  auto input = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  auto degenerate = py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_ArithmeticError);
  (void)error;
  (void)input;
  (void)degenerate;

  py::class_<PredictionSet>(m, "PredictionSet")
      .def_property_readonly("model_name", &PredictionSet::model_name)
      .def_property_readonly("labels",
                             [](const PredictionSet& s) { return s.vocabulary().labels(); })
      .def("__len__", &PredictionSet::size)
      .def("__repr__", [](const PredictionSet& s) {
        return "<PredictionSet '" + s.model_name() + "': " + std::to_string(s.size()) +
               " records, " + std::to_string(s.vocabulary().size()) + " classes>";
      });

  m.def(
      "load_predictions",
      [](const std::filesystem::path& path, std::optional<std::string> model_name,
         const std::string& true_col, const std::string& pred_col, const std::string& score_col,
         const std::string& id_col) {
        ParseOptions opts;
        opts.true_col = true_col;
        opts.pred_col = pred_col;
        opts.score_col = score_col;
        opts.id_col = id_col;
        opts.model_name = std::move(model_name);
        return parse_prediction_file(path, format_from_path(path), opts);
      },
      py::arg("path"), py::arg("model_name") = py::none(), py::arg("true_col") = "true_label",
      py::arg("pred_col") = "pred_label", py::arg("score_col") = "score",
      py::arg("id_col") = "instance_id");
  m.def("predictions_from_lists", &from_lists, py::arg("model_name"), py::arg("true_labels"),
        py::arg("pred_labels"), py::arg("scores") = py::none(),
        py::arg("attributes") = py::none(), py::arg("labels") = py::none());

  m.def(
      "_profile_json", [](const PredictionSet& s) { return to_json(build_profile(s)).dump(); },
      py::arg("predictions"));
  m.def("_compare_json", &compare_json, py::arg("base"), py::arg("alt"),
        py::arg("policy") = "exclude", py::arg("normalize") = true,
        py::arg("random_mode") = "analytic", py::arg("seed") = 0,
        py::arg("draws") = py::none());
  m.def("_deltas_json", &deltas_json, py::arg("base"), py::arg("alt"),
        py::arg("policy") = "exclude");
  m.def("_matrix_json", &matrix_json, py::arg("models"), py::arg("metric") = "cev",
        py::arg("policy") = "exclude", py::arg("sort") = "top1",
        py::arg("random_mode") = "analytic", py::arg("seed") = 0,
        py::arg("draws") = py::none());
  m.def(
      "_group_fairness_json",
      [](const PredictionSet& s, const std::string& group, const std::string& policy) {
        return to_json(group_fairness(s, GroupSpec::parse(group), DegeneratePolicy::parse(policy)),
                       s.vocabulary())
            .dump();
      },
      py::arg("predictions"), py::arg("group"), py::arg("policy") = "exclude");
  m.def(
      "_binary_fairness_json",
      [](const PredictionSet& s, const std::string& attribute, const std::string& policy,
         std::optional<std::string> positive_label, bool require_scores) {
        BinaryFairnessOptions opts{std::move(positive_label), require_scores};
        return to_json(binary_fairness(s, attribute, DegeneratePolicy::parse(policy), opts)).dump();
      },
      py::arg("predictions"), py::arg("attribute"), py::arg("policy") = "exclude",
      py::arg("positive_label") = py::none(), py::arg("require_scores") = false);
  m.def("cie", &cie_result, py::arg("base_population"), py::arg("alt_population"));
}
