// classbias: command-line frontend for class-wise bias and group-fairness reports.
//
// Exit status: 0 success, 1 unexpected failure, 2 input/schema error,
// 3 degenerate computation. Reports go to stdout, diagnostics to stderr.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "classbias/bias_metrics.hpp"
#include "classbias/compare.hpp"
#include "classbias/confusion.hpp"
#include "classbias/errors.hpp"
#include "classbias/fairness.hpp"
#include "classbias/ingest.hpp"
#include "classbias/serialize.hpp"

namespace {

using namespace classbias;

enum class OutputFormat { json, csv, table };

struct RunConfig {
  std::string base_path;
  std::string alt_path;
  std::string predictions_path;
  std::vector<std::string> model_paths;
  std::vector<std::string> base_pop;
  std::vector<std::string> alt_pop;

  std::string true_col = "true_label";
  std::string pred_col = "pred_label";
  std::string score_col = "score";
  std::string id_col = "instance_id";

  std::string policy = "exclude";
  bool no_normalize = false;
  std::string random_mode = "analytic";
  std::uint64_t seed = 0;
  std::uint64_t draws = 0;
  std::string format = "json";

  std::string metric = "cev";
  std::string sort = "top1";
  std::vector<std::string> groups;
  std::string attribute;
  std::string value;
  bool negate = false;
  std::string positive_label;
};

OutputFormat parse_format(const std::string& text) {
  if (text == "json") return OutputFormat::json;
  if (text == "csv") return OutputFormat::csv;
  if (text == "table") return OutputFormat::table;
  throw ArgumentError("unknown format '" + text + "'");
}

ParseOptions parse_options(const RunConfig& cfg) {
  ParseOptions opts;
  opts.true_col = cfg.true_col;
  opts.pred_col = cfg.pred_col;
  opts.score_col = cfg.score_col;
  opts.id_col = cfg.id_col;
  return opts;
}

PredictionSet load(const std::string& path, const RunConfig& cfg) {
  return parse_prediction_file(path, format_from_path(path), parse_options(cfg));
}

std::vector<PredictionSet> load_all(const std::vector<std::string>& paths, const RunConfig& cfg) {
  std::vector<PredictionSet> sets;
  for (const auto& p : paths) sets.push_back(load(p, cfg));
  return sets;
}

RandomMode random_mode(const RunConfig& cfg, std::size_t reference_size) {
  if (cfg.random_mode == "analytic") return AnalyticRandom{};
  if (cfg.random_mode == "sampled") {
    return SampledRandom{cfg.seed, cfg.draws ? cfg.draws : reference_size};
  }
  throw ArgumentError("unknown random mode '" + cfg.random_mode + "'");
}

Json random_mode_json(const RunConfig& cfg, std::size_t reference_size) {
  if (cfg.no_normalize) return nullptr;
  if (cfg.random_mode == "analytic") return "analytic";
  return Json{{"mode", "sampled"},
              {"seed", cfg.seed},
              {"draws", cfg.draws ? cfg.draws : reference_size}};
}

void notice_excluded(const std::vector<ExcludedClass>& excluded, const LabelVocabulary& vocab,
                     const std::string& context) {
  if (excluded.empty()) return;
  std::cerr << "classbias: notice: " << excluded.size() << " class(es) excluded from " << context
            << ":";
  for (const auto& e : excluded) {
    std::cerr << " " << vocab.label(e.class_id) << " (" << to_string(e.reason) << ")";
  }
  std::cerr << "\n";
}

std::string excluded_text(const std::vector<ExcludedClass>& excluded, const LabelVocabulary& vocab) {
  std::string out;
  for (const auto& e : excluded) {
    if (!out.empty()) out += ';';
    out += vocab.label(e.class_id) + ":" + std::string(to_string(e.reason));
  }
  return out;
}

void print_json(const Json& doc) { std::cout << doc.dump(2) << "\n"; }

int run_compare(const RunConfig& cfg, OutputFormat format) {
  const auto policy = DegeneratePolicy::parse(cfg.policy);
  auto sets = align_vocabularies({load(cfg.base_path, cfg), load(cfg.alt_path, cfg)});
  const auto base = build_profile(sets[0]);
  const auto alt = build_profile(sets[1]);
  auto scores = compare_profiles(base, alt, policy);
  notice_excluded(scores.excluded, base.vocabulary, base.model_name + " -> " + alt.model_name);
  if (!cfg.no_normalize) {
    const auto random = random_profile(base.vocabulary, base, random_mode(cfg, sets[0].size()));
    scores = normalize_scores(scores, base, random, policy);
  }

  switch (format) {
    case OutputFormat::json: {
      auto doc = to_json(scores, base.vocabulary);
      doc["base_top1"] = base.top1;
      doc["alt_top1"] = alt.top1;
      doc["policy"] = policy.to_string();
      doc["random_baseline"] = random_mode_json(cfg, sets[0].size());
      print_json(doc);
      break;
    }
    case OutputFormat::csv:
      std::cout << csv_line({"base", "alt", "base_top1", "alt_top1", "cev", "sde",
                             "cev_normalized", "sde_normalized", "n_used", "excluded_classes"})
                << csv_line({scores.base_model, scores.alt_model, format_full(base.top1),
                             format_full(alt.top1), format_full(scores.cev),
                             format_full(scores.sde), format_full(scores.cev_normalized),
                             format_full(scores.sde_normalized), std::to_string(scores.n_used),
                             excluded_text(scores.excluded, base.vocabulary)});
      break;
    case OutputFormat::table:
      std::cout << render_table(
          {"base", "alt", "base top1", "alt top1", "CEV", "SDE", "CEV norm", "SDE norm", "classes"},
          {{scores.base_model, scores.alt_model, format_fixed(base.top1), format_fixed(alt.top1),
            format_fixed(scores.cev), format_fixed(scores.sde),
            format_fixed(scores.cev_normalized), format_fixed(scores.sde_normalized),
            std::to_string(scores.n_used)}});
      break;
  }
  return 0;
}

int run_scatter(const RunConfig& cfg, OutputFormat format) {
  const auto policy = DegeneratePolicy::parse(cfg.policy);
  auto sets = align_vocabularies({load(cfg.base_path, cfg), load(cfg.alt_path, cfg)});
  const auto base = build_profile(sets[0]);
  const auto alt = build_profile(sets[1]);
  const auto deltas = compute_deltas(base, alt, policy);
  notice_excluded(deltas.excluded, base.vocabulary, base.model_name + " -> " + alt.model_name);

  switch (format) {
    case OutputFormat::json:
      print_json(to_json(deltas));
      break;
    case OutputFormat::csv:
      std::cout << deltas_to_csv(deltas);
      break;
    case OutputFormat::table: {
      std::vector<std::vector<std::string>> rows;
      for (const auto& row : to_json(deltas)) {
        auto num = [&](const char* key) {
          return row[key].is_null() ? std::string() : format_fixed(row[key].get<double>());
        };
        rows.push_back({row["class"].get<std::string>(), num("delta_fpr"), num("delta_fnr"),
                        row["excluded_reason"].is_null()
                            ? std::string()
                            : row["excluded_reason"].get<std::string>()});
      }
      std::cout << render_table({"class", "dFPR", "dFNR", "excluded"}, rows);
      break;
    }
  }
  return 0;
}

void emit_matrix(const MetricMatrix& matrix, OutputFormat format) {
  switch (format) {
    case OutputFormat::json:
      print_json(to_json(matrix));
      break;
    case OutputFormat::csv:
      std::cout << matrix_to_csv(matrix);
      break;
    case OutputFormat::table: {
      std::vector<std::string> header{"base \\ alt"};
      header.insert(header.end(), matrix.models.begin(), matrix.models.end());
      std::vector<std::vector<std::string>> rows;
      for (std::size_t r = 0; r < matrix.size(); ++r) {
        std::vector<std::string> row{matrix.models[r]};
        for (const auto& v : matrix.values[r]) row.push_back(format_fixed(v));
        rows.push_back(std::move(row));
      }
      std::cout << render_table(header, rows);
      break;
    }
  }
}

int run_matrix(const RunConfig& cfg, OutputFormat format) {
  const auto policy = DegeneratePolicy::parse(cfg.policy);
  const auto metric = parse_matrix_metric(cfg.metric);
  const auto sort_key = parse_sort_key(cfg.sort);
  if (cfg.model_paths.size() < 2) throw ArgumentError("matrix needs at least 2 --models");
  auto sets = align_vocabularies(load_all(cfg.model_paths, cfg));

  if (metric == MatrixMetric::cie_count) {
    std::vector<NamedPopulation> pops;
    for (auto& s : sets) pops.push_back({s.model_name(), {s}});
    emit_matrix(build_cie_matrix(pops, sort_key), format);
    return 0;
  }

  std::vector<ClassErrorProfile> profiles;
  for (const auto& s : sets) profiles.push_back(build_profile(s));
  std::optional<ClassErrorProfile> random;
  if (metric == MatrixMetric::cev_normalized || metric == MatrixMetric::sde_normalized) {
    random = random_profile(profiles.front().vocabulary, profiles.front(),
                            random_mode(cfg, sets.front().size()));
  }
  const auto matrix = build_matrix(profiles, metric, policy, random, sort_key);
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    for (std::size_t c = 0; c < matrix.size(); ++c) {
      if (matrix.reasons[r][c]) {
        std::cerr << "classbias: notice: " << matrix.models[r] << " -> " << matrix.models[c]
                  << ": " << *matrix.reasons[r][c] << "\n";
      }
    }
  }
  emit_matrix(matrix, format);
  return 0;
}

std::vector<GroupSpec> requested_groups(const RunConfig& cfg) {
  std::vector<GroupSpec> groups;
  if (!cfg.attribute.empty()) {
    if (cfg.value.empty()) throw ArgumentError("--attribute needs --value");
    groups.push_back({cfg.attribute, cfg.value, cfg.negate});
  }
  for (const auto& g : cfg.groups) groups.push_back(GroupSpec::parse(g));
  if (groups.empty()) throw ArgumentError("fairness needs --group or --attribute/--value");
  return groups;
}

int run_fairness(const RunConfig& cfg, OutputFormat format) {
  const auto policy = DegeneratePolicy::parse(cfg.policy);
  const auto set = load(cfg.predictions_path, cfg);
  std::vector<GroupFairnessReport> reports;
  for (const auto& g : requested_groups(cfg)) {
    reports.push_back(group_fairness(set, g, policy));
    notice_excluded(reports.back().scores.excluded, set.vocabulary(),
                    "full set -> " + g.to_string());
  }

  switch (format) {
    case OutputFormat::json: {
      Json groups = Json::array();
      for (const auto& r : reports) groups.push_back(to_json(r, set.vocabulary()));
      print_json(Json{{"model", set.model_name()},
                      {"policy", policy.to_string()},
                      {"full_top1", reports.front().full_top1},
                      {"records", set.size()},
                      {"groups", std::move(groups)}});
      break;
    }
    case OutputFormat::csv:
      std::cout << group_reports_to_csv(reports);
      break;
    case OutputFormat::table: {
      std::vector<std::vector<std::string>> rows;
      rows.push_back({"Full Test Set", format_fixed(reports.front().full_top1), "", "", "", ""});
      for (const auto& r : reports) {
        auto pct = [](std::optional<double> v) {
          return v ? format_fixed(*v * 100.0) : std::string();
        };
        rows.push_back({r.group.to_string(), format_fixed(r.top1), format_fixed(r.scores.cev),
                        format_fixed(r.scores.sde), pct(r.aggregate_delta_fpr),
                        pct(r.aggregate_delta_fnr)});
      }
      std::cout << render_table(
          {"Protected Attribute", "Top-1", "CEV", "SDE", "Change in FPR", "Change in FNR"}, rows);
      break;
    }
  }
  return 0;
}

int run_binary_fairness(const RunConfig& cfg, OutputFormat format) {
  const auto policy = DegeneratePolicy::parse(cfg.policy);
  const auto set = load(cfg.predictions_path, cfg);
  if (cfg.attribute.empty()) throw ArgumentError("binary-fairness needs --attribute");
  BinaryFairnessOptions options;
  if (!cfg.positive_label.empty()) options.positive_label = cfg.positive_label;
  const auto report = binary_fairness(set, cfg.attribute, policy, options);

  // CEV/SDE of all -> group for every attribute value, next to the gap metrics.
  struct GroupScores {
    std::string value;
    std::optional<double> cev, sde;
    std::optional<std::string> error;
  };
  std::vector<GroupScores> ours;
  for (const auto& g : report.groups) {
    GroupScores gs{g.value, std::nullopt, std::nullopt, std::nullopt};
    try {
      auto r = group_fairness(set, g, policy);
      gs.cev = r.scores.cev;
      gs.sde = r.scores.sde;
    } catch (const DegenerateError& e) {
      gs.error = e.what();
      std::cerr << "classbias: notice: all -> " << g.to_string() << ": " << e.what() << "\n";
    }
    ours.push_back(std::move(gs));
  }

  switch (format) {
    case OutputFormat::json: {
      auto doc = to_json(report);
      Json groups = Json::array();
      for (const auto& gs : ours) {
        groups.push_back(Json{{"group", cfg.attribute + "=" + gs.value},
                              {"cev", gs.cev ? Json(*gs.cev) : Json(nullptr)},
                              {"sde", gs.sde ? Json(*gs.sde) : Json(nullptr)},
                              {"error", gs.error ? Json(*gs.error) : Json(nullptr)}});
      }
      Json out{{"model", set.model_name()}, {"policy", policy.to_string()}};
      out.update(doc);
      out["cev_sde_all_to_group"] = std::move(groups);
      print_json(out);
      break;
    }
    case OutputFormat::csv:
    case OutputFormat::table: {
      std::vector<std::string> header{"model"};
      std::vector<std::string> row{set.model_name()};
      const bool table = format == OutputFormat::table;
      auto num = [&](std::optional<double> v) { return table ? format_fixed(v) : format_full(v); };
      for (const auto& gs : ours) {
        header.push_back("cev_all_to_" + gs.value);
        row.push_back(num(gs.cev));
      }
      for (const auto& gs : ours) {
        header.push_back("sde_all_to_" + gs.value);
        row.push_back(num(gs.sde));
      }
      for (auto [name, v] : std::vector<std::pair<std::string, std::optional<double>>>{
               {"fped", report.fped}, {"fned", report.fned}, {"dims", report.dims},
               {"diamr", report.diamr}}) {
        header.push_back(name);
        row.push_back(num(v));
      }
      if (table) {
        std::cout << render_table(header, {row});
      } else {
        std::cout << csv_line(header) << csv_line(row);
      }
      break;
    }
  }
  return 0;
}

int run_cie(const RunConfig& cfg, OutputFormat format) {
  if (cfg.base_pop.empty() || cfg.alt_pop.empty()) {
    throw ArgumentError("cie needs --base-pop and --alt-pop files");
  }
  auto all = cfg.base_pop;
  all.insert(all.end(), cfg.alt_pop.begin(), cfg.alt_pop.end());
  auto sets = align_vocabularies(load_all(all, cfg));
  std::vector<PredictionSet> base(sets.begin(), sets.begin() + cfg.base_pop.size());
  std::vector<PredictionSet> alt(sets.begin() + cfg.base_pop.size(), sets.end());
  const auto base_labels = modal_labels(base, "base");
  const auto alt_labels = modal_labels(alt, "alt");
  const auto count = count_cies(base_labels, alt_labels);

  auto names = [](const std::vector<PredictionSet>& pop) {
    std::vector<std::string> out;
    for (const auto& s : pop) out.push_back(s.model_name());
    return out;
  };
  switch (format) {
    case OutputFormat::json:
      print_json(Json{{"base_population", names(base)},
                      {"alt_population", names(alt)},
                      {"instances", base_labels.size()},
                      {"cie_count", count},
                      {"base_ties", base_labels.tie_count()},
                      {"alt_ties", alt_labels.tie_count()}});
      break;
    case OutputFormat::csv:
      std::cout << csv_line({"instances", "cie_count", "base_ties", "alt_ties"})
                << csv_line({std::to_string(base_labels.size()), std::to_string(count),
                             std::to_string(base_labels.tie_count()),
                             std::to_string(alt_labels.tie_count())});
      break;
    case OutputFormat::table:
      std::cout << render_table({"instances", "CIEs", "base ties", "alt ties"},
                                {{std::to_string(base_labels.size()), std::to_string(count),
                                  std::to_string(base_labels.tie_count()),
                                  std::to_string(alt_labels.tie_count())}});
      break;
  }
  return 0;
}

void add_shared_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--true-col", cfg.true_col, "Column holding the true label");
  sub->add_option("--pred-col", cfg.pred_col, "Column holding the predicted label");
  sub->add_option("--score-col", cfg.score_col, "Column holding the positive-class score");
  sub->add_option("--id-col", cfg.id_col, "Column holding the instance id");
  sub->add_option("--policy", cfg.policy, "Zero/undefined base-rate policy: exclude, strict, epsilon=<v>");
  sub->add_flag("--no-normalize", cfg.no_normalize, "Skip random-predictor normalization");
  sub->add_option("--random-mode", cfg.random_mode, "Random baseline: analytic or sampled")
      ->check(CLI::IsMember({"analytic", "sampled"}));
  sub->add_option("--seed", cfg.seed, "Seed for the sampled random baseline");
  sub->add_option("--draws", cfg.draws,
                  "Draws for the sampled random baseline (default: one per test instance)");
  sub->add_option("--format", cfg.format, "Output format: json, csv or table")
      ->check(CLI::IsMember({"json", "csv", "table"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Class-wise bias (CEV/SDE) and group-fairness reports for classifier predictions"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* compare = app.add_subcommand("compare", "CEV/SDE of an alternative model against a base");
  compare->add_option("--base", cfg.base_path, "Base model predictions")->required();
  compare->add_option("--alt", cfg.alt_path, "Alternative model predictions")->required();

  auto* scatter = app.add_subcommand("scatter", "Per-class normalized FPR/FNR changes");
  scatter->add_option("--base", cfg.base_path, "Base model predictions")->required();
  scatter->add_option("--alt", cfg.alt_path, "Alternative model predictions")->required();

  auto* matrix = app.add_subcommand("matrix", "Pairwise metric matrix over several models");
  matrix->add_option("--models", cfg.model_paths, "Prediction files, one per model")->required();
  matrix->add_option("--metric", cfg.metric,
                     "cev, sde, cev_normalized, sde_normalized, delta_top1 or cie_count");
  matrix->add_option("--sort", cfg.sort, "Model order: top1, name or input_order");

  auto* fairness = app.add_subcommand("fairness", "Full test set vs protected-group subsets");
  fairness->add_option("--predictions", cfg.predictions_path, "Prediction file")->required();
  fairness->add_option("--attribute", cfg.attribute, "Protected attribute column");
  fairness->add_option("--value", cfg.value, "Attribute value selecting the group");
  fairness->add_flag("--negate", cfg.negate, "Select records whose attribute differs from --value");
  fairness->add_option("--group", cfg.groups, "Group as attr=value or attr!=value (repeatable)");

  auto* binary = app.add_subcommand("binary-fairness", "FPED/FNED/DIMS/DIAMR for a binary task");
  binary->add_option("--predictions", cfg.predictions_path, "Prediction file")->required();
  binary->add_option("--attribute", cfg.attribute, "Protected attribute column")->required();
  binary->add_option("--positive-label", cfg.positive_label,
                     "Positive class (default: second label in sorted order)");

  auto* cie = app.add_subcommand("cie", "Count instances whose modal labels differ");
  cie->add_option("--base-pop", cfg.base_pop, "Base population prediction files")->required();
  cie->add_option("--alt-pop", cfg.alt_pop, "Alternative population prediction files")->required();

  for (auto* sub : {compare, scatter, matrix, fairness, binary, cie}) add_shared_flags(sub, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto format = parse_format(cfg.format);
    if (compare->parsed()) return run_compare(cfg, format);
    if (scatter->parsed()) return run_scatter(cfg, format);
    if (matrix->parsed()) return run_matrix(cfg, format);
    if (fairness->parsed()) return run_fairness(cfg, format);
    if (binary->parsed()) return run_binary_fairness(cfg, format);
    if (cie->parsed()) return run_cie(cfg, format);
  } catch (const InputError& e) {
    std::cerr << "classbias: error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateError& e) {
    std::cerr << "classbias: error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "classbias: unexpected failure: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
