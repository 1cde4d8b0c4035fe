#include "classbias/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace classbias {

namespace {

Json optional_number(const std::optional<double>& value) {
  if (!value || !std::isfinite(*value)) return nullptr;
  return *value;
}

Json excluded_json(const std::vector<ExcludedClass>& excluded, const LabelVocabulary& vocabulary) {
  Json out = Json::array();
  for (const auto& e : excluded) {
    out.push_back(Json{{"label", vocabulary.label(e.class_id)}, {"reason", to_string(e.reason)}});
  }
  return out;
}

Json confusion_json(const ClassConfusion& c) {
  return Json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

std::optional<double> percent(std::optional<double> ratio) {
  if (!ratio) return std::nullopt;
  return *ratio * 100.0;
}

}  // namespace

Json to_json(const ClassErrorProfile& profile) {
  Json classes = Json::array();
  for (const auto& c : profile.per_class) {
    Json entry{{"label", profile.vocabulary.label(c.class_id)},
               {"fpr", optional_number(c.fpr)},
               {"fnr", optional_number(c.fnr)}};
    for (const char* key : {"tp", "fp", "fn", "tn"}) entry[key] = nullptr;
    if (c.confusion) {
      entry["tp"] = c.confusion->tp;
      entry["fp"] = c.confusion->fp;
      entry["fn"] = c.confusion->fn;
      entry["tn"] = c.confusion->tn;
    }
    classes.push_back(std::move(entry));
  }
  return Json{{"model", profile.model_name}, {"classes", std::move(classes)}, {"top1", profile.top1}};
}

Json to_json(const BiasScores& scores, const LabelVocabulary& vocabulary) {
  return Json{{"base", scores.base_model},
              {"alt", scores.alt_model},
              {"cev", scores.cev},
              {"sde", scores.sde},
              {"cev_normalized", optional_number(scores.cev_normalized)},
              {"sde_normalized", optional_number(scores.sde_normalized)},
              {"excluded_classes", excluded_json(scores.excluded, vocabulary)},
              {"n_used", scores.n_used},
              {"mean_delta_fpr", scores.mean_delta_fpr},
              {"mean_delta_fnr", scores.mean_delta_fnr}};
}

Json to_json(const DeltaProfile& deltas) {
  Json rows = Json::array();
  for (ClassId c = 0; c < deltas.vocabulary.size(); ++c) {
    Json row{{"class", deltas.vocabulary.label(c)},
             {"delta_fpr", nullptr},
             {"delta_fnr", nullptr},
             {"excluded_reason", nullptr}};
    auto it = std::find_if(deltas.per_class.begin(), deltas.per_class.end(),
                           [c](const ClassDelta& d) { return d.class_id == c; });
    if (it != deltas.per_class.end()) {
      row["delta_fpr"] = it->delta_fpr;
      row["delta_fnr"] = it->delta_fnr;
    }
    auto ex = std::find_if(deltas.excluded.begin(), deltas.excluded.end(),
                           [c](const ExcludedClass& e) { return e.class_id == c; });
    if (ex != deltas.excluded.end()) row["excluded_reason"] = to_string(ex->reason);
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const MetricMatrix& matrix) {
  Json values = Json::array();
  Json reasons = Json::array();
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    Json value_row = Json::array();
    Json reason_row = Json::array();
    for (std::size_t c = 0; c < matrix.size(); ++c) {
      value_row.push_back(optional_number(matrix.values[r][c]));
      reason_row.push_back(matrix.reasons[r][c] ? Json(*matrix.reasons[r][c]) : Json(nullptr));
    }
    values.push_back(std::move(value_row));
    reasons.push_back(std::move(reason_row));
  }
  const bool normalized = matrix.metric == MatrixMetric::cev_normalized ||
                          matrix.metric == MatrixMetric::sde_normalized;
  return Json{{"metric", to_string(matrix.metric)},
              {"sort_key", to_string(matrix.sort_key)},
              {"normalization", normalized ? Json("row_model_vs_random") : Json(nullptr)},
              {"orientation", "row=base,column=alt"},
              {"models", matrix.models},
              {"values", std::move(values)},
              {"reasons", std::move(reasons)}};
}

Json to_json(const GroupFairnessReport& report, const LabelVocabulary& vocabulary) {
  return Json{{"group", report.group.to_string()},
              {"attribute", report.group.attribute},
              {"value", report.group.value},
              {"negated", report.group.negated},
              {"subset_size", report.subset_size},
              {"top1", report.top1},
              {"full_top1", report.full_top1},
              {"cev", report.scores.cev},
              {"sde", report.scores.sde},
              {"change_fpr", optional_number(report.aggregate_delta_fpr)},
              {"change_fnr", optional_number(report.aggregate_delta_fnr)},
              {"change_fpr_pct", optional_number(percent(report.aggregate_delta_fpr))},
              {"change_fnr_pct", optional_number(percent(report.aggregate_delta_fnr))},
              {"aggregate", "macro_mean_of_class_rates"},
              {"scores", to_json(report.scores, vocabulary)},
              {"full_pooled", confusion_json(report.full_pooled)},
              {"subset_pooled", confusion_json(report.subset_pooled)}};
}

Json to_json(const BinaryFairnessReport& report) {
  Json groups = Json::array();
  for (const auto& g : report.group_rates) {
    groups.push_back(Json{{"value", g.value},
                          {"size", g.size},
                          {"fpr", optional_number(g.fpr)},
                          {"fnr", optional_number(g.fnr)},
                          {"mean_score", optional_number(g.mean_score)},
                          {"mean_residual", optional_number(g.mean_residual)}});
  }
  return Json{{"attribute", report.attribute},
              {"positive_label", report.positive_label},
              {"fped", report.fped},
              {"fned", report.fned},
              {"dims", optional_number(report.dims)},
              {"diamr", optional_number(report.diamr)},
              {"overall_fpr", optional_number(report.overall_fpr)},
              {"overall_fnr", optional_number(report.overall_fnr)},
              {"dims_order", "first_minus_second_lexicographic"},
              {"diamr_residual", "abs(y - score)"},
              {"groups", std::move(groups)},
              {"skipped_groups", report.skipped_groups}};
}

std::string format_fixed(std::optional<double> value, int decimals) {
  if (!value) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, *value);
  std::string s(buf);
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string format_full(std::optional<double> value) {
  if (!value) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), *value);
  return std::string(buf, ptr);
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    const auto& f = fields[i];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out += f;
      continue;
    }
    out += '"';
    for (char ch : f) {
      if (ch == '"') out += '"';
      out += ch;
    }
    out += '"';
  }
  out += '\n';
  return out;
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < cells.size() ? (cells[c].empty() ? "-" : cells[c]) : "-";
      if (c) out += "  ";
      const std::string pad(width[c] - std::min(width[c], cell.size()), ' ');
      out += c == 0 ? cell + pad : pad + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(header);
  for (const auto& row : rows) out += line(row);
  return out;
}

std::string matrix_to_csv(const MetricMatrix& matrix) {
  std::string out = csv_line({"base", "alt", "metric", "value", "reason"});
  const std::string metric(to_string(matrix.metric));
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    for (std::size_t c = 0; c < matrix.size(); ++c) {
      out += csv_line({matrix.models[r], matrix.models[c], metric,
                       format_full(matrix.values[r][c]), matrix.reasons[r][c].value_or("")});
    }
  }
  return out;
}

std::string deltas_to_csv(const DeltaProfile& deltas) {
  std::string out = csv_line({"class", "delta_fpr", "delta_fnr", "excluded_reason"});
  for (const auto& row : to_json(deltas)) {
    out += csv_line({row["class"].get<std::string>(),
                     row["delta_fpr"].is_null() ? "" : format_full(row["delta_fpr"].get<double>()),
                     row["delta_fnr"].is_null() ? "" : format_full(row["delta_fnr"].get<double>()),
                     row["excluded_reason"].is_null() ? ""
                                                      : row["excluded_reason"].get<std::string>()});
  }
  return out;
}

std::string group_reports_to_csv(const std::vector<GroupFairnessReport>& reports) {
  std::string out = csv_line({"group", "top1", "cev", "sde", "change_fpr", "change_fnr"});
  if (!reports.empty()) {
    out += csv_line({"Full Test Set", format_full(reports.front().full_top1), "", "", "", ""});
  }
  for (const auto& r : reports) {
    out += csv_line({r.group.to_string(), format_full(r.top1), format_full(r.scores.cev),
                     format_full(r.scores.sde), format_full(percent(r.aggregate_delta_fpr)),
                     format_full(percent(r.aggregate_delta_fnr))});
  }
  return out;
}

}  // namespace classbias
