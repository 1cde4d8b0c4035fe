#include "classbias/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "classbias/errors.hpp"

namespace classbias {

namespace {

struct RawRow {
  std::optional<std::string> instance_id;
  std::string true_label;
  std::string pred_label;
  std::optional<double> score;
  AttributeMap attributes;
};

std::optional<double> parse_score(const std::string& text, std::size_t row) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ValueError("row " + std::to_string(row) + ": unparseable score '" + text + "'");
  }
  if (value < 0.0 || value > 1.0) {
    throw ValueError("row " + std::to_string(row) + ": score " + text + " outside [0, 1]");
  }
  return value;
}

PredictionSet assemble(std::vector<RawRow> rows, const ParseOptions& options,
                       const std::string& default_name) {
  if (rows.empty()) throw EmptyInputError("no prediction records in input");

  LabelVocabulary vocabulary;
  if (options.vocabulary) {
    vocabulary = *options.vocabulary;
  } else {
    std::vector<std::string> seen;
    seen.reserve(rows.size() * 2);
    for (const auto& row : rows) {
      seen.push_back(row.true_label);
      seen.push_back(row.pred_label);
    }
    vocabulary = LabelVocabulary::from_unsorted(std::move(seen));
  }

  std::vector<PredictionRecord> records;
  records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    auto true_id = vocabulary.find(row.true_label);
    auto pred_id = vocabulary.find(row.pred_label);
    if (!true_id || !pred_id) {
      throw ValueError("row " + std::to_string(i + 1) + ": label '" +
                       (!true_id ? row.true_label : row.pred_label) +
                       "' is not in the supplied vocabulary");
    }
    records.push_back(PredictionRecord{std::move(row.instance_id), *true_id, *pred_id, row.score,
                                       std::move(row.attributes)});
  }
  return PredictionSet(options.model_name.value_or(default_name), std::move(vocabulary),
                       std::move(records));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string json_to_text(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  return value.dump();
}

bool needs_quoting(const std::string& field) {
  return field.find_first_of(",\"\r\n") != std::string::npos;
}

void append_field(std::string& out, const std::string& field) {
  if (!needs_quoting(field)) {
    out += field;
    return;
  }
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

std::string format_score(double score) {
  // Shortest representation that round-trips.
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), score);
  return std::string(buf, ptr);
}

}  // namespace

LabelVocabulary::LabelVocabulary(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) {
    throw SchemaError("a label vocabulary needs at least two classes, got " +
                      std::to_string(labels_.size()));
  }
  for (ClassId i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      throw SchemaError("duplicate class label '" + labels_[i] + "'");
    }
  }
}

LabelVocabulary LabelVocabulary::from_unsorted(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return LabelVocabulary(std::move(labels));
}

std::optional<ClassId> LabelVocabulary::find(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ClassId LabelVocabulary::id_of(const std::string& label) const {
  auto id = find(label);
  if (!id) throw ValueError("unknown class label '" + label + "'");
  return *id;
}

PredictionSet::PredictionSet(std::string model_name, LabelVocabulary vocabulary,
                             std::vector<PredictionRecord> records)
    : model_name_(std::move(model_name)),
      vocabulary_(std::move(vocabulary)),
      records_(std::move(records)) {
  if (records_.empty()) throw EmptyInputError("prediction set '" + model_name_ + "' is empty");
  if (vocabulary_.size() < 2) throw SchemaError("prediction set has no vocabulary");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.true_label >= vocabulary_.size() || r.pred_label >= vocabulary_.size()) {
      throw ValueError("record " + std::to_string(i + 1) + " has a class id outside the vocabulary");
    }
    if (r.score && !(*r.score >= 0.0 && *r.score <= 1.0)) {
      throw ValueError("record " + std::to_string(i + 1) + " has a score outside [0, 1]");
    }
  }
}

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    // A bare line terminator yields one empty field; drop those blank lines.
    if (!(row.size() == 1 && row.front().empty())) rows.push_back(std::move(row));
    row.clear();
  };

  std::size_t i = 0;
  // Skip a UTF-8 byte order mark.
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field += c;
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw SchemaError("unterminated quoted field at end of input");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

PredictionSet parse_prediction_csv(const std::string& text, const ParseOptions& options) {
  auto table = split_csv(text);
  if (table.empty()) throw EmptyInputError("input has no header row");

  const auto& header = table.front();
  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto true_col = column_of(options.true_col);
  if (!true_col) throw SchemaError("missing column '" + options.true_col + "'");
  auto pred_col = column_of(options.pred_col);
  if (!pred_col) throw SchemaError("missing column '" + options.pred_col + "'");
  auto score_col = column_of(options.score_col);
  auto id_col = column_of(options.id_col);

  std::vector<RawRow> rows;
  rows.reserve(table.size() - 1);
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& fields = table[r];
    if (fields.size() != header.size()) {
      throw SchemaError("row " + std::to_string(r) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(fields.size()));
    }
    RawRow row;
    row.true_label = fields[*true_col];
    row.pred_label = fields[*pred_col];
    if (score_col) row.score = parse_score(fields[*score_col], r);
    if (id_col) row.instance_id = fields[*id_col];
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == *true_col || c == *pred_col || (score_col && c == *score_col) ||
          (id_col && c == *id_col)) {
        continue;
      }
      row.attributes[header[c]] = fields[c];
    }
    rows.push_back(std::move(row));
  }
  return assemble(std::move(rows), options, "model");
}

PredictionSet parse_prediction_json(const std::string& text, const ParseOptions& options) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_array()) throw SchemaError("JSON predictions must be an array of objects");
  if (doc.empty()) throw EmptyInputError("no prediction records in input");

  std::vector<RawRow> rows;
  rows.reserve(doc.size());
  std::size_t index = 0;
  for (const auto& item : doc) {
    ++index;
    if (!item.is_object()) {
      throw SchemaError("row " + std::to_string(index) + ": expected a JSON object");
    }
    RawRow row;
    for (const auto* col : {&options.true_col, &options.pred_col}) {
      if (!item.contains(*col) || item[*col].is_null()) {
        throw SchemaError("row " + std::to_string(index) + ": missing column '" + *col + "'");
      }
    }
    row.true_label = json_to_text(item[options.true_col]);
    row.pred_label = json_to_text(item[options.pred_col]);
    for (const auto& [key, value] : item.items()) {
      if (key == options.true_col || key == options.pred_col) continue;
      if (key == options.score_col) {
        if (value.is_null()) continue;
        if (value.is_number()) {
          double v = value.get<double>();
          if (!(v >= 0.0 && v <= 1.0)) {
            throw ValueError("row " + std::to_string(index) + ": score " + value.dump() +
                             " outside [0, 1]");
          }
          row.score = v;
        } else {
          row.score = parse_score(json_to_text(value), index);
        }
      } else if (key == options.id_col) {
        row.instance_id = json_to_text(value);
      } else {
        row.attributes[key] = json_to_text(value);
      }
    }
    rows.push_back(std::move(row));
  }
  return assemble(std::move(rows), options, "model");
}

FileFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".json" ? FileFormat::json : FileFormat::csv;
}

PredictionSet parse_prediction_file(const std::filesystem::path& path, FileFormat format,
                                    const ParseOptions& options) {
  auto text = read_file(path);
  ParseOptions effective = options;
  if (!effective.model_name) effective.model_name = path.stem().string();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw EmptyInputError("'" + path.string() + "' is empty");
  }
  try {
    return format == FileFormat::json ? parse_prediction_json(text, effective)
                                      : parse_prediction_csv(text, effective);
  } catch (const InputError& e) {
    // Re-throw the same category with the file name attached.
    std::string msg = path.string() + ": " + e.what();
    if (dynamic_cast<const EmptyInputError*>(&e)) throw EmptyInputError(msg);
    if (dynamic_cast<const SchemaError*>(&e)) throw SchemaError(msg);
    if (dynamic_cast<const ValueError*>(&e)) throw ValueError(msg);
    throw;
  }
}

std::string write_prediction_csv(const PredictionSet& set, const ParseOptions& options) {
  std::set<std::string> attribute_names;
  bool has_score = false;
  bool has_id = false;
  for (const auto& r : set.records()) {
    for (const auto& [name, value] : r.attributes) attribute_names.insert(name);
    has_score = has_score || r.score.has_value();
    has_id = has_id || r.instance_id.has_value();
  }

  std::string out;
  auto emit_row = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      append_field(out, fields[i]);
    }
    out += '\n';
  };

  std::vector<std::string> header;
  if (has_id) header.push_back(options.id_col);
  header.push_back(options.true_col);
  header.push_back(options.pred_col);
  if (has_score) header.push_back(options.score_col);
  header.insert(header.end(), attribute_names.begin(), attribute_names.end());
  emit_row(header);

  const auto& vocab = set.vocabulary();
  for (const auto& r : set.records()) {
    std::vector<std::string> fields;
    if (has_id) fields.push_back(r.instance_id.value_or(""));
    fields.push_back(vocab.label(r.true_label));
    fields.push_back(vocab.label(r.pred_label));
    if (has_score) fields.push_back(r.score ? format_score(*r.score) : "");
    for (const auto& name : attribute_names) {
      auto it = r.attributes.find(name);
      fields.push_back(it == r.attributes.end() ? "" : it->second);
    }
    emit_row(fields);
  }
  return out;
}

std::vector<PredictionSet> align_vocabularies(const std::vector<PredictionSet>& sets) {
  std::vector<std::string> all;
  for (const auto& s : sets) {
    all.insert(all.end(), s.vocabulary().labels().begin(), s.vocabulary().labels().end());
  }
  auto shared = LabelVocabulary::from_unsorted(std::move(all));

  std::vector<PredictionSet> out;
  out.reserve(sets.size());
  for (const auto& s : sets) {
    std::vector<ClassId> remap(s.vocabulary().size());
    for (ClassId i = 0; i < remap.size(); ++i) remap[i] = shared.id_of(s.vocabulary().label(i));
    auto records = s.records();
    for (auto& r : records) {
      r.true_label = remap[r.true_label];
      r.pred_label = remap[r.pred_label];
    }
    out.emplace_back(s.model_name(), shared, std::move(records));
  }
  return out;
}

}  // namespace classbias
