#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "salix/errors.hpp"
#include "salix/linalg.hpp"

namespace salix {

enum class ColumnKind { Numeric, Categorical, GroupKey, TimeKey, Target };

inline const char* to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::Numeric: return "numeric";
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::GroupKey: return "group-key";
    case ColumnKind::TimeKey: return "time-key";
    case ColumnKind::Target: return "target";
  }
  return "?";
}

inline ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "numeric") return ColumnKind::Numeric;
  if (s == "categorical") return ColumnKind::Categorical;
  if (s == "group-key") return ColumnKind::GroupKey;
  if (s == "time-key") return ColumnKind::TimeKey;
  if (s == "target") return ColumnKind::Target;
  throw ConfigError("unknown column kind '" + s + "'");
}

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::string units;
};

// Numeric-ish kinds store doubles; categorical and group keys store strings.
inline bool stores_numeric(ColumnKind k) {
  return k == ColumnKind::Numeric || k == ColumnKind::TimeKey || k == ColumnKind::Target;
}

struct Column {
  ColumnSpec spec;
  std::vector<double> num;          // valid when stores_numeric(spec.kind)
  std::vector<std::string> str;     // valid otherwise
  std::vector<std::uint8_t> missing;

  std::size_t size() const { return missing.size(); }
};

// Shortest round-trip decimal representation; keeps CSV and JSON exports
// byte-stable across runs.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Immutable-by-convention tabular store: every preprocessing operation
// returns a new Dataset and appends one provenance line.
struct Dataset {
  std::vector<Column> columns;
  std::vector<double> weights;          // per-row, >= 0
  std::vector<std::string> provenance;  // "STEP <name> <k=v ...> <before>-><after>"

  std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t n_cols() const { return columns.size(); }

  int find_column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].spec.name == name) return static_cast<int>(i);
    return -1;
  }

  const Column& column(const std::string& name) const {
    int idx = find_column(name);
    if (idx < 0) throw DataError("no column named '" + name + "'");
    return columns[static_cast<std::size_t>(idx)];
  }

  int target_index() const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].spec.kind == ColumnKind::Target) return static_cast<int>(i);
    return -1;
  }
  int group_key_index() const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].spec.kind == ColumnKind::GroupKey) return static_cast<int>(i);
    return -1;
  }
  int time_key_index() const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].spec.kind == ColumnKind::TimeKey) return static_cast<int>(i);
    return -1;
  }

  std::vector<std::string> numeric_predictor_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns)
      if (c.spec.kind == ColumnKind::Numeric) out.push_back(c.spec.name);
    return out;
  }

  bool has_missing() const {
    for (const auto& c : columns)
      for (auto m : c.missing)
        if (m) return true;
    return false;
  }

  // Feature matrix over the numeric predictor columns, in schema order.
  FeatureMatrix feature_matrix() const {
    FeatureMatrix m;
    m.names = numeric_predictor_names();
    m.n_rows = n_rows();
    m.data.resize(m.n_rows * m.names.size());
    std::size_t j = 0;
    for (const auto& c : columns) {
      if (c.spec.kind != ColumnKind::Numeric) continue;
      for (std::size_t r = 0; r < m.n_rows; ++r) m.at(r, j) = c.num[r];
      ++j;
    }
    return m;
  }

  std::vector<double> target_values() const {
    int t = target_index();
    if (t < 0) throw DataError("dataset has no target column");
    return columns[static_cast<std::size_t>(t)].num;
  }

  std::vector<std::string> group_values() const {
    int g = group_key_index();
    if (g < 0) throw DataError("dataset has no group-key column");
    return columns[static_cast<std::size_t>(g)].str;
  }

  std::vector<double> time_values() const {
    int t = time_key_index();
    if (t < 0) throw DataError("dataset has no time-key column");
    return columns[static_cast<std::size_t>(t)].num;
  }

  Dataset select_rows(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.provenance = provenance;
    out.columns.reserve(columns.size());
    for (const auto& c : columns) {
      Column nc;
      nc.spec = c.spec;
      nc.missing.reserve(rows.size());
      if (stores_numeric(c.spec.kind)) nc.num.reserve(rows.size());
      else nc.str.reserve(rows.size());
      for (std::size_t r : rows) {
        nc.missing.push_back(c.missing[r]);
        if (stores_numeric(c.spec.kind)) nc.num.push_back(c.num[r]);
        else nc.str.push_back(c.str[r]);
      }
      out.columns.push_back(std::move(nc));
    }
    out.weights.reserve(rows.size());
    for (std::size_t r : rows) out.weights.push_back(weights[r]);
    return out;
  }

  void log_step(const std::string& name, const std::string& params, std::size_t rows_before,
                std::size_t rows_after) {
    std::string line = "STEP " + name;
    if (!params.empty()) line += " " + params;
    line += " " + std::to_string(rows_before) + "->" + std::to_string(rows_after);
    provenance.push_back(std::move(line));
  }
};

inline void validate_schema(const std::vector<ColumnSpec>& schema) {
  std::set<std::string> names;
  int n_target = 0, n_group = 0, n_time = 0;
  for (const auto& s : schema) {
    if (!names.insert(s.name).second) throw DataError("duplicate column name '" + s.name + "'");
    if (s.kind == ColumnKind::Target) ++n_target;
    if (s.kind == ColumnKind::GroupKey) ++n_group;
    if (s.kind == ColumnKind::TimeKey) ++n_time;
  }
  if (n_target != 1) throw DataError("schema must declare exactly one target column");
  if (n_group > 1) throw DataError("schema allows at most one group-key column");
  if (n_time > 1) throw DataError("schema allows at most one time-key column");
}

// Schema file: JSON array of {name, kind, units}.
inline std::vector<ColumnSpec> schema_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("schema must be a JSON array");
  std::vector<ColumnSpec> out;
  for (const auto& e : j) {
    ColumnSpec s;
    s.name = e.at("name").get<std::string>();
    s.kind = column_kind_from_string(e.at("kind").get<std::string>());
    if (e.contains("units") && !e["units"].is_null()) s.units = e["units"].get<std::string>();
    out.push_back(std::move(s));
  }
  validate_schema(out);
  return out;
}

inline nlohmann::json schema_to_json(const std::vector<ColumnSpec>& schema) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : schema)
    arr.push_back({{"name", s.name}, {"kind", to_string(s.kind)}, {"units", s.units}});
  return arr;
}

inline std::vector<ColumnSpec> load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("schema '" + path + "' is not valid JSON: " + e.what());
  }
  return schema_from_json(j);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline bool is_missing_marker(const std::string& s) { return s.empty() || s == "NA"; }

inline std::optional<double> parse_double(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') return std::nullopt;
  return v;
}

}  // namespace detail

// UTF-8 CSV, comma-delimited, one header row, '.' decimal separator, empty
// string or "NA" as missing marker. The header must match the schema names
// in order; unparseable numeric cells become missing markers.
inline Dataset load_csv(const std::string& path, const std::vector<ColumnSpec>& schema) {
  validate_schema(schema);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV file '" + path + "' is empty");
  const auto header = detail::split_csv_line(line);
  if (header.size() != schema.size()) {
    throw DataError("CSV header has " + std::to_string(header.size()) + " columns, schema has " +
                    std::to_string(schema.size()));
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (header[i] != schema[i].name)
      throw DataError("CSV header mismatch at column " + std::to_string(i + 1) + ": got '" +
                      header[i] + "', schema says '" + schema[i].name + "'");
  }

  Dataset ds;
  ds.columns.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) ds.columns[i].spec = schema[i];

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.eof()) break;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != schema.size())
      throw DataError("CSV row " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(schema.size()));
    for (std::size_t i = 0; i < schema.size(); ++i) {
      Column& col = ds.columns[i];
      const std::string& f = fields[i];
      if (stores_numeric(col.spec.kind)) {
        if (detail::is_missing_marker(f)) {
          col.num.push_back(std::numeric_limits<double>::quiet_NaN());
          col.missing.push_back(1);
        } else if (auto v = detail::parse_double(f)) {
          col.num.push_back(*v);
          col.missing.push_back(0);
        } else {
          col.num.push_back(std::numeric_limits<double>::quiet_NaN());
          col.missing.push_back(1);
        }
      } else {
        if (detail::is_missing_marker(f)) {
          col.str.emplace_back();
          col.missing.push_back(1);
        } else {
          col.str.push_back(f);
          col.missing.push_back(0);
        }
      }
    }
  }
  ds.weights.assign(ds.n_rows(), 1.0);
  ds.log_step("load_csv", "path=" + path, 0, ds.n_rows());
  return ds;
}

inline void write_csv(const Dataset& ds, std::ostream& out) {
  for (std::size_t i = 0; i < ds.columns.size(); ++i) {
    if (i) out << ',';
    out << ds.columns[i].spec.name;
  }
  out << '\n';
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    for (std::size_t i = 0; i < ds.columns.size(); ++i) {
      if (i) out << ',';
      const Column& c = ds.columns[i];
      if (c.missing[r]) {
        out << "NA";
      } else if (stores_numeric(c.spec.kind)) {
        out << format_double(c.num[r]);
      } else {
        out << c.str[r];
      }
    }
    out << '\n';
  }
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write CSV file '" + path + "'");
  write_csv(ds, out);
}

inline std::vector<ColumnSpec> dataset_schema(const Dataset& ds) {
  std::vector<ColumnSpec> out;
  out.reserve(ds.columns.size());
  for (const auto& c : ds.columns) out.push_back(c.spec);
  return out;
}

// Sidecar for intermediate pipeline stages: schema + weights + provenance.
inline nlohmann::json dataset_meta_to_json(const Dataset& ds) {
  nlohmann::json j;
  j["version"] = 1;
  j["schema"] = schema_to_json(dataset_schema(ds));
  j["weights"] = ds.weights;
  j["provenance"] = ds.provenance;
  return j;
}

inline void save_dataset(const Dataset& ds, const std::string& csv_path,
                         const std::string& meta_path) {
  save_csv(ds, csv_path);
  std::ofstream out(meta_path, std::ios::binary);
  if (!out) throw DataError("cannot write meta file '" + meta_path + "'");
  out << dataset_meta_to_json(ds).dump(2) << '\n';
}

inline Dataset load_dataset(const std::string& csv_path, const std::string& meta_path) {
  std::ifstream in(meta_path);
  if (!in) throw DataError("cannot open meta file '" + meta_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("meta '" + meta_path + "' is not valid JSON: " + e.what());
  }
  auto schema = schema_from_json(j.at("schema"));
  Dataset ds = load_csv(csv_path, schema);
  auto weights = j.at("weights").get<std::vector<double>>();
  if (weights.size() != ds.n_rows())
    throw DataError("meta weights length does not match CSV row count");
  ds.weights = std::move(weights);
  ds.provenance = j.at("provenance").get<std::vector<std::string>>();
  return ds;
}

// Train/validation row split. Invariant: disjoint, union = all rows, and
// within each group every validation year >= every train year.
struct SplitPlan {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::string rule;

  nlohmann::json to_json() const {
    return {{"train", train}, {"valid", valid}, {"rule", rule}};
  }
  static SplitPlan from_json(const nlohmann::json& j) {
    SplitPlan p;
    p.train = j.at("train").get<std::vector<std::size_t>>();
    p.valid = j.at("valid").get<std::vector<std::size_t>>();
    p.rule = j.at("rule").get<std::string>();
    return p;
  }
};

}  // namespace salix
