#pragma once

// CSV/JSON ingestion of datasets and serialization of results.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpva/common.hpp"
#include "gpva/corrkit.hpp"
#include "gpva/pva.hpp"
#include "gpva/simgen.hpp"

namespace gpva {

using json = nlohmann::json;

enum class SchemaSource { Declared, Inferred };

struct Schema {
  std::vector<VariableKind> kinds;
  SchemaSource source = SchemaSource::Inferred;

  std::size_t size() const { return kinds.size(); }
  bool operator==(const Schema &) const = default;
};

struct Dataset {
  Matrix values; // n x p
  std::vector<std::string> names;
  Schema schema;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
  bool has_ordinal() const {
    return std::any_of(schema.kinds.begin(), schema.kinds.end(), [](const VariableKind &k) { return k.is_ordinal(); });
  }
};

enum class Format { Csv, Json };

/// Input or output failure, carrying the offending path.
class IoError : public std::runtime_error {
public:
  IoError(const std::string &path, const std::string &what) : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string &path() const noexcept { return path_; }

private:
  std::string path_;
};

/// Decimal text that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV primitives

/// RFC-4180 records: quoted fields, doubled quotes, CRLF or LF line ends.
inline std::vector<std::vector<std::string>> parse_csv_records(std::istream &in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  char ch;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
    case '"':
      if (!field_started && field.empty()) in_quotes = true;
      else field.push_back(ch);
      field_started = true;
      break;
    case ',': end_field(); break;
    case '\r':
      if (in.peek() == '\n') in.get(ch);
      end_record();
      break;
    case '\n': end_record(); break;
    default:
      field.push_back(ch);
      field_started = true;
    }
  }
  if (in_quotes) throw std::runtime_error("unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();
  return records;
}

inline std::string csv_escape(const std::string &s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  return out + "\"";
}

inline std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(const std::string &text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  const char *first = t.data();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

inline bool is_integer_value(double v) { return std::isfinite(v) && v == std::floor(v); }

// ---------------------------------------------------------------------------
// Schema inference and validation

/// Ordinal iff every value is an integer and the distinct count is in
/// [2, max_levels]; everything else is continuous. Constant columns are rejected.
inline Schema infer_schema(const Matrix &data, int max_levels = 10) {
  Schema schema;
  schema.source = SchemaSource::Inferred;
  for (Index j = 0; j < data.cols(); ++j) {
    std::set<double> distinct;
    bool integral = true;
    for (Index i = 0; i < data.rows(); ++i) {
      const double v = data(i, j);
      if (!std::isfinite(v)) throw ColumnError(j, "missing or non-finite value at row " + std::to_string(i + 1));
      integral = integral && is_integer_value(v);
      if (distinct.size() <= static_cast<std::size_t>(max_levels) + 1) distinct.insert(v);
    }
    if (distinct.size() < 2) throw ColumnError(j, "constant column");
    const int levels = static_cast<int>(distinct.size());
    if (integral && levels <= max_levels) schema.kinds.push_back(VariableKind::ordinal(levels));
    else schema.kinds.push_back(VariableKind::continuous());
  }
  return schema;
}

/// Checks a declared schema against the data; never coerces.
inline void validate_schema(const Matrix &data, const Schema &schema, const std::vector<std::string> &names) {
  if (static_cast<Index>(schema.kinds.size()) != data.cols())
    throw std::invalid_argument("schema has " + std::to_string(schema.kinds.size()) + " entries but data has " +
                                std::to_string(data.cols()) + " columns");
  for (Index j = 0; j < data.cols(); ++j) {
    const auto &kind = schema.kinds[static_cast<std::size_t>(j)];
    const std::string &name = names[static_cast<std::size_t>(j)];
    std::set<double> distinct;
    for (Index i = 0; i < data.rows(); ++i) {
      const double v = data(i, j);
      if (kind.is_ordinal() && !is_integer_value(v))
        throw std::invalid_argument("column '" + name + "' is declared ordinal but row " + std::to_string(i + 1) +
                                    " holds non-integer value " + format_double(v));
      distinct.insert(v);
    }
    if (kind.is_ordinal()) {
      if (distinct.size() < 2)
        throw std::invalid_argument("column '" + name + "' is declared ordinal but has fewer than 2 distinct levels");
      if (distinct.size() > static_cast<std::size_t>(kind.levels()))
        throw std::invalid_argument("column '" + name + "' is declared ordinal with " + std::to_string(kind.levels()) +
                                    " levels but has " + std::to_string(distinct.size()) + " distinct values");
    }
  }
}

inline std::string kind_to_string(const VariableKind &k) {
  return k.is_ordinal() ? "ordinal:" + std::to_string(k.levels()) : std::string("continuous");
}

inline VariableKind kind_from_string(const std::string &text) {
  const std::string s = trim(text);
  if (s == "continuous") return VariableKind::continuous();
  if (s.rfind("ordinal:", 0) == 0) {
    const auto v = parse_double(s.substr(8));
    if (!v || !is_integer_value(*v) || *v < 2) throw std::invalid_argument("bad ordinal level count in '" + s + "'");
    return VariableKind::ordinal(static_cast<int>(*v));
  }
  throw std::invalid_argument("unknown variable kind '" + s + "' (expected continuous or ordinal:LEVELS)");
}

/// Two-column schema file (name, kind[:levels]) resolved against column names.
inline Schema read_schema_csv(std::istream &in, const std::vector<std::string> &names, const std::string &source = "schema") {
  const auto records = parse_csv_records(in);
  std::map<std::string, VariableKind> declared;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto &rec = records[r];
    if (rec.size() != 2) throw IoError(source, "schema line " + std::to_string(r + 1) + " must have 2 fields");
    const std::string name = trim(rec[0]);
    if (r == 0 && name == "name" && trim(rec[1]) == "kind") continue;
    if (!declared.emplace(name, kind_from_string(rec[1])).second)
      throw IoError(source, "column '" + name + "' declared twice");
  }
  Schema schema;
  schema.source = SchemaSource::Declared;
  for (const auto &name : names) {
    const auto it = declared.find(name);
    if (it == declared.end()) throw IoError(source, "no kind declared for column '" + name + "'");
    schema.kinds.push_back(it->second);
  }
  if (declared.size() != names.size()) throw IoError(source, "schema declares columns not present in the data");
  return schema;
}

inline Schema load_schema_csv(const std::string &path, const std::vector<std::string> &names) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open schema file");
  return read_schema_csv(in, names, path);
}

inline void write_schema_csv(std::ostream &out, const Dataset &ds) {
  out << "name,kind\n";
  for (std::size_t j = 0; j < ds.names.size(); ++j)
    out << csv_escape(ds.names[j]) << ',' << kind_to_string(ds.schema.kinds[j]) << '\n';
}

// ---------------------------------------------------------------------------
// Dataset CSV

inline Dataset read_csv(std::istream &in, const std::optional<Schema> &schema = std::nullopt, int max_levels = 10,
                        const std::string &source = "input") {
  std::vector<std::vector<std::string>> records;
  try {
    records = parse_csv_records(in);
  } catch (const std::exception &e) {
    throw IoError(source, e.what());
  }
  if (records.empty()) throw IoError(source, "empty file (a header row is required)");

  Dataset ds;
  for (const auto &h : records[0]) ds.names.push_back(trim(h));
  const std::size_t p = ds.names.size();
  std::set<std::string> unique(ds.names.begin(), ds.names.end());
  if (unique.size() != p) throw IoError(source, "duplicate column names in header");
  for (const auto &name : ds.names)
    if (name.empty()) throw IoError(source, "empty column name in header");

  const std::size_t n = records.size() - 1;
  ds.values.resize(static_cast<Index>(n), static_cast<Index>(p));
  for (std::size_t r = 0; r < n; ++r) {
    const auto &rec = records[r + 1];
    if (rec.size() != p)
      throw IoError(source, "row " + std::to_string(r + 1) + " has " + std::to_string(rec.size()) + " fields, expected " +
                                std::to_string(p));
    for (std::size_t j = 0; j < p; ++j) {
      if (trim(rec[j]).empty())
        throw IoError(source, "missing value at row " + std::to_string(r + 1) + ", column " + ds.names[j] +
                                  " (imputation is out of scope; supply complete data)");
      const auto v = parse_double(rec[j]);
      if (!v || !std::isfinite(*v))
        throw IoError(source, "non-numeric value '" + rec[j] + "' at row " + std::to_string(r + 1) + ", column " + ds.names[j]);
      ds.values(static_cast<Index>(r), static_cast<Index>(j)) = *v;
    }
  }

  try {
    if (schema) {
      validate_schema(ds.values, *schema, ds.names);
      ds.schema = *schema;
      ds.schema.source = SchemaSource::Declared;
    } else {
      ds.schema = infer_schema(ds.values, max_levels);
    }
  } catch (const ColumnError &e) {
    throw IoError(source, "column " + ds.names[static_cast<std::size_t>(e.column())] + ": " + e.reason());
  } catch (const std::invalid_argument &e) {
    throw IoError(source, e.what());
  }
  return ds;
}

/// Loads a dataset; a declared schema is validated, otherwise one is inferred.
inline Dataset load_csv(const std::string &path, const std::optional<Schema> &schema = std::nullopt, int max_levels = 10) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open input file");
  return read_csv(in, schema, max_levels, path);
}

inline void write_csv(std::ostream &out, const Dataset &ds) {
  for (std::size_t j = 0; j < ds.names.size(); ++j) out << (j ? "," : "") << csv_escape(ds.names[j]);
  out << '\n';
  for (Index i = 0; i < ds.rows(); ++i) {
    for (Index j = 0; j < ds.cols(); ++j) out << (j ? "," : "") << format_double(ds.values(i, j));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON

inline json schema_to_json(const Schema &s) {
  json kinds = json::array();
  for (const auto &k : s.kinds) {
    json entry{{"kind", k.is_ordinal() ? "ordinal" : "continuous"}};
    if (k.is_ordinal()) entry["levels"] = k.levels();
    kinds.push_back(entry);
  }
  return kinds;
}

inline Schema schema_from_json(const json &j, SchemaSource source) {
  Schema s;
  s.source = source;
  for (const auto &entry : j) {
    const auto kind = entry.at("kind").get<std::string>();
    if (kind == "ordinal") s.kinds.push_back(VariableKind::ordinal(entry.at("levels").get<int>()));
    else if (kind == "continuous") s.kinds.push_back(VariableKind::continuous());
    else throw std::invalid_argument("unknown kind '" + kind + "' in JSON schema");
  }
  return s;
}

inline json dataset_to_json(const Dataset &ds) {
  json rows = json::array();
  for (Index i = 0; i < ds.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < ds.cols(); ++j) row.push_back(ds.values(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"names", ds.names},
              {"schema", schema_to_json(ds.schema)},
              {"schema_source", ds.schema.source == SchemaSource::Declared ? "declared" : "inferred"},
              {"rows", rows}};
}

inline Dataset dataset_from_json(const json &j) {
  Dataset ds;
  ds.names = j.at("names").get<std::vector<std::string>>();
  const auto source = j.value("schema_source", std::string("declared")) == "inferred" ? SchemaSource::Inferred
                                                                                      : SchemaSource::Declared;
  ds.schema = schema_from_json(j.at("schema"), source);
  const auto &rows = j.at("rows");
  ds.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(ds.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != ds.names.size()) throw std::invalid_argument("JSON row width does not match names");
    for (std::size_t k = 0; k < ds.names.size(); ++k) ds.values(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k].get<double>();
  }
  validate_schema(ds.values, ds.schema, ds.names);
  return ds;
}

// ---------------------------------------------------------------------------
// Selection reports

inline std::string column_name(const std::vector<std::string> &names, Index j) {
  return j >= 0 && static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)] : "V" + std::to_string(j);
}

inline json selection_to_json(const SelectionResult &r, const std::vector<std::string> &names) {
  json records = json::array();
  for (std::size_t k = 0; k < r.chosen.size(); ++k)
    records.push_back({{"rank", k + 1},
                       {"index", r.chosen[k]},
                       {"name", column_name(names, r.chosen[k])},
                       {"residual_trace", r.residual_trace[k + 1]}});
  json out{{"method", r.method ? std::string(to_string(*r.method)) : std::string()},
           {"family", r.family.name()},
           {"family_param", r.family.parameter()},
           {"repaired_input", r.repaired_input},
           {"initial_trace", r.residual_trace.empty() ? 0.0 : r.residual_trace.front()},
           {"trace_convention", "iterated"},
           {"records", records}};
  return out;
}

inline SelectionResult selection_from_json(const json &j) {
  SelectionResult r;
  const auto method = j.at("method").get<std::string>();
  if (!method.empty()) r.method = parse_corr_family(method);
  const auto family = j.at("family").get<std::string>();
  const double param = j.at("family_param").get<double>();
  if (family == "gaussian") r.family = LatentFamily::gaussian();
  else if (family == "student_t") r.family = LatentFamily::student_t(param);
  else r.family = LatentFamily::laplace(param);
  r.repaired_input = j.at("repaired_input").get<bool>();
  r.residual_trace.push_back(j.at("initial_trace").get<double>());
  for (const auto &rec : j.at("records")) {
    r.chosen.push_back(rec.at("index").get<Index>());
    r.residual_trace.push_back(rec.at("residual_trace").get<double>());
  }
  return r;
}

inline void write_selection(std::ostream &out, const SelectionResult &r, const std::vector<std::string> &names, Format format) {
  if (format == Format::Json) {
    out << selection_to_json(r, names).dump(2) << '\n';
    return;
  }
  out << "rank,index,name,residual_trace\n";
  for (std::size_t k = 0; k < r.chosen.size(); ++k)
    out << k + 1 << ',' << r.chosen[k] << ',' << csv_escape(column_name(names, r.chosen[k])) << ','
        << format_double(r.residual_trace[k + 1]) << '\n';
}

/// Side-by-side rankings: one row per variable picked by any method (in order
/// of first appearance), one column per method, blank where unranked.
inline void write_rank_table(std::ostream &out, const std::vector<std::pair<CorrFamily, SelectionResult>> &results,
                             const std::vector<std::string> &names, Format format) {
  std::vector<Index> rows;
  for (const auto &[m, r] : results)
    for (Index j : r.chosen)
      if (std::find(rows.begin(), rows.end(), j) == rows.end()) rows.push_back(j);
  auto rank_of = [](const SelectionResult &r, Index j) -> int {
    const auto it = std::find(r.chosen.begin(), r.chosen.end(), j);
    return it == r.chosen.end() ? 0 : static_cast<int>(it - r.chosen.begin()) + 1;
  };
  if (format == Format::Json) {
    json records = json::array();
    for (Index j : rows) {
      json rec{{"variable", column_name(names, j)}, {"index", j}};
      for (const auto &[m, r] : results) {
        const int k = rank_of(r, j);
        rec[std::string(to_string(m))] = k ? json(k) : json(nullptr);
      }
      records.push_back(rec);
    }
    out << json{{"records", records}}.dump(2) << '\n';
    return;
  }
  out << "variable";
  for (const auto &[m, r] : results) out << ',' << to_string(m);
  out << '\n';
  for (Index j : rows) {
    out << csv_escape(column_name(names, j));
    for (const auto &[m, r] : results) {
      const int k = rank_of(r, j);
      out << ',';
      if (k) out << k;
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Scenario results (tidy layout)

inline const std::vector<std::string> &tidy_columns() {
  static const std::vector<std::string> cols{"figure", "latent", "latent_param", "transform", "targets",
                                             "n",      "p",      "q",            "method",    "metric",
                                             "mean",   "stderr", "replicates",   "excluded"};
  return cols;
}

inline json tidy_to_json(const TidyRecord &t) {
  return json{{"figure", t.figure},   {"latent", t.latent},         {"latent_param", t.latent_param},
              {"transform", t.transform}, {"targets", t.targets},   {"n", t.n},
              {"p", t.p},             {"q", t.q},                   {"method", t.method},
              {"metric", t.metric},   {"mean", t.mean},             {"stderr", t.stderr_value},
              {"replicates", t.replicates}, {"excluded", t.excluded}};
}

inline TidyRecord tidy_from_json(const json &j) {
  TidyRecord t;
  t.figure = j.at("figure").get<std::string>();
  t.latent = j.at("latent").get<std::string>();
  t.latent_param = j.at("latent_param").get<double>();
  t.transform = j.at("transform").get<std::string>();
  t.targets = j.at("targets").get<std::string>();
  t.n = j.at("n").get<Index>();
  t.p = j.at("p").get<Index>();
  t.q = j.at("q").get<Index>();
  t.method = j.at("method").get<std::string>();
  t.metric = j.at("metric").get<std::string>();
  t.mean = j.at("mean").get<double>();
  t.stderr_value = j.at("stderr").get<double>();
  t.replicates = j.at("replicates").get<int>();
  t.excluded = j.at("excluded").get<int>();
  return t;
}

inline void write_tidy_header(std::ostream &out) {
  const auto &cols = tidy_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
}

inline void write_tidy_row(std::ostream &out, const TidyRecord &t) {
  out << csv_escape(t.figure) << ',' << t.latent << ',' << format_double(t.latent_param) << ',' << t.transform << ','
      << t.targets << ',' << t.n << ',' << t.p << ',' << t.q << ',' << t.method << ',' << t.metric << ','
      << format_double(t.mean) << ',' << format_double(t.stderr_value) << ',' << t.replicates << ',' << t.excluded << '\n';
}

inline void write_tidy(std::ostream &out, const std::vector<TidyRecord> &rows, Format format) {
  if (format == Format::Json) {
    json records = json::array();
    for (const auto &t : rows) records.push_back(tidy_to_json(t));
    out << json{{"records", records}}.dump(2) << '\n';
    return;
  }
  write_tidy_header(out);
  for (const auto &t : rows) write_tidy_row(out, t);
}

inline std::vector<TidyRecord> read_tidy_json(std::istream &in) {
  const json j = json::parse(in);
  std::vector<TidyRecord> rows;
  for (const auto &rec : j.at("records")) rows.push_back(tidy_from_json(rec));
  return rows;
}

inline std::vector<TidyRecord> read_tidy_csv(std::istream &in) {
  const auto records = parse_csv_records(in);
  if (records.empty() || records[0] != tidy_columns()) throw std::invalid_argument("not a tidy result table");
  std::vector<TidyRecord> rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto &f = records[r];
    if (f.size() != tidy_columns().size()) throw std::invalid_argument("tidy row has the wrong width");
    TidyRecord t;
    t.figure = f[0];
    t.latent = f[1];
    t.latent_param = std::stod(f[2]);
    t.transform = f[3];
    t.targets = f[4];
    t.n = std::stoll(f[5]);
    t.p = std::stoll(f[6]);
    t.q = std::stoll(f[7]);
    t.method = f[8];
    t.metric = f[9];
    t.mean = std::stod(f[10]);
    t.stderr_value = std::stod(f[11]);
    t.replicates = std::stoi(f[12]);
    t.excluded = std::stoi(f[13]);
    rows.push_back(std::move(t));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Correlation matrices

inline void write_correlation(std::ostream &out, const CorrelationMatrix &c, const std::vector<std::string> &names,
                              Format format) {
  const Index p = c.size();
  if (format == Format::Json) {
    json rows = json::array();
    for (Index a = 0; a < p; ++a) {
      json row = json::array();
      for (Index b = 0; b < p; ++b) row.push_back(c.values(a, b));
      rows.push_back(std::move(row));
    }
    json boundary = json::array();
    for (const auto &[a, b] : c.boundary_pairs) boundary.push_back({column_name(names, a), column_name(names, b)});
    out << json{{"method", std::string(to_string(c.family))},
                {"repaired", c.repaired},
                {"boundary_pairs", boundary},
                {"names", names},
                {"matrix", rows}}
               .dump(2)
        << '\n';
    return;
  }
  out << "# method=" << to_string(c.family) << " repaired=" << (c.repaired ? "true" : "false") << '\n';
  for (const auto &[a, b] : c.boundary_pairs)
    out << "# boundary " << column_name(names, a) << ' ' << column_name(names, b) << '\n';
  out << "variable";
  for (Index b = 0; b < p; ++b) out << ',' << csv_escape(column_name(names, b));
  out << '\n';
  for (Index a = 0; a < p; ++a) {
    out << csv_escape(column_name(names, a));
    for (Index b = 0; b < p; ++b) out << ',' << format_double(c.values(a, b));
    out << '\n';
  }
}

/// Reads the CSV written by write_correlation ('#' lines skipped, first column
/// holds row names). Returns the column names through `names`.
inline Matrix read_correlation_csv(std::istream &in, std::vector<std::string> &names, const std::string &source = "matrix") {
  std::stringstream body;
  std::string line;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') body << line << '\n';
  const auto records = parse_csv_records(body);
  if (records.size() < 2) throw IoError(source, "correlation file needs a header and at least one row");
  names.assign(records[0].begin() + 1, records[0].end());
  const Index p = static_cast<Index>(names.size());
  if (static_cast<Index>(records.size()) - 1 != p) throw IoError(source, "correlation matrix is not square");
  Matrix m(p, p);
  for (Index a = 0; a < p; ++a) {
    const auto &rec = records[static_cast<std::size_t>(a + 1)];
    if (static_cast<Index>(rec.size()) != p + 1) throw IoError(source, "row " + std::to_string(a + 1) + " has the wrong width");
    for (Index b = 0; b < p; ++b) {
      const auto v = parse_double(rec[static_cast<std::size_t>(b + 1)]);
      if (!v) throw IoError(source, "non-numeric entry at row " + std::to_string(a + 1));
      m(a, b) = *v;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// File-level writers

namespace detail {

template <class Fn>
void write_file(const std::string &path, Fn &&fn) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  fn(out);
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

} // namespace detail

inline void write_results(const SelectionResult &r, const std::vector<std::string> &names, const std::string &path,
                          Format format) {
  detail::write_file(path, [&](std::ostream &out) { write_selection(out, r, names, format); });
}

inline void write_results(const ScenarioResult &r, const std::vector<Metric> &metrics, const std::string &path,
                          Format format, const std::string &figure = "") {
  detail::write_file(path, [&](std::ostream &out) { write_tidy(out, to_tidy(r, metrics, figure), format); });
}

} // namespace gpva
