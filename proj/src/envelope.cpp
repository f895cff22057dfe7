#include "weakmzi/envelope.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace weakmzi {

namespace {

using Json = nlohmann::ordered_json;

double parse_real(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  return v;
}

std::int64_t parse_integer(const std::string& s) {
  std::size_t used = 0;
  const long long v = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

ColumnType parse_column_type(std::string_view t) {
  if (t == "real") return ColumnType::Real;
  if (t == "integer") return ColumnType::Integer;
  if (t == "text") return ColumnType::Text;
  throw std::invalid_argument("unknown column type '" + std::string(t) + "'");
}

bool cell_type_ok(const Cell& c, ColumnType t) {
  switch (t) {
    case ColumnType::Real:
      return std::holds_alternative<double>(c);
    case ColumnType::Integer:
      return std::holds_alternative<std::int64_t>(c);
    case ColumnType::Text:
      return std::holds_alternative<std::string>(c);
  }
  return false;
}

bool cells_equal(const Cell& a, const Cell& b) {
  if (a.index() != b.index()) return false;
  if (const double* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    return (std::isnan(*x) && std::isnan(y)) || *x == y;
  }
  return a == b;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos && !s.empty()) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string cell_text(const Cell& c) {
  if (const double* x = std::get_if<double>(&c)) return format_real(*x);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

Cell cell_from_text(const std::string& s, ColumnType t) {
  switch (t) {
    case ColumnType::Real:
      return parse_real(s);
    case ColumnType::Integer:
      return parse_integer(s);
    case ColumnType::Text:
      return s;
  }
  return s;
}

void check_emittable(const OutputEnvelope& e) {
  if (!e.meta("artifact_version")) {
    throw std::invalid_argument("envelope metadata lacks artifact_version");
  }
  if (e.columns.empty()) throw std::invalid_argument("envelope has no columns");
  e.rows();
}

std::string emit_csv(const OutputEnvelope& e) {
  std::ostringstream os;
  for (const auto& [k, v] : e.metadata) {
    if (v.find('\n') != std::string::npos) {
      throw std::invalid_argument("metadata value for " + k + " spans lines");
    }
    os << "# " << k << ": " << v << '\n';
  }
  os << "# column_types: ";
  for (std::size_t j = 0; j < e.columns.size(); ++j) {
    os << (j ? "," : "") << to_string(e.columns[j].type);
  }
  os << '\n';
  for (std::size_t j = 0; j < e.columns.size(); ++j) {
    os << (j ? "," : "") << csv_field(e.columns[j].name);
  }
  os << '\n';
  const std::size_t n = e.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < e.columns.size(); ++j) {
      const Cell& c = e.columns[j].values[i];
      std::string t = cell_text(c);
      if (std::holds_alternative<std::string>(c)) t = csv_field(t);
      os << (j ? "," : "") << t;
    }
    os << '\n';
  }
  return os.str();
}

OutputEnvelope parse_csv(std::string_view text) {
  OutputEnvelope e;
  e.format = OutputFormat::Csv;
  std::istringstream is{std::string(text)};
  std::string line;
  std::vector<ColumnType> types;
  bool have_types = false;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header && line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ", 2);
      const auto colon_end = line.find(':', 2);
      std::string key, value;
      if (colon != std::string::npos) {
        key = line.substr(2, colon - 2);
        value = line.substr(colon + 2);
      } else if (colon_end != std::string::npos && colon_end + 1 == line.size()) {
        key = line.substr(2, colon_end - 2);
      } else {
        throw std::invalid_argument("bad metadata line: " + line);
      }
      if (key == "column_types") {
        for (const auto& t : split_csv(value)) types.push_back(parse_column_type(t));
        have_types = true;
      } else {
        e.metadata.emplace_back(key, value);
      }
      continue;
    }
    if (!have_header) {
      if (!have_types) throw std::invalid_argument("CSV lacks a column_types line");
      const auto names = split_csv(line);
      if (names.size() != types.size()) {
        throw std::invalid_argument("header and column_types disagree");
      }
      for (std::size_t j = 0; j < names.size(); ++j) e.add_column(names[j], types[j]);
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != types.size()) throw std::invalid_argument("ragged CSV row");
    for (std::size_t j = 0; j < fields.size(); ++j) {
      e.columns[j].values.push_back(cell_from_text(fields[j], types[j]));
    }
  }
  if (!have_header) throw std::invalid_argument("CSV header row missing");
  return e;
}

Json json_cell(const Cell& c) {
  if (const double* x = std::get_if<double>(&c)) {
    if (std::isfinite(*x)) return *x;
    return format_real(*x);
  }
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

Cell cell_from_json(const Json& j, ColumnType t) {
  switch (t) {
    case ColumnType::Real:
      if (j.is_string()) return parse_real(j.get<std::string>());
      return j.get<double>();
    case ColumnType::Integer:
      return j.get<std::int64_t>();
    case ColumnType::Text:
      return j.get<std::string>();
  }
  return 0.0;
}

std::string emit_json(const OutputEnvelope& e) {
  Json root;
  Json meta = Json::object();
  for (const auto& [k, v] : e.metadata) meta[k] = v;
  root["metadata"] = meta;
  Json cols = Json::array();
  for (const auto& c : e.columns) {
    Json values = Json::array();
    for (const auto& v : c.values) values.push_back(json_cell(v));
    cols.push_back({{"name", c.name}, {"type", to_string(c.type)}, {"values", values}});
  }
  root["payload"] = {{"columns", cols}};
  return root.dump(1) + "\n";
}

OutputEnvelope parse_json(std::string_view text) {
  const Json root = Json::parse(text);
  OutputEnvelope e;
  e.format = OutputFormat::Json;
  for (const auto& [k, v] : root.at("metadata").items()) {
    e.metadata.emplace_back(k, v.get<std::string>());
  }
  const auto& cols = root.at("payload").at("columns");
  for (const auto& c : cols) {
    e.add_column(c.at("name").get<std::string>(),
                 parse_column_type(c.at("type").get<std::string>()));
  }
  for (std::size_t i = 0; i < cols.size(); ++i) {
    Column& col = e.columns[i];
    for (const auto& v : cols[i].at("values")) col.values.push_back(cell_from_json(v, col.type));
  }
  e.rows();
  return e;
}

}  // namespace

OutputFormat parse_format(std::string_view text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  throw std::invalid_argument("unknown format '" + std::string(text) + "'");
}

std::string_view to_string(OutputFormat f) {
  return f == OutputFormat::Csv ? "csv" : "json";
}

std::string_view to_string(ColumnType t) {
  switch (t) {
    case ColumnType::Real:
      return "real";
    case ColumnType::Integer:
      return "integer";
    case ColumnType::Text:
      return "text";
  }
  return "?";
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void OutputEnvelope::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = value;
      return;
    }
  }
  metadata.emplace_back(key, value);
}

void OutputEnvelope::set_meta(const std::string& key, double value) {
  set_meta(key, format_real(value));
}

const std::string* OutputEnvelope::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return &v;
  }
  return nullptr;
}

Column& OutputEnvelope::add_column(const std::string& name, ColumnType type) {
  for (const auto& c : columns) {
    if (c.name == name) throw std::invalid_argument("duplicate column " + name);
  }
  if (!columns.empty() && !columns.front().values.empty()) {
    throw std::logic_error("columns must be declared before rows are added");
  }
  columns.push_back({name, type, {}});
  return columns.back();
}

std::size_t OutputEnvelope::rows() const {
  if (columns.empty()) return 0;
  const std::size_t n = columns.front().values.size();
  for (const auto& c : columns) {
    if (c.values.size() != n) throw std::logic_error("column " + c.name + " is ragged");
  }
  return n;
}

void OutputEnvelope::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("row width mismatch");
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (!cell_type_ok(row[j], columns[j].type)) {
      throw std::invalid_argument("cell type mismatch in column " + columns[j].name);
    }
  }
  for (std::size_t j = 0; j < row.size(); ++j) columns[j].values.push_back(std::move(row[j]));
}

const Column& OutputEnvelope::column(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no column " + name);
}

bool OutputEnvelope::operator==(const OutputEnvelope& o) const {
  if (format != o.format || metadata != o.metadata || columns.size() != o.columns.size()) {
    return false;
  }
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const Column& a = columns[j];
    const Column& b = o.columns[j];
    if (a.name != b.name || a.type != b.type || a.values.size() != b.values.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      if (!cells_equal(a.values[i], b.values[i])) return false;
    }
  }
  return true;
}

OutputEnvelope make_envelope(std::string_view command, const ExperimentConfig& config,
                             OutputFormat format) {
  OutputEnvelope e;
  e.format = format;
  e.set_meta("artifact_version", std::string(kArtifactVersion));
  e.set_meta("command", std::string(command));
  e.set_meta("phi", config.phi);
  e.set_meta("g", config.g);
  e.set_meta("sigma", config.sigma);
  e.set_meta("arm_length", config.arm_length);
  e.set_meta("particle_speed", config.particle_speed);
  return e;
}

std::string emit(const OutputEnvelope& envelope) {
  check_emittable(envelope);
  return envelope.format == OutputFormat::Csv ? emit_csv(envelope) : emit_json(envelope);
}

OutputEnvelope parse_envelope(std::string_view text, OutputFormat format) {
  return format == OutputFormat::Csv ? parse_csv(text) : parse_json(text);
}

}  // namespace weakmzi
