#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "weakmzi/interferometer.hpp"

namespace weakmzi {

inline constexpr std::string_view kArtifactVersion = "1.0.0";

enum class OutputFormat { Csv, Json };
OutputFormat parse_format(std::string_view text);
std::string_view to_string(OutputFormat f);

enum class ColumnType { Real, Integer, Text };
std::string_view to_string(ColumnType t);

using Cell = std::variant<double, std::int64_t, std::string>;

struct Column {
  std::string name;
  ColumnType type = ColumnType::Real;
  std::vector<Cell> values;
};

// Metadata block plus a typed columnar table. Verdicts are tables too.
struct OutputEnvelope {
  OutputFormat format = OutputFormat::Csv;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<Column> columns;

  void set_meta(const std::string& key, const std::string& value);
  void set_meta(const std::string& key, double value);
  const std::string* meta(const std::string& key) const;

  Column& add_column(const std::string& name, ColumnType type);
  std::size_t rows() const;
  void add_row(std::vector<Cell> row);
  const Column& column(const std::string& name) const;

  // NaN cells compare equal to NaN.
  bool operator==(const OutputEnvelope& o) const;
};

// Seeds the metadata with the version and the echoed configuration.
OutputEnvelope make_envelope(std::string_view command, const ExperimentConfig& config,
                             OutputFormat format);

std::string format_real(double v);

std::string emit(const OutputEnvelope& envelope);
OutputEnvelope parse_envelope(std::string_view text, OutputFormat format);

}  // namespace weakmzi
