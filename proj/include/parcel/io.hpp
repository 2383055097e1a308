#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "parcel/tabular.hpp"

namespace parcel::io {

using Json = nlohmann::json;

/// Column holding stable row ids in encoded CSVs; optional on read.
inline constexpr std::string_view kRowIdColumn = "row_id";

/// Pre-encoding CSV: header = schema feature names + target. Empty cells are
/// rejected rather than imputed.
RawTable read_raw_csv(const std::filesystem::path& path, const FeatureSchema& schema);
void write_raw_csv(const std::filesystem::path& path, const RawTable& raw);

/// Encoded CSV: optional row_id, feature columns, target column.
LabeledTable read_table_csv(const std::filesystem::path& path, const std::string& target_name = "is_lost_item");
void write_table_csv(const std::filesystem::path& path, const LabeledTable& table,
                     const std::string& target_name = "is_lost_item");

/// Generic rectangular CSV with a header; cells as strings.
struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};
CsvDocument read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvDocument& doc);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& value);
void write_text(const std::filesystem::path& path, const std::string& text);

Json to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const Json& j);
Json to_json(const SyntheticConfig& config);
SyntheticConfig synthetic_config_from_json(const Json& j);
Json to_json(const SplitSpec& spec);
SplitSpec split_spec_from_json(const Json& j);

}  // namespace parcel::io
