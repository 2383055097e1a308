#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace parcel {

/// Row-major so that a row is a contiguous span.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline std::span<const double> row_span(const Matrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

enum class FeatureKind { numeric, boolean, categorical };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view name);

struct FeatureDef {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  /// Ordered vocabulary; categorical features only.
  std::vector<std::string> categories;
};

struct FeatureSchema {
  std::vector<FeatureDef> features;
  std::string target_name = "is_lost_item";

  /// Throws InvalidArgument on duplicate names, a target name clash or a
  /// categorical feature without vocabulary.
  void validate() const;
  std::optional<std::size_t> index_of(std::string_view name) const;
};

using Cell = std::variant<double, std::string>;

/// Pre-encoding records. Categoricals are strings, numerics and booleans reals.
struct RawTable {
  FeatureSchema schema;
  std::vector<std::vector<Cell>> rows;
  std::vector<int> labels;

  std::size_t size() const { return rows.size(); }
  void validate() const;
};

/// Contiguous block of indicator columns produced from one categorical feature.
struct OneHotGroup {
  std::string feature;
  std::size_t first_column = 0;
  std::size_t width = 0;
};

/// Encoded feature matrix plus binary target (1 = lost). Every row carries a
/// stable id so that provenance survives subsetting and resampling.
class LabeledTable {
 public:
  LabeledTable() = default;
  LabeledTable(std::vector<std::string> columns, Matrix matrix, std::vector<int> labels);
  LabeledTable(std::vector<std::string> columns, Matrix matrix, std::vector<int> labels,
               std::vector<std::uint64_t> row_ids);

  const std::vector<std::string>& columns() const { return columns_; }
  const Matrix& matrix() const { return matrix_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::uint64_t>& row_ids() const { return row_ids_; }

  std::size_t rows() const { return labels_.size(); }
  std::size_t cols() const { return columns_.size(); }
  std::size_t positives() const;
  std::size_t negatives() const { return rows() - positives(); }
  bool has_both_classes() const { return positives() > 0 && negatives() > 0; }

  std::optional<std::size_t> column_index(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;

  /// Rows in the given order (duplicates allowed); metadata carried over.
  LabeledTable subset(std::span<const std::size_t> indices) const;
  /// Columns in the given order. One-hot metadata is dropped.
  LabeledTable select_columns(std::span<const std::size_t> indices) const;
  /// Indices of rows whose label equals `label`, ascending.
  std::vector<std::size_t> indices_of(int label) const;

  const std::vector<OneHotGroup>& one_hot_groups() const { return groups_; }
  void set_one_hot_groups(std::vector<OneHotGroup> groups) { groups_ = std::move(groups); }
  /// Columns currently holding log(1+x) values.
  const std::vector<std::string>& log_columns() const { return log_columns_; }
  void set_log_columns(std::vector<std::string> cols) { log_columns_ = std::move(cols); }

 private:
  std::vector<std::string> columns_;
  Matrix matrix_;
  std::vector<int> labels_;
  std::vector<std::uint64_t> row_ids_;
  std::vector<OneHotGroup> groups_;
  std::vector<std::string> log_columns_;
};

/// Category vocabulary after capping, per categorical feature.
struct CategoryMap {
  std::string feature;
  std::vector<std::string> kept;  // frequency order, ties lexicographic
  bool has_other = false;
};

/// Fitted one-hot encoder; re-applicable to tables drawn from the same schema.
class OneHotEncoder {
 public:
  static OneHotEncoder fit(const RawTable& raw, int max_categories);
  LabeledTable transform(const RawTable& raw) const;

  const std::vector<CategoryMap>& maps() const { return maps_; }
  const FeatureSchema& schema() const { return schema_; }
  std::vector<std::string> output_columns() const;

 private:
  FeatureSchema schema_;
  std::vector<CategoryMap> maps_;  // one per categorical feature, schema order
};

inline constexpr std::string_view kOtherCategory = "OTHER";

LabeledTable encode_one_hot(const RawTable& raw, int max_categories);

/// x -> ln(1+x) on the named columns; negative values are rejected.
LabeledTable log_transform(const LabeledTable& table, const std::vector<std::string>& columns);
/// Undo every recorded log column: y -> exp(y) - 1.
LabeledTable inverse_log_transform(const LabeledTable& table);
inline double log1p_inverse(double y) { return std::expm1(y); }

struct SplitSpec {
  double train_fraction = 0.8;
  double validation_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train, validation, test;
};

struct Split {
  LabeledTable train, validation, test;
};

/// Largest-remainder stratified allocation; indices sorted ascending per part.
SplitIndices stratified_split_indices(const LabeledTable& table, const SplitSpec& spec);
Split stratified_split(const LabeledTable& table, const SplitSpec& spec);

struct SyntheticConfig {
  std::size_t n_rows = 100000;
  double positive_rate = 0.0025;
  std::size_t n_numeric = 6;
  std::size_t n_boolean = 3;
  std::size_t n_categorical = 4;
  double signal_strength = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Which generated features carry planted minority signal.
struct PlantedSignal {
  std::vector<std::string> numeric;      // mean-shifted in log space
  std::vector<std::string> categorical;  // log-odds tilted towards one category
  std::vector<std::string> tilted_categories;  // aligned with `categorical`
};

PlantedSignal planted_signal(const SyntheticConfig& config);

/// Synthetic parcel table. Numeric features are log-normal, with the first
/// three (stock_value, weight_kg, volume_dm3) shifted for positives; the
/// first categorical (carrier) is tilted towards its second category.
RawTable generate_synthetic(const SyntheticConfig& config);

/// Names of the numeric columns in a schema (the usual log-transform targets).
std::vector<std::string> numeric_feature_names(const FeatureSchema& schema);

}  // namespace parcel
