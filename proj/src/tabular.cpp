#include "parcel/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "parcel/error.hpp"
#include "parcel/random.hpp"

namespace parcel {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::numeric: return "numeric";
    case FeatureKind::boolean: return "boolean";
    case FeatureKind::categorical: return "categorical";
  }
  return "numeric";
}

FeatureKind feature_kind_from_string(std::string_view name) {
  if (name == "numeric") return FeatureKind::numeric;
  if (name == "boolean") return FeatureKind::boolean;
  if (name == "categorical") return FeatureKind::categorical;
  throw InvalidArgument(fmt::format("unknown feature kind '{}'", name));
}

void FeatureSchema::validate() const {
  std::set<std::string> seen;
  for (const auto& f : features) {
    if (f.name.empty()) throw InvalidArgument("feature with empty name");
    if (!seen.insert(f.name).second) throw InvalidArgument(fmt::format("duplicate feature '{}'", f.name));
    if (f.kind == FeatureKind::categorical && f.categories.empty())
      throw InvalidArgument(fmt::format("categorical feature '{}' has no vocabulary", f.name));
  }
  if (seen.count(target_name)) throw InvalidArgument(fmt::format("target '{}' is also a feature", target_name));
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].name == name) return i;
  return std::nullopt;
}

void RawTable::validate() const {
  schema.validate();
  if (labels.size() != rows.size()) throw DataError("label count differs from row count");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != schema.features.size())
      throw DataError(fmt::format("row {} has {} cells, schema has {}", r, row.size(), schema.features.size()));
    if (labels[r] != 0 && labels[r] != 1) throw DataError(fmt::format("row {} label is not 0/1", r));
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto& def = schema.features[c];
      if (def.kind == FeatureKind::categorical) {
        const auto* s = std::get_if<std::string>(&row[c]);
        if (s == nullptr || s->empty())
          throw DataError(fmt::format("row {} feature '{}' is missing or not categorical", r, def.name));
      } else {
        const auto* v = std::get_if<double>(&row[c]);
        if (v == nullptr || !std::isfinite(*v))
          throw DataError(fmt::format("row {} feature '{}' is missing or not numeric", r, def.name));
        if (def.kind == FeatureKind::boolean && *v != 0.0 && *v != 1.0)
          throw DataError(fmt::format("row {} feature '{}' is not boolean", r, def.name));
      }
    }
  }
}

// ---------------------------------------------------------------------------

LabeledTable::LabeledTable(std::vector<std::string> columns, Matrix matrix, std::vector<int> labels)
    : LabeledTable(std::move(columns), std::move(matrix), labels, {}) {}

LabeledTable::LabeledTable(std::vector<std::string> columns, Matrix matrix, std::vector<int> labels,
                           std::vector<std::uint64_t> row_ids)
    : columns_(std::move(columns)), matrix_(std::move(matrix)), labels_(std::move(labels)), row_ids_(std::move(row_ids)) {
  if (static_cast<std::size_t>(matrix_.rows()) != labels_.size())
    throw DataError("matrix row count differs from label count");
  if (static_cast<std::size_t>(matrix_.cols()) != columns_.size())
    throw DataError("matrix column count differs from column names");
  if (row_ids_.empty()) {
    row_ids_.resize(labels_.size());
    std::iota(row_ids_.begin(), row_ids_.end(), std::uint64_t{0});
  } else if (row_ids_.size() != labels_.size()) {
    throw DataError("row id count differs from label count");
  }
  for (int y : labels_)
    if (y != 0 && y != 1) throw DataError("labels must be 0/1");
  if (!matrix_.allFinite()) throw DataError("table contains missing or non-finite values");
}

std::size_t LabeledTable::positives() const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
}

std::optional<std::size_t> LabeledTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return i;
  return std::nullopt;
}

std::size_t LabeledTable::require_column(std::string_view name) const {
  auto idx = column_index(name);
  if (!idx) throw InvalidArgument(fmt::format("unknown column '{}'", name));
  return *idx;
}

LabeledTable LabeledTable::subset(std::span<const std::size_t> indices) const {
  Matrix m(static_cast<Eigen::Index>(indices.size()), matrix_.cols());
  std::vector<int> y(indices.size());
  std::vector<std::uint64_t> ids(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = indices[i];
    if (src >= rows()) throw InvalidArgument("row index out of range");
    m.row(static_cast<Eigen::Index>(i)) = matrix_.row(static_cast<Eigen::Index>(src));
    y[i] = labels_[src];
    ids[i] = row_ids_[src];
  }
  LabeledTable out(columns_, std::move(m), std::move(y), std::move(ids));
  out.groups_ = groups_;
  out.log_columns_ = log_columns_;
  return out;
}

LabeledTable LabeledTable::select_columns(std::span<const std::size_t> indices) const {
  Matrix m(matrix_.rows(), static_cast<Eigen::Index>(indices.size()));
  std::vector<std::string> names;
  std::vector<std::string> logs;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= cols()) throw InvalidArgument("column index out of range");
    m.col(static_cast<Eigen::Index>(j)) = matrix_.col(static_cast<Eigen::Index>(indices[j]));
    names.push_back(columns_[indices[j]]);
    if (std::find(log_columns_.begin(), log_columns_.end(), names.back()) != log_columns_.end())
      logs.push_back(names.back());
  }
  LabeledTable out(std::move(names), std::move(m), labels_, row_ids_);
  out.log_columns_ = std::move(logs);
  return out;
}

std::vector<std::size_t> LabeledTable::indices_of(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------

OneHotEncoder OneHotEncoder::fit(const RawTable& raw, int max_categories) {
  if (max_categories < 2) throw InvalidArgument("max_categories must be >= 2");
  if (raw.rows.empty()) throw DataError("cannot encode an empty table");
  raw.validate();

  OneHotEncoder enc;
  enc.schema_ = raw.schema;
  for (std::size_t c = 0; c < raw.schema.features.size(); ++c) {
    const auto& def = raw.schema.features[c];
    if (def.kind != FeatureKind::categorical) continue;
    std::map<std::string, std::size_t> counts;
    for (const auto& row : raw.rows) ++counts[std::get<std::string>(row[c])];
    if (counts.empty()) throw DataError(fmt::format("feature '{}' has no observed categories", def.name));

    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    // std::map iteration is lexicographic, so a stable sort on count keeps ties lexicographic.
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

    CategoryMap map;
    map.feature = def.name;
    const auto cap = static_cast<std::size_t>(max_categories);
    const std::size_t keep = ranked.size() <= cap ? ranked.size() : cap - 1;
    for (std::size_t i = 0; i < keep; ++i) map.kept.push_back(ranked[i].first);
    map.has_other = keep < ranked.size();
    enc.maps_.push_back(std::move(map));
  }
  return enc;
}

std::vector<std::string> OneHotEncoder::output_columns() const {
  std::vector<std::string> names;
  std::size_t m = 0;
  for (const auto& def : schema_.features) {
    if (def.kind != FeatureKind::categorical) {
      names.push_back(def.name);
      continue;
    }
    const auto& map = maps_[m++];
    for (const auto& cat : map.kept) names.push_back(def.name + "_" + cat);
    if (map.has_other) names.push_back(def.name + "_" + std::string(kOtherCategory));
  }
  return names;
}

LabeledTable OneHotEncoder::transform(const RawTable& raw) const {
  if (raw.rows.empty()) throw DataError("cannot encode an empty table");
  raw.validate();
  if (raw.schema.features.size() != schema_.features.size())
    throw DataError("table schema differs from the fitted schema");

  std::vector<std::string> names = output_columns();
  std::vector<OneHotGroup> groups;
  std::vector<std::unordered_map<std::string, std::size_t>> lookup;
  {
    std::size_t col = 0, m = 0;
    for (const auto& def : schema_.features) {
      if (def.kind != FeatureKind::categorical) {
        ++col;
        continue;
      }
      const auto& map = maps_[m++];
      std::unordered_map<std::string, std::size_t> idx;
      for (std::size_t k = 0; k < map.kept.size(); ++k) idx.emplace(map.kept[k], k);
      const std::size_t width = map.kept.size() + (map.has_other ? 1 : 0);
      groups.push_back({def.name, col, width});
      lookup.push_back(std::move(idx));
      col += width;
    }
  }

  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(raw.rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    std::size_t col = 0, g = 0;
    const auto ri = static_cast<Eigen::Index>(r);
    for (std::size_t c = 0; c < schema_.features.size(); ++c) {
      const auto& def = schema_.features[c];
      if (def.kind != FeatureKind::categorical) {
        x(ri, static_cast<Eigen::Index>(col++)) = std::get<double>(raw.rows[r][c]);
        continue;
      }
      const auto& value = std::get<std::string>(raw.rows[r][c]);
      const auto& group = groups[g];
      auto it = lookup[g].find(value);
      std::size_t offset;
      if (it != lookup[g].end()) {
        offset = it->second;
      } else if (maps_[g].has_other) {
        offset = group.width - 1;
      } else {
        throw DataError(fmt::format("unseen category '{}' for feature '{}' and no OTHER bucket", value, def.name));
      }
      x(ri, static_cast<Eigen::Index>(group.first_column + offset)) = 1.0;
      col += group.width;
      ++g;
    }
  }
  LabeledTable out(std::move(names), std::move(x), raw.labels);
  out.set_one_hot_groups(std::move(groups));
  return out;
}

LabeledTable encode_one_hot(const RawTable& raw, int max_categories) {
  return OneHotEncoder::fit(raw, max_categories).transform(raw);
}

// ---------------------------------------------------------------------------

LabeledTable log_transform(const LabeledTable& table, const std::vector<std::string>& columns) {
  Matrix x = table.matrix();
  std::vector<std::string> logs = table.log_columns();
  for (const auto& name : columns) {
    const auto j = static_cast<Eigen::Index>(table.require_column(name));
    if (std::find(logs.begin(), logs.end(), name) != logs.end())
      throw InvalidArgument(fmt::format("column '{}' is already log-transformed", name));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (x(i, j) < 0.0) throw DataError(fmt::format("column '{}' has negative value {}", name, x(i, j)));
      x(i, j) = std::log1p(x(i, j));
    }
    logs.push_back(name);
  }
  LabeledTable out(table.columns(), std::move(x), table.labels(), table.row_ids());
  out.set_one_hot_groups(table.one_hot_groups());
  out.set_log_columns(std::move(logs));
  return out;
}

LabeledTable inverse_log_transform(const LabeledTable& table) {
  Matrix x = table.matrix();
  for (const auto& name : table.log_columns()) {
    const auto j = static_cast<Eigen::Index>(table.require_column(name));
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = std::expm1(x(i, j));
  }
  LabeledTable out(table.columns(), std::move(x), table.labels(), table.row_ids());
  out.set_one_hot_groups(table.one_hot_groups());
  return out;
}

// ---------------------------------------------------------------------------

void SplitSpec::validate() const {
  for (double f : {train_fraction, validation_fraction, test_fraction})
    if (!(f > 0.0 && f < 1.0)) throw InvalidArgument("split fractions must lie in (0,1)");
  if (std::abs(train_fraction + validation_fraction + test_fraction - 1.0) > 1e-9)
    throw InvalidArgument("split fractions must sum to 1");
}

namespace {

/// Hamilton apportionment of `n` items over `fractions`; remainder ties go to the earlier part.
std::vector<std::size_t> largest_remainder(std::size_t n, const std::vector<double>& fractions) {
  std::vector<std::size_t> counts(fractions.size());
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    const double exact = static_cast<double>(n) * fractions[k];
    counts[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += counts[k];
    rema.emplace_back(exact - static_cast<double>(counts[k]), k);
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++counts[rema[r % rema.size()].second];
  return counts;
}

}  // namespace

SplitIndices stratified_split_indices(const LabeledTable& table, const SplitSpec& spec) {
  spec.validate();
  if (!table.has_both_classes()) throw DataError("stratified split needs both classes");
  const std::vector<double> fractions{spec.train_fraction, spec.validation_fraction, spec.test_fraction};
  SplitIndices out;
  std::vector<std::size_t>* parts[3] = {&out.train, &out.validation, &out.test};
  for (int label : {1, 0}) {
    auto idx = table.indices_of(label);
    Rng rng(derive_seed(spec.seed, "stratified_split", static_cast<std::uint64_t>(label)));
    shuffle(idx, rng);
    const auto counts = largest_remainder(idx.size(), fractions);
    if (label == 1) {
      for (std::size_t k = 0; k < 3; ++k)
        if (counts[k] == 0)
          throw DataError(fmt::format("split fraction {} too small to receive a positive ({} positives)",
                                      fractions[k], idx.size()));
    }
    std::size_t pos = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      parts[k]->insert(parts[k]->end(), idx.begin() + static_cast<std::ptrdiff_t>(pos),
                       idx.begin() + static_cast<std::ptrdiff_t>(pos + counts[k]));
      pos += counts[k];
    }
  }
  for (auto* p : parts) std::sort(p->begin(), p->end());
  return out;
}

Split stratified_split(const LabeledTable& table, const SplitSpec& spec) {
  const auto idx = stratified_split_indices(table, spec);
  return {table.subset(idx.train), table.subset(idx.validation), table.subset(idx.test)};
}

// ---------------------------------------------------------------------------

void SyntheticConfig::validate() const {
  if (!(positive_rate > 0.0 && positive_rate < 0.5)) throw InvalidArgument("positive_rate must lie in (0, 0.5)");
  if (static_cast<double>(n_rows) < 1.0 / positive_rate)
    throw InvalidArgument("n_rows must be at least 1/positive_rate");
  if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) throw InvalidArgument("signal_strength must lie in [0,1]");
  if (n_numeric + n_boolean + n_categorical == 0) throw InvalidArgument("synthetic table needs at least one feature");
}

namespace {

struct NumericFamily {
  const char* name;
  double log_mean;
  double log_sd;
  double shift_sd;  // planted shift for positives, in units of log_sd
  double round_to;
};

// stock_value in euros; the rest are physical or operational quantities.
constexpr NumericFamily kNumeric[] = {
    {"stock_value", 4.5, 0.8, 1.25, 0.01},   {"weight_kg", 0.5, 0.6, 4.0, 0.001},
    {"volume_dm3", 2.0, 0.7, 4.0, 0.001},    {"quantity", 0.0, 0.6, 0.0, 1.0},
    {"distance_km", 3.0, 0.5, 0.0, 0.01},    {"days_to_delivery", 0.7, 0.4, 0.0, 1.0},
};

struct BooleanFamily {
  const char* name;
  double p;
};

constexpr BooleanFamily kBoolean[] = {{"is_b2b_customer", 0.15}, {"is_gift", 0.05}, {"is_marketplace", 0.2}};

std::vector<std::string> categorical_vocab(std::size_t which) {
  std::vector<std::string> v;
  switch (which) {
    case 0:
      for (char c = 'A'; c <= 'F'; ++c) v.emplace_back(1, c);
      break;
    case 1:
      for (int r = 1; r <= 12; ++r) v.push_back(fmt::format("R{:02d}", r));
      break;
    case 2:
      v = {"phones", "tablets", "laptops", "audio", "cameras", "kitchen", "garden", "toys"};
      for (int k = static_cast<int>(v.size()); k < 30; ++k) v.push_back(fmt::format("misc{:02d}", k));
      break;
    case 3:
      v = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
      break;
    default:
      for (int k = 0; k < 8; ++k) v.push_back(fmt::format("v{}", k));
  }
  return v;
}

const char* categorical_name(std::size_t which) {
  static const char* names[] = {"carrier", "region", "product_category", "delivery_weekday"};
  return which < 4 ? names[which] : nullptr;
}

}  // namespace

PlantedSignal planted_signal(const SyntheticConfig& config) {
  PlantedSignal s;
  for (std::size_t k = 0; k < config.n_numeric && k < std::size(kNumeric); ++k)
    if (kNumeric[k].shift_sd > 0.0) s.numeric.emplace_back(kNumeric[k].name);
  if (config.n_categorical > 0) {
    s.categorical.emplace_back(categorical_name(0));
    s.tilted_categories.emplace_back(categorical_vocab(0)[1]);
  }
  return s;
}

std::vector<std::string> numeric_feature_names(const FeatureSchema& schema) {
  std::vector<std::string> out;
  for (const auto& f : schema.features)
    if (f.kind == FeatureKind::numeric) out.push_back(f.name);
  return out;
}

RawTable generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  RawTable raw;
  auto& schema = raw.schema;
  for (std::size_t k = 0; k < config.n_numeric; ++k)
    schema.features.push_back({k < std::size(kNumeric) ? kNumeric[k].name : fmt::format("num_{}", k),
                               FeatureKind::numeric, {}});
  for (std::size_t k = 0; k < config.n_boolean; ++k)
    schema.features.push_back({k < std::size(kBoolean) ? kBoolean[k].name : fmt::format("bool_{}", k),
                               FeatureKind::boolean, {}});
  std::vector<std::vector<double>> base_weights;
  for (std::size_t k = 0; k < config.n_categorical; ++k) {
    const char* name = categorical_name(k);
    auto vocab = categorical_vocab(k);
    std::vector<double> w(vocab.size());
    for (std::size_t c = 0; c < w.size(); ++c) w[c] = 1.0 / static_cast<double>(c + 1);
    base_weights.push_back(std::move(w));
    schema.features.push_back({name ? name : fmt::format("cat_{}", k), FeatureKind::categorical, std::move(vocab)});
  }
  schema.validate();

  // Positives tilt carrier towards its second category by exp(2.5 * signal).
  std::vector<std::vector<double>> cum_neg, cum_pos;
  for (std::size_t k = 0; k < base_weights.size(); ++k) {
    auto wn = base_weights[k];
    auto wp = base_weights[k];
    if (k == 0) wp[1] *= std::exp(2.5 * config.signal_strength);
    std::partial_sum(wn.begin(), wn.end(), wn.begin());
    std::partial_sum(wp.begin(), wp.end(), wp.begin());
    cum_neg.push_back(std::move(wn));
    cum_pos.push_back(std::move(wp));
  }

  Rng rng(derive_seed(config.seed, "generate_synthetic"));
  raw.rows.reserve(config.n_rows);
  raw.labels.reserve(config.n_rows);
  for (std::size_t r = 0; r < config.n_rows; ++r) {
    const int y = uniform01(rng) < config.positive_rate ? 1 : 0;
    std::vector<Cell> row;
    row.reserve(schema.features.size());
    for (std::size_t k = 0; k < config.n_numeric; ++k) {
      NumericFamily fam = k < std::size(kNumeric) ? kNumeric[k] : NumericFamily{nullptr, 1.0, 0.5, 0.0, 0.001};
      double z = standard_normal(rng);
      if (y == 1) z += fam.shift_sd * config.signal_strength;
      double v = std::exp(fam.log_mean + fam.log_sd * z);
      if (k == 3) v = 1.0 + std::floor(v);  // quantity
      v = std::round(v / fam.round_to) * fam.round_to;
      row.emplace_back(v);
    }
    for (std::size_t k = 0; k < config.n_boolean; ++k) {
      const double p = k < std::size(kBoolean) ? kBoolean[k].p : 0.3;
      row.emplace_back(uniform01(rng) < p ? 1.0 : 0.0);
    }
    for (std::size_t k = 0; k < config.n_categorical; ++k) {
      const auto& cum = y == 1 ? cum_pos[k] : cum_neg[k];
      row.emplace_back(schema.features[config.n_numeric + config.n_boolean + k].categories[weighted_index(rng, cum)]);
    }
    raw.rows.push_back(std::move(row));
    raw.labels.push_back(y);
  }
  return raw;
}

}  // namespace parcel
