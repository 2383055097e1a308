#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "parcel/learners.hpp"
#include "parcel/tabular.hpp"

namespace parcel {

/// Maps a batch of rows to one probability-like score per row.
using Scorer = std::function<std::vector<double>(const Matrix&)>;

Scorer make_scorer(const ClassifierModel& model);

struct AttributionResult {
  std::vector<double> values;  // phi_j
  double base_value = 0.0;     // mean score over the background
  double explained_score = 0.0;
};

inline constexpr std::size_t kMaxExactFeatures = 15;

/// Exact interventional Shapley values by subset enumeration.
AttributionResult shapley_exact(const Scorer& scorer, const Matrix& background, std::span<const double> row);

/// Permutation estimator. Each permutation telescopes from base to f(row).
AttributionResult shapley_sample(const Scorer& scorer, const Matrix& background, std::span<const double> row,
                                 std::size_t n_permutations, std::uint64_t seed);

/// Stratified background of at most n rows.
Matrix background_sample(const LabeledTable& table, std::size_t n, std::uint64_t seed);

/// One row of attributions per explained row.
Matrix attribution_matrix(const Scorer& scorer, const Matrix& background, const Matrix& rows,
                          std::size_t n_permutations, std::uint64_t seed);

struct ImportanceEntry {
  std::size_t feature = 0;
  std::string name;
  double mean_abs = 0.0;
};

/// Features by mean |phi| descending, ties by index.
std::vector<ImportanceEntry> importance_summary(const Matrix& attributions, const std::vector<std::string>& names);

struct DependenceCurve {
  std::string feature;
  std::vector<double> grid;
  std::vector<double> mean_score;
  std::string interaction_feature;  // empty without attributions
};

/// Mean score with the feature column overwritten by each grid value. When
/// `attributions` is given (rows aligned with the table) the interaction feature
/// is the column most correlated with this feature's attributions.
DependenceCurve partial_dependence(const Scorer& scorer, const LabeledTable& table, const std::string& feature,
                                   std::vector<double> grid, const Matrix* attributions = nullptr);

/// Distinct values for binary columns, otherwise up to `points` quantiles.
std::vector<double> default_grid(const LabeledTable& table, const std::string& feature, std::size_t points = 20);

}  // namespace parcel
