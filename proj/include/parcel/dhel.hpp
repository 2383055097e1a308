#pragma once

#include <cstdint>
#include <vector>

#include "parcel/autonet.hpp"
#include "parcel/eval.hpp"
#include "parcel/learners.hpp"
#include "parcel/tabular.hpp"

namespace parcel {

struct DhelSpec {
  NetworkSpec network = NetworkSpec::preset_ae();
  TrainConfig training;
  ClassifierSpec classifier;
  /// Empty ranges fall back to default_search_ranges; n_candidates = 0 skips tuning.
  SearchSpec search;
  std::uint64_t seed = 0;

  void validate() const;
  /// AE preset feeding a class-balanced random forest that sees every error feature at each split.
  static DhelSpec defaults();
};

/// Which rows trained which stage, by stable row id (sorted ascending).
struct Provenance {
  std::vector<std::uint64_t> autoencoder_rows;       // label-0 rows of D_train
  std::vector<std::uint64_t> classifier_rows;        // D_validate
  std::vector<std::uint64_t> feature_selection_rows;  // D_validate
  bool autoencoder_rows_all_normal = false;
};

struct DhelModel {
  AutoencoderModel autoencoder;
  ClassifierModel classifier;
  std::vector<std::size_t> selected_feature_indices;  // into the encoded table
  std::vector<std::string> selected_feature_names;
  std::size_t input_width = 0;  // encoded table width
  Provenance provenance;
  SearchResult search;
};

/// AE on normals of `train`, error vectors of `validation` feed a tuned classifier.
DhelModel train_dhel(const LabeledTable& train, const LabeledTable& validation, const DhelSpec& spec);

/// Reconstruction-error vectors E_v for rows of the full encoded width.
Matrix dhel_error_vectors(const DhelModel& model, const Matrix& rows);
std::vector<double> dhel_score(const DhelModel& model, const Matrix& rows);
std::vector<int> dhel_predict(const DhelModel& model, const Matrix& rows);

/// Throws DataError when a leakage invariant is broken: AE and classifier rows
/// overlap, the AE saw a positive row, or `test` shares rows with either stage.
void verify_provenance(const DhelModel& model, const LabeledTable* test = nullptr);

}  // namespace parcel
