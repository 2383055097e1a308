#include "parcel/dhel.hpp"

#include <algorithm>
#include <iterator>

#include <fmt/format.h>

#include "parcel/error.hpp"
#include "parcel/tuning.hpp"

namespace parcel {

void DhelSpec::validate() const {
  network.validate();
  training.validate();
  classifier.validate();
  if (search.n_candidates > 0) search.validate();
}

DhelSpec DhelSpec::defaults() {
  DhelSpec s;
  s.classifier.kind = ClassifierKind::random_forest;
  s.classifier.params["balanced"] = 1;
  s.classifier.params["subsample_features"] = static_cast<double>(s.network.input_features);
  return s;
}

namespace {

std::vector<std::uint64_t> sorted_ids(const LabeledTable& t) {
  auto ids = t.row_ids();
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::size_t overlap(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  std::vector<std::uint64_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return common.size();
}

Matrix select_columns(const Matrix& rows, const std::vector<std::size_t>& cols) {
  Matrix out(rows.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = rows.col(static_cast<Eigen::Index>(cols[j]));
  return out;
}

}  // namespace

DhelModel train_dhel(const LabeledTable& train, const LabeledTable& validation, const DhelSpec& spec) {
  spec.validate();
  if (train.columns() != validation.columns()) throw DataError("train and validation tables have different columns");
  if (!validation.has_both_classes()) throw DataError("validation split must contain both classes");
  const auto train_ids = sorted_ids(train);
  const auto val_ids = sorted_ids(validation);
  if (const auto n = overlap(train_ids, val_ids); n > 0)
    throw DataError(fmt::format("train and validation share {} rows", n));

  DhelModel model;
  model.input_width = train.cols();

  // (1) input features ranked on the validation split only
  model.selected_feature_indices = select_input_features(validation, spec.network.input_features);
  for (auto j : model.selected_feature_indices) model.selected_feature_names.push_back(train.columns()[j]);

  // (2) autoencoder on the normals of D_train
  const auto normals = train.subset(train.indices_of(0)).select_columns(model.selected_feature_indices);
  TrainConfig tc = spec.training;
  tc.seed = derive_seed(spec.seed, "dhel_autoencoder");
  model.autoencoder = train_autoencoder(normals, spec.network, tc);
  model.autoencoder.selected_feature_indices = model.selected_feature_indices;

  // (3) E_v: error vectors of every validation row
  const Matrix ev = reconstruction_errors(model.autoencoder, select_columns(validation.matrix(), model.selected_feature_indices));
  std::vector<std::string> names;
  for (const auto& n : model.selected_feature_names) names.push_back("err_" + n);
  const LabeledTable ev_table(names, ev, validation.labels(), validation.row_ids());

  // (4) random search with repeated stratified CV on E_v, (5) refit on all of E_v
  DbslSpec base;
  base.classifier = spec.classifier;
  base.classifier.seed = derive_seed(spec.seed, "dhel_classifier");
  if (spec.search.n_candidates > 0) {
    SearchSpec search = spec.search;
    search.seed = derive_seed(spec.seed, "dhel_search");
    auto tuned = tune_dbsl(ev_table, base, search);
    base = tuned.spec;
    model.search = std::move(tuned.search);
  }
  model.classifier = fit(ev_table, base.classifier);

  model.provenance.autoencoder_rows = sorted_ids(normals);
  model.provenance.classifier_rows = val_ids;
  model.provenance.feature_selection_rows = val_ids;
  model.provenance.autoencoder_rows_all_normal = normals.positives() == 0;
  return model;
}

Matrix dhel_error_vectors(const DhelModel& model, const Matrix& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.input_width)
    throw InvalidArgument(fmt::format("DHEL model expects {} columns, got {}", model.input_width, rows.cols()));
  return reconstruction_errors(model.autoencoder, select_columns(rows, model.selected_feature_indices));
}

std::vector<double> dhel_score(const DhelModel& model, const Matrix& rows) {
  return score(model.classifier, dhel_error_vectors(model, rows));
}

std::vector<int> dhel_predict(const DhelModel& model, const Matrix& rows) {
  return predict(model.classifier, dhel_error_vectors(model, rows));
}

void verify_provenance(const DhelModel& model, const LabeledTable* test) {
  const auto& p = model.provenance;
  if (!p.autoencoder_rows_all_normal) throw DataError("autoencoder was trained on positive rows");
  if (const auto n = overlap(p.autoencoder_rows, p.classifier_rows); n > 0)
    throw DataError(fmt::format("{} rows reached both the autoencoder and the classifier", n));
  if (model.classifier.feature_count() != model.autoencoder.spec.input_features)
    throw DataError("classifier width differs from the autoencoder input width");
  if (test) {
    const auto ids = sorted_ids(*test);
    if (const auto n = overlap(ids, p.autoencoder_rows); n > 0)
      throw DataError(fmt::format("{} test rows were used to train the autoencoder", n));
    if (const auto n = overlap(ids, p.classifier_rows); n > 0)
      throw DataError(fmt::format("{} test rows were used to train the classifier", n));
  }
}

}  // namespace parcel
