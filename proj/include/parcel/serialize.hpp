#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "parcel/dhel.hpp"
#include "parcel/insurance.hpp"
#include "parcel/io.hpp"
#include "parcel/tuning.hpp"

namespace parcel::io {

inline constexpr std::string_view kModelFormat = "parcel-model";
inline constexpr int kModelVersion = 1;

Json to_json(const ClassifierSpec& spec);
ClassifierSpec classifier_spec_from_json(const Json& j);
Json to_json(const ResampleSpec& spec);
ResampleSpec resample_spec_from_json(const Json& j);
Json to_json(const DbslSpec& spec);
DbslSpec dbsl_spec_from_json(const Json& j);
Json to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const Json& j);
Json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& j);
/// Ranges: {"max_depth": {"int": [2, 12]}, "learning_rate": {"log_uniform": [0.01, 0.3]},
/// "subsample": {"uniform": [0.5, 1]}, "balanced": {"choice": [0, 1]}}.
Json to_json(const SearchSpec& spec);
SearchSpec search_spec_from_json(const Json& j);
Json to_json(const DhelSpec& spec);
DhelSpec dhel_spec_from_json(const Json& j);
Json to_json(const InsuranceRuleTable& rules);
InsuranceRuleTable insurance_rules_from_json(const Json& j);
Json to_json(const SearchResult& result);

Json to_json(const ClassifierModel& model);
ClassifierModel classifier_model_from_json(const Json& j);
Json to_json(const AutoencoderModel& model);
AutoencoderModel autoencoder_model_from_json(const Json& j);
Json to_json(const DhelModel& model);
DhelModel dhel_model_from_json(const Json& j);

/// A model file: format tag, version, the encoded columns it expects, and one model.
struct ModelFile {
  std::vector<std::string> columns;
  std::variant<ClassifierModel, AutoencoderModel, DhelModel> model;
};

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

/// Scores of any stored model on rows with ModelFile::columns. For a bare
/// autoencoder the score is the reconstruction MSE.
std::vector<double> model_scores(const ModelFile& file, const Matrix& rows);
std::vector<int> model_predictions(const ModelFile& file, const Matrix& rows);

/// Reorders `table` to the model's columns; missing columns are an error.
LabeledTable align_columns(const LabeledTable& table, const std::vector<std::string>& columns);

/// One-hot groups and log-transformed columns, kept next to encoded CSVs.
Json table_meta(const LabeledTable& table);
void apply_table_meta(LabeledTable& table, const Json& meta);
std::filesystem::path meta_path(const std::filesystem::path& csv);
/// write_table_csv plus the meta file.
void save_table(const std::filesystem::path& path, const LabeledTable& table);
/// read_table_csv plus the meta file when it exists.
LabeledTable load_table(const std::filesystem::path& path);

}  // namespace parcel::io
