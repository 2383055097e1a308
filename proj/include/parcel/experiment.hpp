#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parcel/dhel.hpp"
#include "parcel/insurance.hpp"
#include "parcel/io.hpp"
#include "parcel/tuning.hpp"

namespace parcel {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr int kManifestVersion = 1;

enum class PipelineKind { dbsl, dhel, baseline };

std::string_view to_string(PipelineKind kind);
PipelineKind pipeline_kind_from_string(std::string_view name);

struct DataSource {
  std::optional<SyntheticConfig> synthetic;
  std::filesystem::path raw_csv;      // with `schema`
  std::filesystem::path schema;
  std::filesystem::path encoded_csv;  // already preprocessed
};

struct PreprocessSpec {
  int max_categories = 20;
  /// Columns to log1p; unset = every numeric schema feature.
  std::optional<std::vector<std::string>> log_columns;
};

struct ExplainSpec {
  std::size_t rows = 0;  // test rows explained; 0 disables
  std::size_t background = 200;
  std::size_t permutations = 200;
  std::size_t top = 20;
};

/// Every stage seed is derived from `seed` and the stage name; seeds inside
/// nested configs are ignored.
struct ExperimentManifest {
  DataSource data;
  PreprocessSpec preprocess;
  SplitSpec split;
  PipelineKind pipeline = PipelineKind::dbsl;
  DbslSpec dbsl;
  DhelSpec dhel = DhelSpec::defaults();
  SearchSpec search{.ranges = {}, .n_candidates = 0};
  std::optional<InsuranceRuleTable> rules;
  ExplainSpec explain;
  std::filesystem::path output_dir = "run";
  std::uint64_t seed = 0;
  std::string name;  // model label in reports; defaults from the pipeline

  void validate() const;
};

io::Json to_json(const ExperimentManifest& m);
/// Relative paths resolve against `base`.
ExperimentManifest manifest_from_json(const io::Json& j, const std::filesystem::path& base = {});
ExperimentManifest load_manifest(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON text.
std::uint64_t manifest_hash(const ExperimentManifest& m);

struct ModelMetrics {
  std::string model;
  ConfusionMatrix counts;
  MetricReport report;
};

struct RunRecord {
  std::string manifest_hash;  // 16 hex digits
  std::string tool_version{kToolVersion};
  std::string pipeline;
  std::map<std::string, double> timings;  // seconds per stage
  std::vector<ModelMetrics> metrics;
  std::vector<CostReport> costs;
  std::vector<std::string> artifacts;  // relative to the output dir
};

io::Json to_json(const RunRecord& r);
RunRecord run_record_from_json(const io::Json& j);

/// Encoded table for the manifest's data source.
LabeledTable load_experiment_data(const ExperimentManifest& m);

/// Human-readable model label, e.g. "RU-RF", "UB-DT", "AE-RF", "business_rules".
std::string pipeline_label(const ExperimentManifest& m);

/// split, fit, evaluate on the test split, cost and explain reports. Failures
/// are rethrown with the stage name; files written so far stay on disk.
RunRecord run_experiment(const ExperimentManifest& m);

std::string metrics_csv(const std::vector<ModelMetrics>& metrics);
std::string costs_csv(const std::vector<CostReport>& costs);
std::string search_trace_csv(const SearchResult& result);

struct ComparisonRow {
  std::string model;
  std::size_t runs = 0;
  std::map<std::string, std::pair<double, double>> stats;  // metric -> (mean, sample sd)
};

inline const std::vector<std::string> kComparedMetrics{"precision", "recall", "tnr", "balanced_accuracy", "roc_auc"};

/// Mean and sample standard deviation per model across runs, by mean BA descending.
std::vector<ComparisonRow> compare_runs(const std::vector<RunRecord>& records);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);
/// "model  BA 0.700 ± 0.012 ..." one line per model, three decimals.
std::string comparison_text(const std::vector<ComparisonRow>& rows);

}  // namespace parcel
