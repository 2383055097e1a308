#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "parcel/tabular.hpp"

namespace parcel {

/// Positive = lost.
struct ConfusionMatrix {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::uint64_t positives() const { return tp + fn; }
  std::uint64_t negatives() const { return fp + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions);

/// Metrics that are undefined for the given counts are empty.
struct MetricReport {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> tnr;
  std::optional<double> balanced_accuracy;
  std::optional<double> roc_auc;
  std::vector<std::string> diagnostics;
};

/// BA is evaluated as (tp*N + tn*P) / (2PN), one rounding of an exact ratio.
MetricReport metrics(const ConfusionMatrix& cm);
/// As above, plus ROC-AUC from scores.
MetricReport metrics(const ConfusionMatrix& cm, std::span<const double> scores, std::span<const int> labels);

/// Mann-Whitney AUC with ties counted one half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Labels from scores: 1 iff score >= threshold.
std::vector<int> threshold_labels(std::span<const double> scores, double threshold);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// `repeats` independent stratified partitions into `folds` test folds.
std::vector<Fold> stratified_kfold(std::span<const int> labels, int folds, int repeats, std::uint64_t seed);
std::vector<Fold> stratified_kfold(const LabeledTable& table, int folds, int repeats, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Random search

struct ChoiceRange {
  std::vector<double> values;
};
struct IntRange {
  long lo = 0, hi = 0;  // inclusive
};
struct UniformRange {
  double lo = 0, hi = 1;
};
struct LogUniformRange {
  double lo = 1e-3, hi = 1;
};
using ParamRange = std::variant<ChoiceRange, IntRange, UniformRange, LogUniformRange>;

enum class Objective { balanced_accuracy, roc_auc };

std::string_view to_string(Objective o);
Objective objective_from_string(std::string_view name);

struct SearchSpec {
  std::map<std::string, ParamRange> ranges;
  int n_candidates = 50;
  int folds = 5;
  int repeats = 3;
  Objective objective = Objective::balanced_accuracy;
  std::uint64_t seed = 0;

  void validate() const;
};

using Candidate = std::map<std::string, double>;

struct TraceEntry {
  Candidate candidate;
  std::optional<double> score;
  std::string error;
};

struct SearchResult {
  std::size_t best_index = 0;
  Candidate best;
  double best_score = 0.0;
  std::vector<TraceEntry> trace;
};

/// The candidate stream: ranges sampled in key order, one engine per search.
std::vector<Candidate> sample_candidates(const SearchSpec& space);

/// Evaluates every sampled candidate; argmax with ties to the earlier one.
/// A throwing evaluation is recorded in the trace; fails only if all fail.
SearchResult random_search(const SearchSpec& space, const std::function<double(const Candidate&)>& evaluate);

/// Objective value of labels/scores on one fold.
double objective_value(Objective objective, std::span<const int> labels, std::span<const int> predictions,
                       std::span<const double> scores);

}  // namespace parcel
