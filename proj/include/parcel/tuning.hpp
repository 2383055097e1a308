#pragma once

#include <map>
#include <optional>
#include <string>

#include "parcel/eval.hpp"
#include "parcel/learners.hpp"
#include "parcel/resample.hpp"

namespace parcel {

/// Data balance + supervised learner. Wrapper kinds (underbagging, rusboost)
/// balance internally and normally carry no resample step.
struct DbslSpec {
  std::optional<ResampleSpec> resample;
  ClassifierSpec classifier;
};

/// Resample (when configured) then fit.
ClassifierModel fit_dbsl(const LabeledTable& table, const DbslSpec& spec);

/// Candidate keys prefixed "resample." set ResampleSpec fields
/// (resample.target_ratio, resample.k_neighbors); all others are classifier
/// hyperparameters.
DbslSpec apply_candidate(DbslSpec spec, const Candidate& candidate);
ClassifierSpec apply_candidate(ClassifierSpec spec, const Candidate& candidate);

/// Mean objective over repeated stratified folds. Resampling is applied to
/// each training fold only; test folds keep their natural imbalance.
double cross_validate(const LabeledTable& table, const DbslSpec& spec, int folds, int repeats, std::uint64_t seed,
                      Objective objective);

/// A reasonable search space for a learner kind (wrappers search their base).
std::map<std::string, ParamRange> default_search_ranges(ClassifierKind kind,
                                                        std::optional<ClassifierKind> base = std::nullopt);

struct TunedDbsl {
  DbslSpec spec;  // best candidate applied
  SearchResult search;
};

/// Random search with repeated stratified CV; empty ranges fall back to the defaults.
TunedDbsl tune_dbsl(const LabeledTable& table, const DbslSpec& spec, SearchSpec search);

}  // namespace parcel
