#include "parcel/tuning.hpp"

#include <numeric>

#include <fmt/format.h>

#include "parcel/error.hpp"
#include "parcel/parallel.hpp"

namespace parcel {

ClassifierModel fit_dbsl(const LabeledTable& table, const DbslSpec& spec) {
  if (!spec.resample) return fit(table, spec.classifier);
  return fit(resample(table, *spec.resample), spec.classifier);
}

ClassifierSpec apply_candidate(ClassifierSpec spec, const Candidate& candidate) {
  for (const auto& [name, value] : candidate)
    if (name.rfind("resample.", 0) != 0) spec.params[name] = value;
  return spec;
}

DbslSpec apply_candidate(DbslSpec spec, const Candidate& candidate) {
  spec.classifier = apply_candidate(std::move(spec.classifier), candidate);
  for (const auto& [name, value] : candidate) {
    if (name.rfind("resample.", 0) != 0) continue;
    if (!spec.resample) throw InvalidArgument(fmt::format("'{}' given but no resampling is configured", name));
    if (name == "resample.target_ratio")
      spec.resample->target_ratio = value;
    else if (name == "resample.k_neighbors")
      spec.resample->k_neighbors = static_cast<int>(value);
    else
      throw InvalidArgument(fmt::format("unknown resample parameter '{}'", name));
  }
  return spec;
}

double cross_validate(const LabeledTable& table, const DbslSpec& spec, int folds, int repeats, std::uint64_t seed,
                      Objective objective) {
  const auto splits = stratified_kfold(table, folds, repeats, seed);
  std::vector<double> values(splits.size());
  parallel_for(splits.size(), [&](std::size_t f) {
    const auto train = table.subset(splits[f].train);
    const auto test = table.subset(splits[f].test);
    DbslSpec fold_spec = spec;
    fold_spec.classifier.seed = derive_seed(spec.classifier.seed, "cv_fold", f);
    if (fold_spec.resample) fold_spec.resample->seed = derive_seed(spec.resample->seed, "cv_fold", f);
    const auto model = fit_dbsl(train, fold_spec);
    const auto scores = score(model, test.matrix());
    const auto labels = predict(model, test.matrix());
    values[f] = objective_value(objective, test.labels(), labels, scores);
  });
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::map<std::string, ParamRange> default_search_ranges(ClassifierKind kind, std::optional<ClassifierKind> base) {
  switch (kind) {
    case ClassifierKind::decision_tree:
      return {{"max_depth", IntRange{2, 12}}, {"min_samples_leaf", IntRange{1, 20}}};
    case ClassifierKind::random_forest:
      return {{"n_estimators", ChoiceRange{{50, 100, 200}}},
              {"max_depth", IntRange{4, 16}},
              {"min_samples_leaf", IntRange{1, 10}},
              {"subsample_features", ChoiceRange{{0, 8, 16, 64}}}};
    case ClassifierKind::gradient_boosting:
      return {{"n_estimators", ChoiceRange{{50, 100, 200}}},
              {"learning_rate", LogUniformRange{0.02, 0.3}},
              {"max_depth", IntRange{2, 6}}};
    case ClassifierKind::logistic_regression:
      return {{"l2_penalty", LogUniformRange{1e-5, 1e-1}}, {"learning_rate", LogUniformRange{0.05, 1.0}}};
    case ClassifierKind::linear_svm:
      return {{"l2_penalty", LogUniformRange{1e-5, 1e-1}}, {"learning_rate", LogUniformRange{0.01, 0.5}}};
    case ClassifierKind::underbagging:
    case ClassifierKind::rusboost: {
      auto ranges = default_search_ranges(base.value_or(ClassifierKind::decision_tree));
      ranges.erase("n_estimators");
      ranges["n_estimators"] = ChoiceRange{{10, 25, 50}};
      return ranges;
    }
  }
  return {};
}

TunedDbsl tune_dbsl(const LabeledTable& table, const DbslSpec& spec, SearchSpec search) {
  if (search.ranges.empty()) search.ranges = default_search_ranges(spec.classifier.kind, spec.classifier.base_kind);
  search.validate();
  const auto cv_seed = derive_seed(search.seed, "tune_cv");
  auto result = random_search(search, [&](const Candidate& c) {
    const auto candidate_spec = apply_candidate(spec, c);
    candidate_spec.classifier.validate();
    return cross_validate(table, candidate_spec, search.folds, search.repeats, cv_seed, search.objective);
  });
  TunedDbsl out{apply_candidate(spec, result.best), std::move(result)};
  return out;
}

}  // namespace parcel
