#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "parcel/random.hpp"
#include "parcel/tabular.hpp"

namespace parcel {

enum class ClassifierKind {
  decision_tree,
  random_forest,
  gradient_boosting,
  logistic_regression,
  linear_svm,
  underbagging,
  rusboost,
};

std::string_view to_string(ClassifierKind kind);
/// Accepts the long names above and the short aliases dt, rf, xgb, lr, svm, ub, rus.
ClassifierKind classifier_kind_from_string(std::string_view name);
bool is_wrapper(ClassifierKind kind);

using Hyperparameters = std::map<std::string, double>;

/// Every hyperparameter a kind understands, with its default value.
const Hyperparameters& default_hyperparameters(ClassifierKind kind);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::decision_tree;
  Hyperparameters params;  // overrides; unset keys fall back to defaults
  std::optional<ClassifierKind> base_kind;  // wrappers only
  std::uint64_t seed = 0;

  double param(const std::string& name) const;
  int int_param(const std::string& name) const;
  /// Throws InvalidArgument for unknown keys or out-of-range values.
  void validate() const;
  /// Spec of a wrapper's member learner: base kind plus the base-relevant keys.
  ClassifierSpec base_spec(std::uint64_t member_seed) const;
};

// ---------------------------------------------------------------------------
// Trees

/// Flat binary tree. feature < 0 marks a leaf; rows with x[feature] <= threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf: positive probability (classification) or mean target (regression)
  double gain = 0.0;   // impurity decrease of the chosen split
  double weight = 0.0;
  std::size_t samples = 0;
  int depth = 0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const;
  int depth() const;
};

enum class SplitCriterion { gini, squared_error };

struct TreeConfig {
  int max_depth = 8;
  std::size_t min_samples_leaf = 1;
  std::size_t features_per_split = 0;  // 0 = all
  SplitCriterion criterion = SplitCriterion::gini;
};

/// Greedy CART. `rows` may repeat (bootstrap); `weights` aligns with `rows`.
/// `targets` are 0/1 for gini, real-valued for squared_error.
Tree grow_tree(const Matrix& x, std::span<const double> targets, std::span<const std::size_t> rows,
               std::span<const double> weights, const TreeConfig& config, Rng& rng);

/// Node impurity used by the split search: 2p(1-p) for gini, weighted variance otherwise.
double impurity(SplitCriterion criterion, double weight, double weighted_sum, double weighted_sq_sum);

// ---------------------------------------------------------------------------
// Fitted parameters

class ClassifierModel;

struct TreeParams {
  Tree tree;
};

struct ForestParams {
  std::vector<Tree> trees;
};

struct BoostingParams {
  double base_rate = 0.0;
  double base_margin = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> stages;
  std::vector<double> training_loss;  // after the prior and after every stage
};

/// Linear scorer in original feature units (standardisation folded in).
struct LinearParams {
  std::vector<double> weights;
  double bias = 0.0;
  bool hinge = false;  // true: linear SVM margin, false: logistic regression log-odds
  std::vector<double> loss_history;
};

struct BaggingParams {
  std::vector<ClassifierModel> members;
};

struct BoostStage {
  double epsilon = 0.0;  // weighted error before clamping
  double alpha = 0.0;
  int attempts = 0;
  bool accepted = false;
};

struct AdaBoostParams {
  std::vector<ClassifierModel> members;
  std::vector<double> alphas;
  std::vector<BoostStage> stages;
};

using FittedParams =
    std::variant<TreeParams, ForestParams, BoostingParams, LinearParams, BaggingParams, AdaBoostParams>;

class ClassifierModel {
 public:
  ClassifierModel() = default;
  ClassifierModel(ClassifierSpec spec, std::size_t feature_count, FittedParams params)
      : spec_(std::move(spec)), feature_count_(feature_count), params_(std::move(params)) {}

  const ClassifierSpec& spec() const { return spec_; }
  std::size_t feature_count() const { return feature_count_; }
  const FittedParams& params() const { return params_; }

 private:
  ClassifierSpec spec_;
  std::size_t feature_count_ = 0;
  FittedParams params_;
};

// ---------------------------------------------------------------------------
// Fitting. Every fit accepts optional per-row sample weights (empty = uniform).

ClassifierModel fit_decision_tree(const LabeledTable& table, const ClassifierSpec& spec,
                                  std::span<const double> sample_weights = {});
ClassifierModel fit_random_forest(const LabeledTable& table, const ClassifierSpec& spec,
                                  std::span<const double> sample_weights = {});
ClassifierModel fit_gradient_boosting(const LabeledTable& table, const ClassifierSpec& spec,
                                      std::span<const double> sample_weights = {});
ClassifierModel fit_logistic_regression(const LabeledTable& table, const ClassifierSpec& spec,
                                        std::span<const double> sample_weights = {});
ClassifierModel fit_linear_svm(const LabeledTable& table, const ClassifierSpec& spec,
                               std::span<const double> sample_weights = {});
ClassifierModel fit_underbagging(const LabeledTable& table, const ClassifierSpec& spec);

/// Per-stage instance weights, captured when requested.
struct BoostTrace {
  std::vector<std::vector<double>> weights;             // after each accepted stage update
  std::vector<std::vector<std::size_t>> training_rows;  // rows each accepted member was fit on
};
ClassifierModel fit_rusboost(const LabeledTable& table, const ClassifierSpec& spec, BoostTrace* trace = nullptr);

/// Dispatch on spec.kind.
ClassifierModel fit(const LabeledTable& table, const ClassifierSpec& spec, std::span<const double> sample_weights = {});

// ---------------------------------------------------------------------------
// Scoring

/// Probability-like scores in [0,1]. Linear SVM scores are min-max rescaled
/// margins over the scored batch.
std::vector<double> score(const ClassifierModel& model, const Matrix& rows);
/// Raw decision values: leaf probability, log-odds, or SVM margin.
std::vector<double> decision_values(const ClassifierModel& model, const Matrix& rows);
/// Default labels: score >= 0.5, except linear SVM which uses the margin sign.
std::vector<int> predict(const ClassifierModel& model, const Matrix& rows);
std::vector<int> predict(const ClassifierModel& model, const Matrix& rows, double threshold);

// ---------------------------------------------------------------------------
// Linear objectives, exposed for gradient checking.

struct LinearObjective {
  Matrix features;                  // already standardised
  std::vector<double> targets;      // 0/1
  std::vector<double> weights;      // normalised to sum 1
  double l2_penalty = 0.0;
  bool hinge = false;

  double loss(const Vector& w, double b) const;
  void gradient(const Vector& w, double b, Vector& grad_w, double& grad_b) const;
};

double sigmoid(double z);
/// Weighted mean logistic loss of probabilities against 0/1 targets.
double logistic_loss(std::span<const double> probabilities, std::span<const int> labels,
                     std::span<const double> weights = {});

}  // namespace parcel
