#include "parcel/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "parcel/error.hpp"
#include "parcel/parallel.hpp"
#include "parcel/resample.hpp"

namespace parcel {

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::decision_tree: return "decision_tree";
    case ClassifierKind::random_forest: return "random_forest";
    case ClassifierKind::gradient_boosting: return "gradient_boosting";
    case ClassifierKind::logistic_regression: return "logistic_regression";
    case ClassifierKind::linear_svm: return "linear_svm";
    case ClassifierKind::underbagging: return "underbagging";
    case ClassifierKind::rusboost: return "rusboost";
  }
  return "decision_tree";
}

ClassifierKind classifier_kind_from_string(std::string_view name) {
  static const std::pair<std::string_view, ClassifierKind> table[] = {
      {"decision_tree", ClassifierKind::decision_tree},
      {"dt", ClassifierKind::decision_tree},
      {"random_forest", ClassifierKind::random_forest},
      {"rf", ClassifierKind::random_forest},
      {"gradient_boosting", ClassifierKind::gradient_boosting},
      {"xgb", ClassifierKind::gradient_boosting},
      {"logistic_regression", ClassifierKind::logistic_regression},
      {"lr", ClassifierKind::logistic_regression},
      {"linear_svm", ClassifierKind::linear_svm},
      {"svm", ClassifierKind::linear_svm},
      {"underbagging", ClassifierKind::underbagging},
      {"ub", ClassifierKind::underbagging},
      {"rusboost", ClassifierKind::rusboost},
      {"rus", ClassifierKind::rusboost},
  };
  for (const auto& [n, k] : table)
    if (n == name) return k;
  throw InvalidArgument(fmt::format("unknown classifier kind '{}'", name));
}

bool is_wrapper(ClassifierKind kind) {
  return kind == ClassifierKind::underbagging || kind == ClassifierKind::rusboost;
}

const Hyperparameters& default_hyperparameters(ClassifierKind kind) {
  static const Hyperparameters tree{{"max_depth", 8}, {"min_samples_leaf", 1}, {"subsample_features", 0},
                                    {"balanced", 0}};
  static const Hyperparameters forest{{"n_estimators", 100}, {"max_depth", 12},  {"min_samples_leaf", 1},
                                      {"subsample_features", 0}, {"bootstrap", 1}, {"balanced", 0}};
  static const Hyperparameters boosting{{"n_estimators", 100}, {"learning_rate", 0.1}, {"max_depth", 3},
                                        {"min_samples_leaf", 1}, {"subsample_features", 0}, {"balanced", 0}};
  static const Hyperparameters logistic{{"epochs", 300}, {"learning_rate", 0.5}, {"l2_penalty", 1e-4},
                                        {"balanced", 0}};
  static const Hyperparameters svm{{"epochs", 300}, {"learning_rate", 0.1}, {"l2_penalty", 1e-3}, {"balanced", 0}};
  static const Hyperparameters bagging{{"n_estimators", 25}, {"target_ratio", 1.0}};
  static const Hyperparameters boost{{"n_estimators", 25}, {"target_ratio", 1.0}, {"retries", 3}};
  switch (kind) {
    case ClassifierKind::decision_tree: return tree;
    case ClassifierKind::random_forest: return forest;
    case ClassifierKind::gradient_boosting: return boosting;
    case ClassifierKind::logistic_regression: return logistic;
    case ClassifierKind::linear_svm: return svm;
    case ClassifierKind::underbagging: return bagging;
    case ClassifierKind::rusboost: return boost;
  }
  return tree;
}

double ClassifierSpec::param(const std::string& name) const {
  if (auto it = params.find(name); it != params.end()) return it->second;
  const auto& own = default_hyperparameters(kind);
  if (auto it = own.find(name); it != own.end()) return it->second;
  if (is_wrapper(kind) && base_kind) {
    const auto& base = default_hyperparameters(*base_kind);
    if (auto it = base.find(name); it != base.end()) return it->second;
  }
  throw InvalidArgument(fmt::format("{} has no hyperparameter '{}'", to_string(kind), name));
}

int ClassifierSpec::int_param(const std::string& name) const {
  return static_cast<int>(std::lround(param(name)));
}

void ClassifierSpec::validate() const {
  if (is_wrapper(kind)) {
    if (!base_kind) throw InvalidArgument(fmt::format("{} needs base_kind", to_string(kind)));
    if (is_wrapper(*base_kind)) throw InvalidArgument("wrapper ensembles cannot nest");
  } else if (base_kind) {
    throw InvalidArgument(fmt::format("{} does not take base_kind", to_string(kind)));
  }
  const auto& own = default_hyperparameters(kind);
  for (const auto& [name, value] : params) {
    const bool known = own.count(name) || (is_wrapper(kind) && default_hyperparameters(*base_kind).count(name));
    if (!known) throw InvalidArgument(fmt::format("{} does not accept hyperparameter '{}'", to_string(kind), name));
    if (!std::isfinite(value)) throw InvalidArgument(fmt::format("hyperparameter '{}' is not finite", name));
  }
  auto check = [&](const char* name, auto pred, const char* what) {
    bool has = own.count(name) || (base_kind && default_hyperparameters(*base_kind).count(name));
    if (has && !pred(param(name))) throw InvalidArgument(fmt::format("hyperparameter '{}' must be {}", name, what));
  };
  if (kind == ClassifierKind::gradient_boosting)
    check("n_estimators", [](double v) { return v >= 0; }, ">= 0");
  else
    check("n_estimators", [](double v) { return v >= 1; }, ">= 1");
  check("max_depth", [](double v) { return v >= 1; }, ">= 1");
  check("min_samples_leaf", [](double v) { return v >= 1; }, ">= 1");
  check("subsample_features", [](double v) { return v >= 0; }, ">= 0");
  check("learning_rate", [](double v) { return v > 0; }, "> 0");
  check("l2_penalty", [](double v) { return v >= 0; }, ">= 0");
  check("epochs", [](double v) { return v >= 0; }, ">= 0");
  check("target_ratio", [](double v) { return v > 0 && v <= 1; }, "in (0,1]");
  check("retries", [](double v) { return v >= 0; }, ">= 0");
  if (kind == ClassifierKind::gradient_boosting && param("learning_rate") > 1.0)
    throw InvalidArgument("gradient boosting learning_rate must lie in (0,1]");
}

ClassifierSpec ClassifierSpec::base_spec(std::uint64_t member_seed) const {
  ClassifierSpec base;
  base.kind = base_kind.value_or(ClassifierKind::decision_tree);
  base.seed = member_seed;
  const auto& allowed = default_hyperparameters(base.kind);
  for (const auto& [name, value] : params)
    if (allowed.count(name)) base.params[name] = value;
  return base;
}

// ---------------------------------------------------------------------------

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_loss(std::span<const double> p, std::span<const int> labels, std::span<const double> weights) {
  constexpr double eps = 1e-15;
  double total = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const double q = std::clamp(p[i], eps, 1.0 - eps);
    total += -w * (labels[i] == 1 ? std::log(q) : std::log(1.0 - q));
    wsum += w;
  }
  return total / wsum;
}

double impurity(SplitCriterion criterion, double weight, double sum, double sq_sum) {
  if (weight <= 0.0) return 0.0;
  const double mean = sum / weight;
  if (criterion == SplitCriterion::gini) return 2.0 * mean * (1.0 - mean);
  return std::max(0.0, sq_sum / weight - mean * mean);
}

double Tree::predict(std::span<const double> row) const {
  int n = 0;
  while (!nodes[static_cast<std::size_t>(n)].is_leaf()) {
    const auto& node = nodes[static_cast<std::size_t>(n)];
    n = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(n)].value;
}

int Tree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

namespace {

struct Entry {
  std::size_t row;
  double weight;
};

class TreeGrower {
 public:
  TreeGrower(const Matrix& x, std::span<const double> targets, const TreeConfig& config, Rng& rng)
      : x_(x), t_(targets), cfg_(config), rng_(rng) {}

  Tree grow(std::vector<Entry> entries) {
    build(entries, 0);
    return std::move(tree_);
  }

 private:
  int build(std::vector<Entry>& entries, int depth) {
    double w = 0.0, s = 0.0, q = 0.0;
    for (const auto& e : entries) {
      const double t = t_[e.row];
      w += e.weight;
      s += e.weight * t;
      q += e.weight * t * t;
    }
    const int id = static_cast<int>(tree_.nodes.size());
    TreeNode node;
    node.value = w > 0 ? s / w : 0.0;
    if (cfg_.criterion == SplitCriterion::gini) node.value = std::clamp(node.value, 0.0, 1.0);
    node.weight = w;
    node.samples = entries.size();
    node.depth = depth;
    tree_.nodes.push_back(node);

    const double parent = impurity(cfg_.criterion, w, s, q);
    if (depth >= cfg_.max_depth || entries.size() < 2 * cfg_.min_samples_leaf || parent <= 1e-15 || w <= 0.0)
      return id;

    const auto d = static_cast<std::size_t>(x_.cols());
    std::vector<std::size_t> features;
    if (cfg_.features_per_split == 0 || cfg_.features_per_split >= d) {
      features.resize(d);
      std::iota(features.begin(), features.end(), std::size_t{0});
    } else {
      features = sample_without_replacement(rng_, d, cfg_.features_per_split);
    }

    int best_feature = -1;
    double best_threshold = 0.0, best_gain = 1e-12;
    std::vector<Entry> sorted = entries;
    const std::size_t n = entries.size();
    for (std::size_t f : features) {
      const auto fi = static_cast<Eigen::Index>(f);
      std::sort(sorted.begin(), sorted.end(), [&](const Entry& a, const Entry& b) {
        return x_(static_cast<Eigen::Index>(a.row), fi) < x_(static_cast<Eigen::Index>(b.row), fi);
      });
      double lw = 0.0, ls = 0.0, lq = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto& e = sorted[i];
        const double t = t_[e.row];
        lw += e.weight;
        ls += e.weight * t;
        lq += e.weight * t * t;
        const double a = x_(static_cast<Eigen::Index>(e.row), fi);
        const double b = x_(static_cast<Eigen::Index>(sorted[i + 1].row), fi);
        if (!(a < b)) continue;
        if (i + 1 < cfg_.min_samples_leaf || n - i - 1 < cfg_.min_samples_leaf) continue;
        const double rw = w - lw;
        const double gain = parent - (lw / w) * impurity(cfg_.criterion, lw, ls, lq) -
                            (rw / w) * impurity(cfg_.criterion, rw, s - ls, q - lq);
        if (gain > best_gain + 1e-12 || (best_feature < 0 && gain > best_gain)) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<Entry> left, right;
    const auto bf = static_cast<Eigen::Index>(best_feature);
    for (const auto& e : entries)
      (x_(static_cast<Eigen::Index>(e.row), bf) <= best_threshold ? left : right).push_back(e);
    entries.clear();
    entries.shrink_to_fit();

    tree_.nodes[static_cast<std::size_t>(id)].feature = best_feature;
    tree_.nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
    tree_.nodes[static_cast<std::size_t>(id)].gain = best_gain;
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    tree_.nodes[static_cast<std::size_t>(id)].left = l;
    tree_.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  const Matrix& x_;
  std::span<const double> t_;
  TreeConfig cfg_;
  Rng& rng_;
  Tree tree_;
};

std::vector<double> label_targets(const LabeledTable& table) {
  return {table.labels().begin(), table.labels().end()};
}

/// Caller weights (or 1) times inverse class frequency when `balanced` is set.
std::vector<double> effective_weights(const LabeledTable& table, std::span<const double> sample_weights,
                                      bool balanced) {
  const std::size_t n = table.rows();
  if (!sample_weights.empty() && sample_weights.size() != n)
    throw InvalidArgument("sample weight count differs from row count");
  std::vector<double> w(n, 1.0);
  if (!sample_weights.empty()) std::copy(sample_weights.begin(), sample_weights.end(), w.begin());
  for (double v : w)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("sample weights must be finite and >= 0");
  if (balanced) {
    double pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < n; ++i) (table.labels()[i] == 1 ? pos : neg) += w[i];
    if (pos > 0 && neg > 0) {
      const double total = pos + neg;
      for (std::size_t i = 0; i < n; ++i) w[i] *= total / (2.0 * (table.labels()[i] == 1 ? pos : neg));
    }
  }
  return w;
}

void require_rows(const LabeledTable& table) {
  if (table.rows() == 0) throw DataError("cannot fit on an empty table");
}

TreeConfig tree_config(const ClassifierSpec& spec, std::size_t d) {
  TreeConfig cfg;
  cfg.max_depth = spec.int_param("max_depth");
  cfg.min_samples_leaf = static_cast<std::size_t>(spec.int_param("min_samples_leaf"));
  const int sub = spec.int_param("subsample_features");
  cfg.features_per_split = sub <= 0 ? 0 : std::min<std::size_t>(static_cast<std::size_t>(sub), d);
  return cfg;
}

}  // namespace

Tree grow_tree(const Matrix& x, std::span<const double> targets, std::span<const std::size_t> rows,
               std::span<const double> weights, const TreeConfig& config, Rng& rng) {
  std::vector<Entry> entries(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) entries[i] = {rows[i], weights.empty() ? 1.0 : weights[i]};
  return TreeGrower(x, targets, config, rng).grow(std::move(entries));
}

ClassifierModel fit_decision_tree(const LabeledTable& table, const ClassifierSpec& spec,
                                  std::span<const double> sample_weights) {
  spec.validate();
  require_rows(table);
  const auto w = effective_weights(table, sample_weights, spec.param("balanced") != 0.0);
  const auto targets = label_targets(table);
  std::vector<std::size_t> rows(table.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, "decision_tree"));
  // A single-class table yields a root leaf scoring that class's probability.
  Tree tree = grow_tree(table.matrix(), targets, rows, w, tree_config(spec, table.cols()), rng);
  return ClassifierModel(spec, table.cols(), TreeParams{std::move(tree)});
}

ClassifierModel fit_random_forest(const LabeledTable& table, const ClassifierSpec& spec,
                                  std::span<const double> sample_weights) {
  spec.validate();
  require_rows(table);
  const auto w = effective_weights(table, sample_weights, spec.param("balanced") != 0.0);
  const auto targets = label_targets(table);
  const auto n = table.rows();
  const auto d = table.cols();
  TreeConfig cfg = tree_config(spec, d);
  if (spec.int_param("subsample_features") <= 0)
    cfg.features_per_split = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  const bool bootstrap = spec.param("bootstrap") != 0.0;
  const auto count = static_cast<std::size_t>(spec.int_param("n_estimators"));

  std::vector<Tree> trees(count);
  parallel_for(count, [&](std::size_t t) {
    Rng rng(derive_seed(spec.seed, "forest_tree", t));
    std::vector<std::size_t> rows(n);
    if (bootstrap) {
      for (auto& r : rows) r = uniform_index(rng, n);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    std::vector<double> rw(n);
    for (std::size_t i = 0; i < n; ++i) rw[i] = w[rows[i]];
    trees[t] = grow_tree(table.matrix(), targets, rows, rw, cfg, rng);
  });
  return ClassifierModel(spec, d, ForestParams{std::move(trees)});
}

ClassifierModel fit_gradient_boosting(const LabeledTable& table, const ClassifierSpec& spec,
                                      std::span<const double> sample_weights) {
  spec.validate();
  require_rows(table);
  const auto w = effective_weights(table, sample_weights, spec.param("balanced") != 0.0);
  const auto n = table.rows();
  const auto& y = table.labels();
  double wpos = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wpos += w[i] * y[i];
    wsum += w[i];
  }
  BoostingParams p;
  p.base_rate = wpos / wsum;
  p.learning_rate = spec.param("learning_rate");
  const bool single_class = !table.has_both_classes();
  const double clamped = std::clamp(p.base_rate, 1e-12, 1.0 - 1e-12);
  p.base_margin = std::log(clamped / (1.0 - clamped));

  std::vector<double> margin(n, p.base_margin);
  std::vector<double> prob(n, p.base_rate);
  p.training_loss.push_back(logistic_loss(prob, y, w));
  if (!single_class) {
    TreeConfig cfg = tree_config(spec, table.cols());
    cfg.criterion = SplitCriterion::squared_error;
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::vector<double> residual(n);
    const auto stages = static_cast<std::size_t>(spec.int_param("n_estimators"));
    for (std::size_t s = 0; s < stages; ++s) {
      for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - prob[i];
      Rng rng(derive_seed(spec.seed, "boosting_stage", s));
      Tree tree = grow_tree(table.matrix(), residual, rows, w, cfg, rng);
      for (std::size_t i = 0; i < n; ++i) {
        margin[i] += p.learning_rate * tree.predict(row_span(table.matrix(), static_cast<Eigen::Index>(i)));
        prob[i] = sigmoid(margin[i]);
      }
      p.stages.push_back(std::move(tree));
      p.training_loss.push_back(logistic_loss(prob, y, w));
    }
  }
  return ClassifierModel(spec, table.cols(), std::move(p));
}

// ---------------------------------------------------------------------------

double LinearObjective::loss(const Vector& w, double b) const {
  const Vector m = (features * w).array() + b;
  double total = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double y = targets[static_cast<std::size_t>(i)];
    double l;
    if (hinge) {
      l = std::max(0.0, 1.0 - (2.0 * y - 1.0) * m(i));
    } else {
      // log(1 + e^m) - y m, evaluated stably
      const double z = m(i);
      l = (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - y * z;
    }
    total += weights[static_cast<std::size_t>(i)] * l;
  }
  return total + 0.5 * l2_penalty * w.squaredNorm();
}

void LinearObjective::gradient(const Vector& w, double b, Vector& grad_w, double& grad_b) const {
  const Vector m = (features * w).array() + b;
  Vector coef(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double y = targets[k];
    if (hinge) {
      const double s = 2.0 * y - 1.0;
      coef(i) = s * m(i) < 1.0 ? -s * weights[k] : 0.0;
    } else {
      coef(i) = (sigmoid(m(i)) - y) * weights[k];
    }
  }
  grad_w = features.transpose() * coef + l2_penalty * w;
  grad_b = coef.sum();
}

namespace {

ClassifierModel fit_linear(const LabeledTable& table, const ClassifierSpec& spec, std::span<const double> sample_weights,
                           bool hinge) {
  spec.validate();
  require_rows(table);
  const Matrix& x = table.matrix();
  if (!x.allFinite()) throw DataError("linear models need finite features");
  const auto n = x.rows();
  const auto d = x.cols();

  Vector mean = x.colwise().mean().transpose();
  Vector scale(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = (x.col(j).array() - mean(j)).square().mean();
    const double sd = std::sqrt(var);
    scale(j) = sd > 1e-12 ? 1.0 / sd : 0.0;
  }
  LinearObjective obj;
  obj.features = (x.rowwise() - mean.transpose()) * scale.asDiagonal();
  obj.targets.assign(table.labels().begin(), table.labels().end());
  obj.weights = effective_weights(table, sample_weights, spec.param("balanced") != 0.0);
  const double wsum = std::accumulate(obj.weights.begin(), obj.weights.end(), 0.0);
  if (wsum <= 0.0) throw InvalidArgument("sample weights sum to zero");
  for (auto& v : obj.weights) v /= wsum;
  obj.l2_penalty = spec.param("l2_penalty");
  obj.hinge = hinge;

  Vector w = Vector::Zero(d);
  double b = 0.0;
  Vector gw(d);
  double gb = 0.0;
  const double step = spec.param("learning_rate");
  const int epochs = spec.int_param("epochs");
  LinearParams p;
  p.hinge = hinge;
  for (int e = 0; e < epochs; ++e) {
    obj.gradient(w, b, gw, gb);
    // sub-gradient steps on the hinge loss need a decaying step to settle
    const double eta = hinge ? step / std::sqrt(1.0 + e) : step;
    w -= eta * gw;
    b -= eta * gb;
    p.loss_history.push_back(obj.loss(w, b));
    if (!std::isfinite(p.loss_history.back())) throw TrainingError("linear model diverged; lower learning_rate");
  }
  (void)n;
  p.weights.resize(static_cast<std::size_t>(d));
  p.bias = b;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double wj = w(j) * scale(j);
    p.weights[static_cast<std::size_t>(j)] = wj;
    p.bias -= wj * mean(j);
  }
  return ClassifierModel(spec, static_cast<std::size_t>(d), std::move(p));
}

}  // namespace

ClassifierModel fit_logistic_regression(const LabeledTable& table, const ClassifierSpec& spec,
                                        std::span<const double> sample_weights) {
  return fit_linear(table, spec, sample_weights, false);
}

ClassifierModel fit_linear_svm(const LabeledTable& table, const ClassifierSpec& spec,
                               std::span<const double> sample_weights) {
  return fit_linear(table, spec, sample_weights, true);
}

// ---------------------------------------------------------------------------

ClassifierModel fit_underbagging(const LabeledTable& table, const ClassifierSpec& spec) {
  spec.validate();
  require_rows(table);
  const auto count = static_cast<std::size_t>(spec.int_param("n_estimators"));
  std::vector<ClassifierModel> members(count);
  parallel_for(count, [&](std::size_t m) {
    ResampleSpec rs;
    rs.method = ResampleMethod::random_undersample;
    rs.target_ratio = spec.param("target_ratio");
    rs.seed = derive_seed(spec.seed, "underbagging_sample", m);
    const auto sample = random_undersample(table, rs);
    members[m] = fit(sample, spec.base_spec(derive_seed(spec.seed, "underbagging_member", m)));
  });
  return ClassifierModel(spec, table.cols(), BaggingParams{std::move(members)});
}

namespace {

/// Weighted sampling without replacement (Efraimidis-Spirakis keys).
std::vector<std::size_t> weighted_subset(Rng& rng, const std::vector<std::size_t>& pool,
                                         const std::vector<double>& weights, std::size_t count) {
  std::vector<std::pair<double, std::size_t>> keys;
  keys.reserve(pool.size());
  for (std::size_t idx : pool) {
    double u = uniform01(rng);
    while (u <= 0.0) u = uniform01(rng);
    const double w = weights[idx];
    const double key = w > 0 ? std::log(u) / w : -std::numeric_limits<double>::infinity();
    keys.emplace_back(key, idx);
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(count), keys.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(keys[i].second);
  return out;
}

}  // namespace

ClassifierModel fit_rusboost(const LabeledTable& table, const ClassifierSpec& spec, BoostTrace* trace) {
  spec.validate();
  require_rows(table);
  if (!table.has_both_classes()) throw DataError("RUSBoost needs both classes");
  const auto n = table.rows();
  const auto& y = table.labels();
  const auto minority = table.positives() <= table.negatives() ? table.indices_of(1) : table.indices_of(0);
  const auto majority = table.positives() <= table.negatives() ? table.indices_of(0) : table.indices_of(1);
  const auto want = majority_target(minority.size(), spec.param("target_ratio"));
  if (want > majority.size()) throw DataError("target_ratio needs more majority rows than exist");

  constexpr double kMinError = 1e-6;
  std::vector<double> dist(n, 1.0 / static_cast<double>(n));
  AdaBoostParams p;
  const auto stages = static_cast<std::size_t>(spec.int_param("n_estimators"));
  const int retries = spec.int_param("retries");
  for (std::size_t s = 0; s < stages; ++s) {
    BoostStage stage;
    for (int attempt = 0; attempt <= retries; ++attempt) {
      stage.attempts = attempt + 1;
      Rng rng(derive_seed(spec.seed, "rusboost_stage", s * 1000 + static_cast<std::size_t>(attempt)));
      auto rows = weighted_subset(rng, majority, dist, want);
      rows.insert(rows.end(), minority.begin(), minority.end());
      std::sort(rows.begin(), rows.end());
      const auto sample = table.subset(rows);
      std::vector<double> sw(rows.size());
      double sws = 0.0;
      for (std::size_t i = 0; i < rows.size(); ++i) sws += sw[i] = dist[rows[i]];
      for (auto& v : sw) v = sws > 0 ? v / sws * static_cast<double>(rows.size()) : 1.0;
      auto member = fit(sample, spec.base_spec(derive_seed(spec.seed, "rusboost_member", s * 1000 + attempt)), sw);
      const auto h = predict(member, table.matrix());
      double eps = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (h[i] != y[i]) eps += dist[i];
      stage.epsilon = eps;
      if (eps >= 0.5) continue;
      const double e = std::max(eps, kMinError);
      stage.alpha = 0.5 * std::log((1.0 - e) / e);
      stage.accepted = true;
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double agree = (h[i] == y[i]) ? 1.0 : -1.0;
        dist[i] *= std::exp(-stage.alpha * agree);
        total += dist[i];
      }
      for (auto& v : dist) v /= total;
      p.members.push_back(std::move(member));
      p.alphas.push_back(stage.alpha);
      if (trace) {
        trace->weights.push_back(dist);
        trace->training_rows.push_back(rows);
      }
      break;
    }
    p.stages.push_back(stage);
  }
  if (p.members.empty()) throw TrainingError("RUSBoost discarded every stage (weighted error >= 0.5)");
  return ClassifierModel(spec, table.cols(), std::move(p));
}

ClassifierModel fit(const LabeledTable& table, const ClassifierSpec& spec, std::span<const double> sample_weights) {
  switch (spec.kind) {
    case ClassifierKind::decision_tree: return fit_decision_tree(table, spec, sample_weights);
    case ClassifierKind::random_forest: return fit_random_forest(table, spec, sample_weights);
    case ClassifierKind::gradient_boosting: return fit_gradient_boosting(table, spec, sample_weights);
    case ClassifierKind::logistic_regression: return fit_logistic_regression(table, spec, sample_weights);
    case ClassifierKind::linear_svm: return fit_linear_svm(table, spec, sample_weights);
    case ClassifierKind::underbagging: return fit_underbagging(table, spec);
    case ClassifierKind::rusboost: return fit_rusboost(table, spec);
  }
  throw InvalidArgument("unknown classifier kind");
}

// ---------------------------------------------------------------------------

namespace {

void check_width(const ClassifierModel& model, const Matrix& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.feature_count())
    throw InvalidArgument(fmt::format("model expects {} features, got {}", model.feature_count(), rows.cols()));
}

std::vector<double> linear_margins(const LinearParams& p, const Matrix& rows) {
  const Eigen::Map<const Vector> w(p.weights.data(), static_cast<Eigen::Index>(p.weights.size()));
  const Vector m = (rows * w).array() + p.bias;
  return {m.data(), m.data() + m.size()};
}

}  // namespace

std::vector<double> decision_values(const ClassifierModel& model, const Matrix& rows) {
  check_width(model, rows);
  const auto n = static_cast<std::size_t>(rows.rows());
  std::vector<double> out(n, 0.0);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, TreeParams>) {
          for (std::size_t i = 0; i < n; ++i) out[i] = p.tree.predict(row_span(rows, static_cast<Eigen::Index>(i)));
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (const auto& t : p.trees) s += t.predict(row_span(rows, static_cast<Eigen::Index>(i)));
            out[i] = s / static_cast<double>(p.trees.size());
          }
        } else if constexpr (std::is_same_v<P, BoostingParams>) {
          for (std::size_t i = 0; i < n; ++i) {
            double m = p.base_margin;
            for (const auto& t : p.stages) m += p.learning_rate * t.predict(row_span(rows, static_cast<Eigen::Index>(i)));
            out[i] = m;
          }
        } else if constexpr (std::is_same_v<P, LinearParams>) {
          out = linear_margins(p, rows);
        } else if constexpr (std::is_same_v<P, BaggingParams>) {
          for (const auto& m : p.members) {
            const auto s = score(m, rows);
            for (std::size_t i = 0; i < n; ++i) out[i] += s[i];
          }
          for (auto& v : out) v /= static_cast<double>(p.members.size());
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          for (std::size_t k = 0; k < p.members.size(); ++k) {
            const auto h = predict(p.members[k], rows);
            for (std::size_t i = 0; i < n; ++i) out[i] += p.alphas[k] * (2.0 * h[i] - 1.0);
          }
        }
      },
      model.params());
  return out;
}

std::vector<double> score(const ClassifierModel& model, const Matrix& rows) {
  auto values = decision_values(model, rows);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, BoostingParams>) {
          if (p.stages.empty())
            std::fill(values.begin(), values.end(), p.base_rate);
          else
            for (auto& v : values) v = sigmoid(v);
        } else if constexpr (std::is_same_v<P, LinearParams>) {
          if (!p.hinge) {
            for (auto& v : values) v = sigmoid(v);
          } else if (!values.empty()) {
            const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
            const double a = *lo, b = *hi;
            for (auto& v : values) v = b > a ? (v - a) / (b - a) : 0.5;
          }
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          for (auto& v : values) v = sigmoid(v);
        } else {
          for (auto& v : values) v = std::clamp(v, 0.0, 1.0);
        }
      },
      model.params());
  return values;
}

std::vector<int> predict(const ClassifierModel& model, const Matrix& rows) {
  if (const auto* lin = std::get_if<LinearParams>(&model.params()); lin && lin->hinge) {
    const auto m = decision_values(model, rows);
    std::vector<int> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] >= 0.0 ? 1 : 0;
    return out;
  }
  return predict(model, rows, 0.5);
}

std::vector<int> predict(const ClassifierModel& model, const Matrix& rows, double threshold) {
  const auto s = score(model, rows);
  std::vector<int> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] >= threshold ? 1 : 0;
  return out;
}

}  // namespace parcel
