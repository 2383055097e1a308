#include "parcel/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include <fmt/format.h>

#include "parcel/error.hpp"
#include "parcel/parallel.hpp"
#include "parcel/random.hpp"

namespace parcel {

Scorer make_scorer(const ClassifierModel& model) {
  auto shared = std::make_shared<const ClassifierModel>(model);
  return [shared](const Matrix& rows) { return score(*shared, rows); };
}

namespace {

using Coalition = std::vector<char>;

void check_inputs(const Matrix& background, std::span<const double> row) {
  if (background.rows() == 0) throw InvalidArgument("background must not be empty");
  if (static_cast<std::size_t>(background.cols()) != row.size())
    throw InvalidArgument(fmt::format("row has {} features, background has {}", row.size(), background.cols()));
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// v(S): the row's values on S, background values elsewhere, averaged.
double coalition_value(const Scorer& scorer, const Matrix& background, std::span<const double> row,
                       const Coalition& in) {
  Matrix m = background;
  for (std::size_t j = 0; j < row.size(); ++j)
    if (in[j]) m.col(static_cast<Eigen::Index>(j)).setConstant(row[j]);
  return mean(scorer(m));
}

double single_score(const Scorer& scorer, std::span<const double> row) {
  Matrix m(1, static_cast<Eigen::Index>(row.size()));
  std::copy(row.begin(), row.end(), m.data());
  return scorer(m).at(0);
}

}  // namespace

AttributionResult shapley_exact(const Scorer& scorer, const Matrix& background, std::span<const double> row) {
  check_inputs(background, row);
  const std::size_t d = row.size();
  if (d > kMaxExactFeatures)
    throw InvalidArgument(fmt::format("exact Shapley supports at most {} features, got {}", kMaxExactFeatures, d));
  const std::size_t subsets = std::size_t{1} << d;
  std::vector<double> v(subsets);
  parallel_for(subsets, [&](std::size_t mask) {
    Coalition in(d);
    for (std::size_t j = 0; j < d; ++j) in[j] = static_cast<char>((mask >> j) & 1U);
    v[mask] = coalition_value(scorer, background, row, in);
  });

  AttributionResult r;
  r.base_value = v[0];
  r.explained_score = single_score(scorer, row);
  v[subsets - 1] = r.explained_score;

  std::vector<double> fact(d + 1, 1.0);
  for (std::size_t k = 1; k <= d; ++k) fact[k] = fact[k - 1] * static_cast<double>(k);
  r.values.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      if (mask & bit) continue;
      const auto s = static_cast<std::size_t>(std::popcount(mask));
      const double w = fact[s] * fact[d - s - 1] / fact[d];
      r.values[j] += w * (v[mask | bit] - v[mask]);
    }
  }
  return r;
}

AttributionResult shapley_sample(const Scorer& scorer, const Matrix& background, std::span<const double> row,
                                 std::size_t n_permutations, std::uint64_t seed) {
  check_inputs(background, row);
  if (n_permutations < 1) throw InvalidArgument("n_permutations must be >= 1");
  const std::size_t d = row.size();

  std::vector<std::vector<std::size_t>> orders(n_permutations);
  for (std::size_t p = 0; p < n_permutations; ++p) {
    Rng rng(derive_seed(seed, "shapley_permutation", p));
    orders[p].resize(d);
    std::iota(orders[p].begin(), orders[p].end(), std::size_t{0});
    shuffle(orders[p], rng);
  }

  // Distinct intermediate coalitions are evaluated once.
  std::map<Coalition, std::size_t> slot;
  std::vector<Coalition> pending;
  for (const auto& order : orders) {
    Coalition in(d, 0);
    for (std::size_t k = 0; k + 1 < d; ++k) {
      in[order[k]] = 1;
      if (slot.emplace(in, pending.size()).second) pending.push_back(in);
    }
  }
  std::vector<double> values(pending.size());
  parallel_for(pending.size(), [&](std::size_t i) { values[i] = coalition_value(scorer, background, row, pending[i]); });

  AttributionResult r;
  r.base_value = mean(scorer(background));
  r.explained_score = single_score(scorer, row);
  r.values.assign(d, 0.0);
  for (const auto& order : orders) {
    Coalition in(d, 0);
    double prev = r.base_value;
    for (std::size_t k = 0; k < d; ++k) {
      in[order[k]] = 1;
      const double cur = k + 1 == d ? r.explained_score : values[slot.at(in)];
      r.values[order[k]] += cur - prev;
      prev = cur;
    }
  }
  for (auto& x : r.values) x /= static_cast<double>(n_permutations);
  return r;
}

Matrix background_sample(const LabeledTable& table, std::size_t n, std::uint64_t seed) {
  if (table.rows() == 0) throw InvalidArgument("cannot sample a background from an empty table");
  if (n == 0) throw InvalidArgument("background size must be >= 1");
  if (n >= table.rows()) return table.matrix();
  std::vector<std::size_t> chosen;
  const auto pos = table.indices_of(1);
  const auto neg = table.indices_of(0);
  auto take_pos = static_cast<std::size_t>(std::llround(static_cast<double>(n) * static_cast<double>(pos.size()) /
                                                        static_cast<double>(table.rows())));
  take_pos = std::min(take_pos, pos.size());
  const std::size_t take_neg = std::min(n - take_pos, neg.size());
  Rng rng(derive_seed(seed, "background_sample"));
  for (auto i : sample_without_replacement(rng, pos.size(), take_pos)) chosen.push_back(pos[i]);
  for (auto i : sample_without_replacement(rng, neg.size(), take_neg)) chosen.push_back(neg[i]);
  std::sort(chosen.begin(), chosen.end());
  return table.subset(chosen).matrix();
}

Matrix attribution_matrix(const Scorer& scorer, const Matrix& background, const Matrix& rows,
                          std::size_t n_permutations, std::uint64_t seed) {
  Matrix out(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const auto r = shapley_sample(scorer, background, row_span(rows, i), n_permutations,
                                  derive_seed(seed, "attribution_row", static_cast<std::uint64_t>(i)));
    for (Eigen::Index j = 0; j < rows.cols(); ++j) out(i, j) = r.values[static_cast<std::size_t>(j)];
  }
  return out;
}

std::vector<ImportanceEntry> importance_summary(const Matrix& attributions, const std::vector<std::string>& names) {
  if (attributions.rows() == 0 || attributions.cols() == 0) throw InvalidArgument("attributions must not be empty");
  if (names.size() != static_cast<std::size_t>(attributions.cols()))
    throw InvalidArgument("one feature name per attribution column is required");
  std::vector<ImportanceEntry> out;
  for (Eigen::Index j = 0; j < attributions.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    out.push_back({k, names[k], attributions.col(j).cwiseAbs().mean()});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ImportanceEntry& a, const ImportanceEntry& b) { return a.mean_abs > b.mean_abs; });
  return out;
}

namespace {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd x = a.array() - a.mean();
  const Eigen::VectorXd y = b.array() - b.mean();
  const double den = std::sqrt(x.squaredNorm() * y.squaredNorm());
  return den > 0.0 ? x.dot(y) / den : 0.0;
}

}  // namespace

DependenceCurve partial_dependence(const Scorer& scorer, const LabeledTable& table, const std::string& feature,
                                   std::vector<double> grid, const Matrix* attributions) {
  const auto col = table.column_index(feature);
  if (!col) throw InvalidArgument(fmt::format("unknown feature '{}'", feature));
  if (grid.empty()) throw InvalidArgument("grid must not be empty");
  if (table.rows() == 0) throw InvalidArgument("table must not be empty");
  std::sort(grid.begin(), grid.end());

  DependenceCurve c;
  c.feature = feature;
  c.grid = grid;
  c.mean_score.resize(grid.size());
  const auto j = static_cast<Eigen::Index>(*col);
  parallel_for(grid.size(), [&](std::size_t g) {
    Matrix m = table.matrix();
    m.col(j).setConstant(grid[g]);
    c.mean_score[g] = mean(scorer(m));
  });

  if (attributions) {
    if (attributions->rows() != static_cast<Eigen::Index>(table.rows()) || attributions->cols() <= j)
      throw InvalidArgument("attribution matrix does not match the table");
    const Eigen::VectorXd phi = attributions->col(j);
    double best = -1.0;
    for (Eigen::Index k = 0; k < table.matrix().cols(); ++k) {
      if (k == j) continue;
      const double r = std::abs(pearson(phi, table.matrix().col(k)));
      if (r > best) {
        best = r;
        c.interaction_feature = table.columns()[static_cast<std::size_t>(k)];
      }
    }
  }
  return c;
}

std::vector<double> default_grid(const LabeledTable& table, const std::string& feature, std::size_t points) {
  const auto col = table.column_index(feature);
  if (!col) throw InvalidArgument(fmt::format("unknown feature '{}'", feature));
  if (points < 2) throw InvalidArgument("grid needs at least 2 points");
  std::vector<double> v(table.rows());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = table.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*col));
  std::sort(v.begin(), v.end());
  auto distinct = v;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() <= points) return distinct;
  std::vector<double> grid;
  for (std::size_t k = 0; k < points; ++k) {
    const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(k) * static_cast<double>(v.size() - 1) /
                                                           static_cast<double>(points - 1)));
    if (grid.empty() || v[idx] != grid.back()) grid.push_back(v[idx]);
  }
  return grid;
}

}  // namespace parcel
