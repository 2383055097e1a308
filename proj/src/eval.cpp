#include "parcel/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "parcel/error.hpp"
#include "parcel/random.hpp"

namespace parcel {

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.size() != predictions.size())
    throw InvalidArgument(fmt::format("{} labels vs {} predictions", labels.size(), predictions.size()));
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool actual = labels[i] == 1;
    const bool pred = predictions[i] == 1;
    if (actual && pred)
      ++cm.tp;
    else if (actual)
      ++cm.fn;
    else if (pred)
      ++cm.fp;
    else
      ++cm.tn;
  }
  return cm;
}

MetricReport metrics(const ConfusionMatrix& cm) {
  const auto p = cm.positives();
  const auto n = cm.negatives();
  if (p == 0 && n == 0) throw InvalidArgument("confusion matrix is empty");
  MetricReport r;
  if (cm.tp + cm.fp > 0)
    r.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  else
    r.diagnostics.emplace_back("precision undefined: no positive predictions");
  if (p > 0)
    r.recall = static_cast<double>(cm.tp) / static_cast<double>(p);
  else
    r.diagnostics.emplace_back("recall undefined: no actual positives");
  if (n > 0)
    r.tnr = static_cast<double>(cm.tn) / static_cast<double>(n);
  else
    r.diagnostics.emplace_back("tnr undefined: no actual negatives");
  if (p > 0 && n > 0) {
    const double num = static_cast<double>(cm.tp * n + cm.tn * p);
    r.balanced_accuracy = num / (2.0 * static_cast<double>(p) * static_cast<double>(n));
  }
  return r;
}

MetricReport metrics(const ConfusionMatrix& cm, std::span<const double> scores, std::span<const int> labels) {
  auto r = metrics(cm);
  if (cm.positives() > 0 && cm.negatives() > 0) r.roc_auc = roc_auc(scores, labels);
  return r;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  for (double s : scores)
    if (std::isnan(s)) throw InvalidArgument("NaN score");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Walk tie groups in ascending score; twice the U statistic stays an integer.
  std::uint64_t negatives_below = 0, pos = 0, neg = 0, twice_u = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t gp = 0, gn = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? gp : gn)++;
      ++j;
    }
    twice_u += gp * (2 * negatives_below + gn);
    negatives_below += gn;
    pos += gp;
    neg += gn;
    i = j;
  }
  if (pos == 0 || neg == 0) throw InvalidArgument("ROC-AUC needs both classes");
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<int> threshold_labels(std::span<const double> scores, double threshold) {
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold ? 1 : 0;
  return out;
}

std::vector<Fold> stratified_kfold(std::span<const int> labels, int folds, int repeats, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("folds must be >= 2");
  if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  const auto minority = std::min(pos.size(), neg.size());
  if (minority < static_cast<std::size_t>(folds))
    throw DataError(fmt::format("minority count {} is below fold count {}", minority, folds));

  std::vector<Fold> out;
  const auto k = static_cast<std::size_t>(folds);
  for (int r = 0; r < repeats; ++r) {
    Rng rng(derive_seed(seed, "stratified_kfold", static_cast<std::uint64_t>(r)));
    auto p = pos;
    auto q = neg;
    shuffle(p, rng);
    shuffle(q, rng);
    std::vector<std::size_t> assign(labels.size());
    // Deal positives round-robin, then continue the rotation with negatives so fold sizes stay within one.
    std::size_t slot = 0;
    for (auto i : p) assign[i] = slot++ % k;
    for (auto i : q) assign[i] = slot++ % k;
    for (std::size_t f = 0; f < k; ++f) {
      Fold fold;
      for (std::size_t i = 0; i < labels.size(); ++i) (assign[i] == f ? fold.test : fold.train).push_back(i);
      out.push_back(std::move(fold));
    }
  }
  return out;
}

std::vector<Fold> stratified_kfold(const LabeledTable& table, int folds, int repeats, std::uint64_t seed) {
  return stratified_kfold(table.labels(), folds, repeats, seed);
}

// ---------------------------------------------------------------------------

std::string_view to_string(Objective o) { return o == Objective::roc_auc ? "roc_auc" : "balanced_accuracy"; }

Objective objective_from_string(std::string_view name) {
  if (name == "balanced_accuracy" || name == "ba") return Objective::balanced_accuracy;
  if (name == "roc_auc" || name == "auc") return Objective::roc_auc;
  throw InvalidArgument(fmt::format("unknown objective '{}'", name));
}

void SearchSpec::validate() const {
  if (n_candidates < 1) throw InvalidArgument("n_candidates must be >= 1");
  if (folds < 2) throw InvalidArgument("folds must be >= 2");
  if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
  for (const auto& [name, range] : ranges) {
    std::visit(
        [&](const auto& r) {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, ChoiceRange>) {
            if (r.values.empty()) throw InvalidArgument(fmt::format("range '{}' has no choices", name));
          } else if constexpr (std::is_same_v<R, LogUniformRange>) {
            if (!(r.lo > 0 && r.hi >= r.lo)) throw InvalidArgument(fmt::format("log range '{}' invalid", name));
          } else {
            if (!(r.hi >= r.lo)) throw InvalidArgument(fmt::format("range '{}' has hi < lo", name));
          }
        },
        range);
  }
}

std::vector<Candidate> sample_candidates(const SearchSpec& space) {
  space.validate();
  Rng rng(derive_seed(space.seed, "random_search"));
  std::vector<Candidate> out;
  for (int c = 0; c < space.n_candidates; ++c) {
    Candidate cand;
    for (const auto& [name, range] : space.ranges) {
      cand[name] = std::visit(
          [&](const auto& r) -> double {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, ChoiceRange>) {
              return r.values[uniform_index(rng, r.values.size())];
            } else if constexpr (std::is_same_v<R, IntRange>) {
              return static_cast<double>(r.lo + static_cast<long>(uniform_index(rng, static_cast<std::size_t>(r.hi - r.lo + 1))));
            } else if constexpr (std::is_same_v<R, UniformRange>) {
              return r.lo + (r.hi - r.lo) * uniform01(rng);
            } else {
              return std::exp(std::log(r.lo) + (std::log(r.hi) - std::log(r.lo)) * uniform01(rng));
            }
          },
          range);
    }
    out.push_back(std::move(cand));
  }
  return out;
}

SearchResult random_search(const SearchSpec& space, const std::function<double(const Candidate&)>& evaluate) {
  SearchResult result;
  bool any = false;
  for (auto& cand : sample_candidates(space)) {
    TraceEntry entry;
    entry.candidate = cand;
    try {
      const double s = evaluate(cand);
      if (!std::isfinite(s)) throw TrainingError("objective is not finite");
      entry.score = s;
      if (!any || s > result.best_score) {
        result.best_score = s;
        result.best = cand;
        result.best_index = result.trace.size();
        any = true;
      }
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    result.trace.push_back(std::move(entry));
  }
  if (!any) {
    throw TrainingError(fmt::format("random search: all {} candidates failed (first error: {})", result.trace.size(),
                                    result.trace.empty() ? "" : result.trace.front().error));
  }
  return result;
}

double objective_value(Objective objective, std::span<const int> labels, std::span<const int> predictions,
                       std::span<const double> scores) {
  if (objective == Objective::roc_auc) return roc_auc(scores, labels);
  const auto r = metrics(confusion(labels, predictions));
  if (!r.balanced_accuracy) throw DataError("balanced accuracy undefined on a single-class fold");
  return *r.balanced_accuracy;
}

}  // namespace parcel
