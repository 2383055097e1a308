#include "parcel/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "parcel/error.hpp"
#include "parcel/random.hpp"

namespace parcel {

std::string_view to_string(ResampleMethod m) {
  return m == ResampleMethod::near_miss_1 ? "near_miss_1" : "random_undersample";
}

ResampleMethod resample_method_from_string(std::string_view name) {
  if (name == "random_undersample" || name == "ru") return ResampleMethod::random_undersample;
  if (name == "near_miss_1" || name == "nm" || name == "near_miss") return ResampleMethod::near_miss_1;
  throw InvalidArgument(fmt::format("unknown resample method '{}'", name));
}

void ResampleSpec::validate() const {
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) throw InvalidArgument("target_ratio must lie in (0,1]");
  if (k_neighbors < 1) throw InvalidArgument("k_neighbors must be >= 1");
}

std::size_t majority_target(std::size_t minority, double target_ratio) {
  // The small slack keeps ratios like 1/3 from rounding up an extra row.
  const double exact = static_cast<double>(minority) / target_ratio;
  return static_cast<std::size_t>(std::ceil(exact - 1e-9 * exact));
}

namespace {

struct ClassIndex {
  std::vector<std::size_t> minority, majority;
  int minority_label = 1;
};

ClassIndex split_classes(const LabeledTable& table) {
  if (!table.has_both_classes()) throw DataError("resampling needs both classes present");
  ClassIndex ci;
  auto pos = table.indices_of(1);
  auto neg = table.indices_of(0);
  if (pos.size() <= neg.size()) {
    ci.minority = std::move(pos);
    ci.majority = std::move(neg);
  } else {
    ci.minority = std::move(neg);
    ci.majority = std::move(pos);
    ci.minority_label = 0;
  }
  return ci;
}

std::vector<std::size_t> merge(std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

}  // namespace

std::vector<std::size_t> random_undersample_indices(const LabeledTable& table, const ResampleSpec& spec) {
  spec.validate();
  const auto ci = split_classes(table);
  const auto want = majority_target(ci.minority.size(), spec.target_ratio);
  if (want > ci.majority.size())
    throw DataError(fmt::format("target_ratio {} needs {} majority rows but only {} exist", spec.target_ratio, want,
                                ci.majority.size()));
  Rng rng(derive_seed(spec.seed, "random_undersample"));
  std::vector<std::size_t> kept;
  for (auto k : sample_without_replacement(rng, ci.majority.size(), want)) kept.push_back(ci.majority[k]);
  return merge(std::move(kept), ci.minority);
}

std::vector<double> near_miss_distances(const LabeledTable& table, const std::vector<std::size_t>& majority,
                                        const std::vector<std::size_t>& minority, int k) {
  const auto& x = table.matrix();
  const auto kk = static_cast<std::size_t>(k);
  std::vector<double> out(majority.size());
  std::vector<double> d2(minority.size());
  for (std::size_t i = 0; i < majority.size(); ++i) {
    const auto a = x.row(static_cast<Eigen::Index>(majority[i]));
    for (std::size_t m = 0; m < minority.size(); ++m)
      d2[m] = (a - x.row(static_cast<Eigen::Index>(minority[m]))).squaredNorm();
    std::partial_sort(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(kk), d2.end());
    double sum = 0.0;
    for (std::size_t m = 0; m < kk; ++m) sum += std::sqrt(d2[m]);
    out[i] = sum / static_cast<double>(kk);
  }
  return out;
}

std::vector<std::size_t> near_miss_1_indices(const LabeledTable& table, const ResampleSpec& spec) {
  spec.validate();
  const auto ci = split_classes(table);
  if (ci.minority.size() < static_cast<std::size_t>(spec.k_neighbors))
    throw DataError(fmt::format("NearMiss-1 needs at least k={} minority rows, found {}", spec.k_neighbors,
                                ci.minority.size()));
  const auto want = majority_target(ci.minority.size(), spec.target_ratio);
  if (want > ci.majority.size())
    throw DataError(fmt::format("target_ratio {} needs {} majority rows but only {} exist", spec.target_ratio, want,
                                ci.majority.size()));
  const auto dist = near_miss_distances(table, ci.majority, ci.minority, spec.k_neighbors);
  std::vector<std::size_t> order(ci.majority.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // majority indices are ascending, so the position doubles as the row-index tie-break
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < want; ++i) kept.push_back(ci.majority[order[i]]);
  return merge(std::move(kept), ci.minority);
}

std::vector<std::size_t> resample_indices(const LabeledTable& table, const ResampleSpec& spec) {
  return spec.method == ResampleMethod::near_miss_1 ? near_miss_1_indices(table, spec)
                                                     : random_undersample_indices(table, spec);
}

LabeledTable random_undersample(const LabeledTable& table, const ResampleSpec& spec) {
  return table.subset(random_undersample_indices(table, spec));
}

LabeledTable near_miss_1(const LabeledTable& table, const ResampleSpec& spec) {
  return table.subset(near_miss_1_indices(table, spec));
}

LabeledTable resample(const LabeledTable& table, const ResampleSpec& spec) {
  return table.subset(resample_indices(table, spec));
}

}  // namespace parcel
