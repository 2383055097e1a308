#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "parcel/error.hpp"
#include "parcel/resample.hpp"

using namespace parcel;

namespace {

LabeledTable imbalanced(std::size_t neg, std::size_t pos) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < neg + pos; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i >= neg ? 1 : 0);
  }
  return support::table(rows, labels);
}

std::set<std::uint64_t> ids_with(const LabeledTable& t, int label) {
  std::set<std::uint64_t> out;
  for (std::size_t i = 0; i < t.rows(); ++i)
    if (t.labels()[i] == label) out.insert(t.row_ids()[i]);
  return out;
}

}  // namespace

TEST_CASE("random undersample forced counts") {
  const auto t = imbalanced(1000, 10);
  ResampleSpec spec;
  spec.seed = 3;
  auto out = random_undersample(t, spec);
  CHECK(out.positives() == 10);
  CHECK(out.negatives() == 10);
  spec.target_ratio = 0.5;
  out = random_undersample(t, spec);
  CHECK(out.negatives() == 20);
  CHECK(ids_with(out, 1) == ids_with(t, 1));
  spec.target_ratio = 0.3;
  CHECK(random_undersample(t, spec).negatives() == 34);  // ceil(10 / 0.3)
}

TEST_CASE("random undersample is seeded and never duplicates rows") {
  const auto t = imbalanced(1000, 10);
  ResampleSpec a;
  a.seed = 1;
  ResampleSpec b = a;
  b.seed = 2;
  const auto ia = random_undersample_indices(t, a);
  CHECK(ia == random_undersample_indices(t, a));
  CHECK(ia != random_undersample_indices(t, b));
  CHECK(std::set<std::size_t>(ia.begin(), ia.end()).size() == ia.size());
}

TEST_CASE("random undersample errors when the ratio needs too many majority rows") {
  const auto t = imbalanced(15, 10);
  ResampleSpec spec;
  spec.target_ratio = 0.5;
  CHECK_THROWS_AS(random_undersample(t, spec), DataError);
  ResampleSpec bad;
  bad.target_ratio = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("near miss keeps the closest majority rows") {
  // minority at 0, majority at 1, 2, 10; keep 2
  const auto t = support::table({{0.0}, {1.0}, {2.0}, {10.0}}, {1, 0, 0, 0});
  ResampleSpec spec;
  spec.method = ResampleMethod::near_miss_1;
  spec.k_neighbors = 1;
  spec.target_ratio = 0.5;
  const auto out = near_miss_1(t, spec);
  CHECK(ids_with(out, 0) == std::set<std::uint64_t>{1, 2});
  CHECK(ids_with(out, 1) == std::set<std::uint64_t>{0});
}

TEST_CASE("near miss ties fall to the smallest row index") {
  // majority rows all at distance 1 from the single minority row
  const auto t = support::table({{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}, {0.0, 0.0}}, {0, 0, 0, 0, 1});
  ResampleSpec spec;
  spec.method = ResampleMethod::near_miss_1;
  spec.k_neighbors = 1;
  spec.target_ratio = 0.5;
  CHECK(ids_with(near_miss_1(t, spec), 0) == std::set<std::uint64_t>{0, 1});
}

TEST_CASE("near miss equals a brute-force distance scan") {
  const auto t = support::blobs(200, 20, 3, 2.0, 17);
  ResampleSpec spec;
  spec.method = ResampleMethod::near_miss_1;
  spec.k_neighbors = 3;
  const auto& x = t.matrix();
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < 200; ++i) {
    std::vector<double> d;
    for (std::size_t j = 200; j < 220; ++j)
      d.push_back((x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm());
    std::sort(d.begin(), d.end());
    scored.push_back({(d[0] + d[1] + d[2]) / 3.0, i});
  }
  std::sort(scored.begin(), scored.end());
  std::set<std::uint64_t> expected;
  for (std::size_t k = 0; k < 20; ++k) expected.insert(scored[k].second);
  const auto out = near_miss_1(t, spec);
  CHECK(ids_with(out, 0) == expected);
  CHECK(ids_with(out, 1) == ids_with(t, 1));
  spec.seed = 1234;
  CHECK(ids_with(near_miss_1(t, spec), 0) == expected);
}

TEST_CASE("near miss needs at least k minority rows") {
  const auto t = imbalanced(20, 2);
  ResampleSpec spec;
  spec.method = ResampleMethod::near_miss_1;
  spec.k_neighbors = 3;
  CHECK_THROWS_AS(near_miss_1(t, spec), DataError);
}

TEST_CASE("method names and aliases") {
  CHECK(resample_method_from_string("ru") == ResampleMethod::random_undersample);
  CHECK(resample_method_from_string("nm") == ResampleMethod::near_miss_1);
  CHECK(resample_method_from_string("near_miss_1") == ResampleMethod::near_miss_1);
  CHECK_THROWS_AS(resample_method_from_string("smote"), InvalidArgument);
  CHECK(majority_target(10, 1.0) == 10);
  CHECK(majority_target(10, 0.5) == 20);
}
