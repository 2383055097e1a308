#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"

#include "parcel/parallel.hpp"
#include "parcel/random.hpp"

using namespace parcel;

TEST_CASE("derived seeds are stable and separate stages and ordinals") {
  CHECK(derive_seed(42, "split") == derive_seed(42, "split"));
  CHECK(derive_seed(42, "split") != derive_seed(42, "resample"));
  CHECK(derive_seed(42, "split", 0) != derive_seed(42, "split", 1));
  CHECK(derive_seed(42, "split") != derive_seed(43, "split"));
}

TEST_CASE("uniform01 stays in [0,1) and has mean near one half") {
  Rng rng(1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(rng);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000.0 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("uniform_index covers the range evenly") {
  Rng rng(2);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[uniform_index(rng, 7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("standard_normal moments") {
  Rng rng(3);
  double s = 0, ss = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    s += z;
    ss += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(ss / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("shuffle is a permutation and reproducible") {
  std::vector<int> a(50), b;
  std::iota(a.begin(), a.end(), 0);
  b = a;
  Rng r1(9), r2(9);
  shuffle(a, r1);
  shuffle(b, r2);
  CHECK(a == b);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("sample_without_replacement returns sorted distinct indices") {
  Rng rng(4);
  const auto s = sample_without_replacement(rng, 1000, 37);
  CHECK(s.size() == 37);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 37);
  CHECK(s.back() < 1000);
  Rng all(5);
  CHECK(sample_without_replacement(all, 10, 10).size() == 10);
}

TEST_CASE("weighted_index follows the weights") {
  Rng rng(6);
  const std::vector<double> cumulative{1.0, 1.0, 4.0};  // weights 1, 0, 3
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 40000; ++i) ++counts[weighted_index(rng, cumulative)];
  CHECK(counts[1] == 0);
  CHECK(counts[0] / 40000.0 == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("parallel_for results do not depend on the thread count") {
  auto run = [](int threads) {
    set_thread_count(threads);
    std::vector<double> out(101);
    parallel_for(out.size(), [&](std::size_t i) {
      Rng rng(derive_seed(7, "cell", i));
      out[i] = uniform01(rng);
    });
    set_thread_count(1);
    return out;
  };
  CHECK(run(1) == run(4));
}

TEST_CASE("parallel_for rethrows worker exceptions") {
  set_thread_count(3);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  set_thread_count(1);
}
