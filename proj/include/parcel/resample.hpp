#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "parcel/tabular.hpp"

namespace parcel {

enum class ResampleMethod { random_undersample, near_miss_1 };

std::string_view to_string(ResampleMethod m);
ResampleMethod resample_method_from_string(std::string_view name);

struct ResampleSpec {
  ResampleMethod method = ResampleMethod::random_undersample;
  /// Desired minority/majority count ratio after resampling.
  double target_ratio = 1.0;
  int k_neighbors = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

/// ceil(minority / ratio), the majority count every method produces.
std::size_t majority_target(std::size_t minority, double target_ratio);

/// Row indices (ascending) kept by the sampler; all minority rows are included.
std::vector<std::size_t> random_undersample_indices(const LabeledTable& table, const ResampleSpec& spec);
std::vector<std::size_t> near_miss_1_indices(const LabeledTable& table, const ResampleSpec& spec);
std::vector<std::size_t> resample_indices(const LabeledTable& table, const ResampleSpec& spec);

LabeledTable random_undersample(const LabeledTable& table, const ResampleSpec& spec);
LabeledTable near_miss_1(const LabeledTable& table, const ResampleSpec& spec);
LabeledTable resample(const LabeledTable& table, const ResampleSpec& spec);

/// Mean Euclidean distance from each majority row to its k nearest minority
/// rows, aligned with `majority`. Exposed for diagnostics.
std::vector<double> near_miss_distances(const LabeledTable& table, const std::vector<std::size_t>& majority,
                                        const std::vector<std::size_t>& minority, int k);

}  // namespace parcel
