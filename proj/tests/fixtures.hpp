#pragma once

#include <array>
#include <vector>

namespace fixtures {

/// Validation errors binned so that the regular autoencoder threshold table is reproduced:
/// 1000 lost and 1000 normal parcels, bin k lies between grid[k-1] and grid[k].
inline constexpr std::array<double, 7> kSweepGrid{0.02, 0.03, 0.035, 0.038, 0.0391, 0.042, 0.05};
inline constexpr std::array<double, 8> kBinValue{0.01, 0.025, 0.033, 0.037, 0.0385, 0.04, 0.045, 0.06};
inline constexpr std::array<int, 8> kLostPerBin{0, 8, 283, 242, 61, 167, 178, 61};
inline constexpr std::array<int, 8> kNormalPerBin{0, 12, 385, 300, 80, 148, 70, 5};

struct SweepRowExpected {
  double threshold, tnr, recall, ba;
};
inline constexpr std::array<SweepRowExpected, 7> kSweepTable{{
    {0.02, 0.000, 1.000, 0.500},
    {0.03, 0.012, 0.992, 0.502},
    {0.035, 0.397, 0.709, 0.554},
    {0.038, 0.697, 0.467, 0.582},
    {0.0391, 0.777, 0.406, 0.592},
    {0.042, 0.925, 0.239, 0.582},
    {0.05, 0.995, 0.061, 0.528},
}};

inline void sweep_errors(std::vector<double>& errors, std::vector<int>& labels) {
  errors.clear();
  labels.clear();
  for (std::size_t k = 0; k < kBinValue.size(); ++k) {
    for (int i = 0; i < kLostPerBin[k]; ++i) {
      errors.push_back(kBinValue[k]);
      labels.push_back(1);
    }
    for (int i = 0; i < kNormalPerBin[k]; ++i) {
      errors.push_back(kBinValue[k]);
      labels.push_back(0);
    }
  }
}

}  // namespace fixtures
