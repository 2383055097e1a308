#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "parcel/random.hpp"
#include "parcel/tabular.hpp"

namespace support {

inline parcel::Matrix matrix(const std::vector<std::vector<double>>& rows) {
  parcel::Matrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

inline std::vector<std::string> names(std::size_t d, const std::string& prefix = "x") {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < d; ++j) out.push_back(prefix + std::to_string(j));
  return out;
}

inline parcel::LabeledTable table(const std::vector<std::vector<double>>& rows, std::vector<int> labels) {
  return parcel::LabeledTable(names(rows.empty() ? 0 : rows[0].size()), matrix(rows), std::move(labels));
}

/// Gaussian blobs: positives centred at +shift on every feature, negatives at 0.
inline parcel::LabeledTable blobs(std::size_t neg, std::size_t pos, std::size_t d, double shift, std::uint64_t seed) {
  parcel::Rng rng(seed);
  parcel::Matrix m(static_cast<Eigen::Index>(neg + pos), static_cast<Eigen::Index>(d));
  std::vector<int> labels;
  for (std::size_t i = 0; i < neg + pos; ++i) {
    const int y = i >= neg ? 1 : 0;
    labels.push_back(y);
    for (std::size_t j = 0; j < d; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parcel::standard_normal(rng) + y * shift;
  }
  return parcel::LabeledTable(names(d), std::move(m), std::move(labels));
}

inline parcel::Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  parcel::Rng rng(seed);
  parcel::Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = parcel::uniform01(rng);
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("parcel_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace support
