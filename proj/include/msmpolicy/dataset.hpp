#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace msmpolicy {

struct Observation {
  std::vector<double> x;
  int a = 0;
  double y = 0.0;
};

/// Validated sample of (covariates, arm, outcome). Immutable once built.
class Dataset {
 public:
  Dataset() = default;

  std::size_t n() const noexcept { return rows_.size(); }
  std::size_t d() const noexcept { return d_; }
  int m() const noexcept { return m_; }

  const std::vector<Observation>& rows() const noexcept { return rows_; }
  const Observation& operator[](std::size_t i) const { return rows_[i]; }
  const std::vector<std::string>& column_names() const noexcept { return column_names_; }

  /// Count of units per arm.
  std::vector<std::size_t> arm_counts() const;

  /// Rows at `indices`, in that order. Keeps d, m and column names.
  Dataset subset(std::span<const std::size_t> indices) const;

  /// Rows with a == arm.
  Dataset arm_subset(int arm) const;

 private:
  friend Dataset validate_dataset(std::vector<Observation> rows, int m,
                                  std::vector<std::string> column_names);
  std::vector<Observation> rows_;
  std::size_t d_ = 0;
  int m_ = 2;
  std::vector<std::string> column_names_;
};

/// Checks finiteness, arm range and rectangular shape. Throws Error on
/// EmptyData, RaggedRows, NonFinite or ArmOutOfRange. Column names default to
/// x1..xd when empty.
Dataset validate_dataset(std::vector<Observation> rows, int m,
                         std::vector<std::string> column_names = {});

/// Reads `y,a,x1,...,xd` CSV with a header row.
Dataset read_dataset_csv(const std::filesystem::path& path, int m);

/// CSV text in the same layout. Doubles use shortest round-trip formatting.
std::string dataset_to_csv(const Dataset& data);

/// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);

/// Column-major copy of the covariates, for learners that scan features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(const Dataset& data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> column(std::size_t j) const {
    return {values_.data() + j * rows_, rows_};
  }
  double at(std::size_t i, std::size_t j) const { return values_[j * rows_ + i]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

}  // namespace msmpolicy
