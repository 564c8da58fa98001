#pragma once

// Numeric dataset representation. Missing values are NaN cells in the feature
// matrix; classification labels are integral doubles.

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hyperpipe/digest.hpp"

namespace hyperpipe {

/// Row-major dense matrix of doubles.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                std::vector<std::string> column_names = {});
  static FeatureMatrix filled(std::size_t rows, std::size_t cols, double value = 0.0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const noexcept { return {values_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::string>& column_names() const noexcept { return column_names_; }
  void set_column_names(std::vector<std::string> names);

  bool has_nan() const noexcept;
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;
  FeatureMatrix select_columns(std::span<const std::size_t> columns) const;
  /// Horizontal concatenation; row counts must agree.
  static FeatureMatrix hconcat(std::span<const FeatureMatrix> blocks);

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::string> column_names_;
};

enum class TargetKind { classification, regression };

std::string to_string(TargetKind kind);
TargetKind parse_target_kind(const std::string& text);

class TargetVector {
 public:
  TargetVector() = default;
  TargetVector(std::vector<double> values, TargetKind kind);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  TargetKind kind() const noexcept { return kind_; }

  /// Distinct labels in ascending order.
  std::vector<double> classes() const;
  TargetVector select(std::span<const std::size_t> indices) const;

  friend bool operator==(const TargetVector& a, const TargetVector& b) noexcept;

 private:
  std::vector<double> values_;
  TargetKind kind_ = TargetKind::classification;
};

/// Named per-sample side channels that travel with the rows.
class ExtraData {
 public:
  void add(const std::string& name, FeatureMatrix channel);
  bool contains(const std::string& name) const { return channels_.count(name) != 0; }
  const FeatureMatrix& at(const std::string& name) const;
  const std::map<std::string, FeatureMatrix>& channels() const noexcept { return channels_; }
  bool empty() const noexcept { return channels_.empty(); }
  ExtraData select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const ExtraData& a, const ExtraData& b) noexcept { return a.channels_ == b.channels_; }

 private:
  std::map<std::string, FeatureMatrix> channels_;
};

/// Features, targets, extras, plus the original row id of every row so that
/// fits can be audited against the partition they came from.
struct Dataset {
  FeatureMatrix x;
  TargetVector y;
  ExtraData extras;
  std::vector<std::size_t> row_ids;

  Dataset() = default;
  Dataset(FeatureMatrix x, TargetVector y, ExtraData extras = {});
  Dataset(FeatureMatrix x, TargetVector y, ExtraData extras, std::vector<std::size_t> row_ids);

  std::size_t rows() const noexcept { return x.rows(); }
  void validate() const;
};

struct DataFingerprint {
  Digest digest{};
  std::string hex() const { return to_hex(digest); }
  friend bool operator==(const DataFingerprint&, const DataFingerprint&) = default;
};

/// Rows in the given order; duplicates allowed.
Dataset subset(const Dataset& data, std::span<const std::size_t> indices);

/// SHA-256 over shapes, value bit patterns, kind, and channel names (row ids excluded).
DataFingerprint fingerprint(const Dataset& data);

using ColumnRef = std::variant<std::string, std::size_t>;

Dataset load_csv_dataset(const std::filesystem::path& path, const ColumnRef& target_column, TargetKind kind);
/// Header + numeric cells, no target column.
FeatureMatrix load_csv_features(const std::filesystem::path& path);
/// Features followed by the target column; NaN cells are written empty.
void write_csv_dataset(const Dataset& data, const std::filesystem::path& path, const std::string& target_name = "target");

}  // namespace hyperpipe
