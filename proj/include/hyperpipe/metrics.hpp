#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hyperpipe/data.hpp"

namespace hyperpipe {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Binary counts with respect to `positive_label`. At most two distinct labels
/// (the positive label included) may appear across both vectors.
ConfusionCounts confusion_counts(std::span<const double> y_true, std::span<const double> y_pred, double positive_label);

/// counts[i][j] = samples with true label labels[i] predicted as labels[j].
struct ConfusionMatrix {
  std::vector<double> labels;
  std::vector<std::vector<std::size_t>> counts;
};

ConfusionMatrix confusion_matrix(std::span<const double> y_true, std::span<const double> y_pred);
/// Sum of matrices, aligned on the union of their labels.
ConfusionMatrix sum_confusion_matrices(std::span<const ConfusionMatrix> matrices);

struct MetricInfo {
  std::string name;
  TargetKind kind;
  bool greater_is_better;
};

const std::vector<MetricInfo>& metric_registry();
const MetricInfo& metric_info(const std::string& name);
bool is_metric(const std::string& name);
bool greater_is_better(const std::string& name);

struct ScoreOptions {
  /// Defaults to the larger label present.
  std::optional<double> positive_label;
};

/// Zero-denominator conventions: precision/recall/f1/sensitivity/specificity
/// -> 0, matthews -> 0, r2 with constant targets -> 0. On binary problems
/// balanced_accuracy is (sensitivity + specificity) / 2; with more labels it
/// is the mean recall over classes present in y_true and precision/recall/f1
/// are macro-averaged over all labels seen.
double score(const std::string& metric, const TargetVector& y_true, std::span<const double> y_pred,
             const ScoreOptions& options = {});

/// Mean and population standard deviation.
struct Aggregate {
  double mean = 0.0;
  double std = 0.0;
};

Aggregate aggregate(std::span<const double> values);

}  // namespace hyperpipe
