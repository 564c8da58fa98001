#pragma once

// The analysis record: outer folds -> tested configs -> inner folds, plus
// precomputed summaries the report draws from. Schema: docs/results_schema.md.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hyperpipe/metrics.hpp"
#include "hyperpipe/optimization.hpp"
#include "hyperpipe/pipeline_io.hpp"
#include "hyperpipe/validation.hpp"

namespace hyperpipe {

using MetricMap = std::map<std::string, double>;

struct InnerFoldRecord {
  std::size_t fold_id = 0;
  std::vector<std::size_t> train_indices;       // original row ids
  std::vector<std::size_t> validation_indices;  // original row ids
  MetricMap train_metrics;
  MetricMap validation_metrics;
  double duration_ms = 0.0;
};

enum class ConfigStatus { completed, pruned, failed };

std::string to_string(ConfigStatus s);
ConfigStatus parse_config_status(const std::string& text);

struct ConfigResult {
  std::size_t config_index = 0;  // position in the optimizer's ask order
  Config config;
  ConfigStatus status = ConfigStatus::completed;
  std::string error;  // failed only
  std::vector<InnerFoldRecord> inner_folds;
  MetricMap mean_train_metrics;
  MetricMap mean_validation_metrics;
  MetricMap std_validation_metrics;
  double duration_ms = 0.0;

  // Out-of-fold validation targets and predictions; kept in memory only.
  std::vector<double> oof_true;
  std::vector<double> oof_pred;
};

struct BaselineResult {
  MetricMap train_metrics;
  std::optional<MetricMap> test_metrics;
};

struct FoldResult {
  std::size_t fold_id = 0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  BaselineResult baseline;
  std::vector<ConfigResult> tested_configs;
  std::optional<std::size_t> best_config_index;  // into tested_configs
  Config best_config;
  /// Fold-best config refitted on the outer train partition (use_test_set only).
  std::optional<MetricMap> train_metrics;
  std::optional<MetricMap> test_metrics;
  /// Best-so-far mean validation best_config_metric after each asked config.
  std::vector<std::optional<double>> progress;
  /// "outer_test" or "inner_validation": where the fold's predictions below come from.
  std::string evaluation_source;
  std::optional<ConfusionMatrix> confusion;  // classification
  std::vector<std::array<double, 2>> predictions;  // regression: (true, predicted)
  double duration_ms = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
};

/// One row of best_config_per_estimator.
struct EstimatorRow {
  std::string child;    // node name
  std::string keyword;  // element keyword, or the composite kind
  MetricMap mean_metrics;
  std::size_t folds_used = 0;
  std::vector<std::size_t> omitted_folds;
};

struct ResultTree {
  static constexpr int kSchemaVersion = 1;

  std::string name;
  std::string timestamp;  // ISO-8601 UTC
  std::uint64_t seed = 0;
  TargetKind target_kind = TargetKind::classification;
  std::size_t n_samples = 0;
  std::size_t n_features = 0;
  CvStrategy outer_cv;
  CvStrategy inner_cv;
  std::vector<std::string> metrics;
  std::string best_config_metric;
  OptimizerSpec optimizer;
  std::vector<PerformanceConstraint> performance_constraints;
  bool use_test_set = true;
  Json pipeline = Json::array();  // structure, as pipeline_to_json(p, false)

  std::vector<FoldResult> outer_folds;
  Config best_config;
  std::size_t best_config_fold = 0;

  /// "train" / "validation" / "test" / "dummy_train" / "dummy_test" ->
  /// metric -> mean/std across outer folds.
  std::map<std::string, std::map<std::string, MetricSummary>> summary;
  std::optional<ConfusionMatrix> confusion;  // summed over folds
  std::string comparison_switch;             // empty when the last node is not a Switch
  std::vector<EstimatorRow> estimator_comparison;

  std::size_t final_fit_samples = 0;
  double final_fit_duration_ms = 0.0;
  std::string model_path;  // relative to the results file
  double duration_ms = 0.0;
};

Json to_json(const ResultTree& tree);
/// Throws ValidationError on schema violations.
ResultTree result_tree_from_json(const Json& j);

/// Sorted keys, doubles with 17 significant digits, no insignificant whitespace
/// beyond two-space indentation.
std::string canonical_dump(const Json& j);

void write_results_json(const ResultTree& tree, const std::filesystem::path& path);
ResultTree read_results_json(const std::filesystem::path& path);

/// Copy of `j` without timing and timestamp fields, for equality checks.
Json strip_volatile(const Json& j);

/// Mean of per-fold best validation metrics for each child of a Switch.
/// Rows are ordered best first by best_config_metric.
std::vector<EstimatorRow> best_config_per_estimator(const ResultTree& tree, const std::string& switch_name);

/// Index of the extremal completed config by mean validation `metric`;
/// ties go to the earlier config.
std::optional<std::size_t> best_completed_config(const std::vector<ConfigResult>& configs, const std::string& metric);

}  // namespace hyperpipe
