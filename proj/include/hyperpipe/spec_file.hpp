#pragma once

// Declarative analysis files (JSON):
//
// {
//   "name": "heart",
//   "data": {"path": "data.csv", "target_column": "label", "kind": "classification"},
//   "cv": {"outer": {"strategy": "ShuffleSplit", "n_splits": 5, "test_size": 0.2},
//          "inner": {"strategy": "KFold", "n_splits": 5, "shuffle": true}},
//   "use_test_set": true,
//   "metrics": ["balanced_accuracy", "f1_score"],
//   "best_config_metric": "balanced_accuracy",
//   "optimizer": {"name": "random_grid_search", "params": {"n_configurations": 10}},
//   "performance_constraints": [{"metric": "balanced_accuracy", "threshold": 0.6, "strategy": "mean"}],
//   "seed": 42,
//   "project_folder": "runs", "cache_folder": "cache", "verbosity": 1, "jobs": 4,
//   "elements": [ ...pipeline nodes, see pipeline_io.hpp... ]
// }
//
// Relative data, project and cache paths resolve against the file's folder.
// A missing cv entry defaults to shuffled (unstratified) 5-fold; ask for
// StratifiedKFold explicitly.

#include <filesystem>

#include "hyperpipe/data.hpp"
#include "hyperpipe/engine.hpp"
#include "hyperpipe/pipeline_io.hpp"

namespace hyperpipe {

struct DataSpec {
  std::filesystem::path path;
  ColumnRef target_column = std::string("target");
  TargetKind kind = TargetKind::classification;
};

struct AnalysisSpec {
  HyperpipeConfig config;
  DataSpec data;
};

/// Throws ValidationError "<field path>: <problem>".
AnalysisSpec parse_analysis_spec(const Json& j, const std::filesystem::path& base_dir);
/// Syntax errors report the line and column.
AnalysisSpec load_analysis_spec(const std::filesystem::path& path);

}  // namespace hyperpipe
