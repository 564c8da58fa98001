#pragma once

// The nested cross-validation workflow.
//
// For every outer split: a dummy baseline on the outer train partition; an
// optimizer walk where every asked config is evaluated on inner splits of the
// outer train partition only; the fold-best config by mean validation
// best_config_metric; with use_test_set, a refit of the fold-best on the outer
// train partition scored on the outer test partition. Then the overall best
// config is fitted on all data and persisted next to results.json and
// report.html in <project_folder>/<name>/.
//
// Seeds are scoped so that results do not depend on fold scheduling:
//   outer split            derive_seed(seed, {"outer_cv"})
//   inner split of fold f  derive_seed(seed, {"inner_cv", f})
//   optimizer of fold f    derive_seed(seed, {"optimizer", f})
//   config fits            scope {"outer", f, "inner", j} / {"outer", f, "refit"} / {"final"}
// and elements derive their own seed from the scope, their name and their
// own assignments (Pipeline::assign_seeds).

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hyperpipe/data.hpp"
#include "hyperpipe/optimization.hpp"
#include "hyperpipe/pipeline.hpp"
#include "hyperpipe/results.hpp"
#include "hyperpipe/validation.hpp"

namespace hyperpipe {

struct HyperpipeConfig {
  std::string name;
  Pipeline pipeline;
  std::vector<std::string> metrics;
  std::string best_config_metric;
  OptimizerSpec optimizer;
  CvStrategy outer_cv = CvStrategy::kfold(5, true);
  CvStrategy inner_cv = CvStrategy::kfold(5, true);
  std::vector<PerformanceConstraint> performance_constraints;
  bool use_test_set = true;
  std::uint64_t seed = 0;
  std::filesystem::path project_folder = ".";
  std::optional<std::filesystem::path> cache_folder;
  int verbosity = 0;
  /// Concurrent outer folds; 0 means one per hardware thread.
  std::size_t jobs = 1;

  /// Throws ValidationError naming the offending field.
  void validate(TargetKind kind) const;
  std::filesystem::path output_folder() const { return project_folder / name; }
};

/// Every row set the engine fits on or scores, for leakage checks.
class FitAudit {
 public:
  enum class Phase { dummy, inner, refit, final_fit };
  enum class Use { fit, validate, test };

  struct Entry {
    std::size_t outer_fold;  // ignored for final_fit
    Phase phase;
    Use use;
    std::string node;  // element for fits; empty for scoring
    std::vector<std::size_t> row_ids;
  };

  void record(Entry e);
  std::vector<Entry> entries() const;

 private:
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
};

std::string to_string(FitAudit::Phase p);

struct RunOptions {
  FitAudit* audit = nullptr;
  /// Stage cache override; by default one is opened on cfg.cache_folder.
  StageCache* cache = nullptr;
  /// Skip writing results.json, report.html and the model archive.
  bool write_artifacts = true;
};

struct EvaluationContext {
  const std::vector<std::string>* metrics = nullptr;
  std::vector<PerformanceConstraint> constraints;
  const std::vector<Split>* inner_splits = nullptr;  // indices into `train`
  std::optional<double> positive_label;
  std::uint64_t seed = 0;
  std::size_t outer_fold = 0;
  StageCache* cache = nullptr;
  FitAudit* audit = nullptr;
};

/// One config on every inner split of `train`. Element failures mark the
/// config failed; a callback failure propagates as CallbackError.
ConfigResult evaluate_config(const Pipeline& pipeline, const Config& config, const Dataset& train,
                             const EvaluationContext& ctx);

/// The optimizer walk of one outer fold: tested configs, progress series and
/// fold-best selection. Does not fail when no config completes.
FoldResult optimize_fold(const HyperpipeConfig& cfg, const Dataset& outer_train, std::size_t fold_id,
                         const EvaluationContext& base);

struct FitResult {
  Pipeline model;  // best config fitted on all data
  ResultTree tree;
};

FitResult hyperpipe_fit(const HyperpipeConfig& cfg, const Dataset& data, const RunOptions& options = {});

}  // namespace hyperpipe
