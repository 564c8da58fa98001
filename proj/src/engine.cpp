#include "hyperpipe/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <memory>
#include <set>
#include <thread>

#include "hyperpipe/archive.hpp"
#include "hyperpipe/cache.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/log.hpp"
#include "hyperpipe/report.hpp"
#include "hyperpipe/seed.hpp"

namespace hyperpipe {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  throw ValidationError(field + ": " + message);
}

void validate_cv(const CvStrategy& cv, const std::string& field, TargetKind kind) {
  if (cv.n_splits < 1) invalid(field + ".n_splits", "must be at least 1");
  if (cv.variant != CvStrategy::Variant::shuffle_split && cv.n_splits < 2)
    invalid(field + ".n_splits", "k-fold needs at least 2 splits");
  if (cv.variant == CvStrategy::Variant::shuffle_split && !(cv.test_fraction > 0.0 && cv.test_fraction < 1.0))
    invalid(field + ".test_size", "must lie strictly between 0 and 1");
  if (cv.variant == CvStrategy::Variant::stratified_kfold && kind != TargetKind::classification)
    invalid(field, "stratified splits need a classification target");
}

std::vector<std::size_t> original_ids(const Dataset& d, std::span<const std::size_t> positions) {
  std::vector<std::size_t> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(d.row_ids[p]);
  return out;
}

MetricMap score_all(const std::vector<std::string>& metrics, const TargetVector& y, std::span<const double> pred,
                    const ScoreOptions& opts) {
  MetricMap out;
  for (const auto& m : metrics) out[m] = score(m, y, pred, opts);
  return out;
}

void require_finite_predictions(std::span<const double> pred) {
  for (double v : pred)
    if (!std::isfinite(v)) throw DataError("pipeline produced a non-finite prediction");
}

FitOptions fit_options(StageCache* cache, FitAudit* audit, std::size_t fold, FitAudit::Phase phase) {
  FitOptions fo;
  fo.cache = cache;
  if (audit)
    fo.on_fit = [=](const std::string& node, std::span<const std::size_t> ids) {
      audit->record({fold, phase, FitAudit::Use::fit, node, {ids.begin(), ids.end()}});
    };
  return fo;
}

void record_scoring(FitAudit* audit, std::size_t fold, FitAudit::Phase phase, FitAudit::Use use, const Dataset& d) {
  if (audit) audit->record({fold, phase, use, {}, d.row_ids});
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string describe(const Config& c) {
  std::string out;
  for (const auto& [k, v] : c) out += (out.empty() ? "" : ", ") + k + "=" + display(v);
  return "{" + out + "}";
}

void add_summary(ResultTree& tree, const std::string& partition, const std::vector<const MetricMap*>& per_fold) {
  if (per_fold.empty()) return;
  for (const auto& m : tree.metrics) {
    std::vector<double> vs;
    for (const auto* map : per_fold) vs.push_back(map->at(m));
    const Aggregate a = aggregate(vs);
    tree.summary[partition][m] = {a.mean, a.std};
  }
}

}  // namespace

std::string to_string(FitAudit::Phase p) {
  switch (p) {
    case FitAudit::Phase::dummy: return "dummy";
    case FitAudit::Phase::inner: return "inner";
    case FitAudit::Phase::refit: return "refit";
    case FitAudit::Phase::final_fit: return "final";
  }
  return "inner";
}

void FitAudit::record(Entry e) {
  std::lock_guard lock(mutex_);
  entries_.push_back(std::move(e));
}

std::vector<FitAudit::Entry> FitAudit::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

void HyperpipeConfig::validate(TargetKind kind) const {
  if (name.empty()) invalid("name", "must not be empty");
  if (name.find_first_of("/\\") != std::string::npos || name == "." || name == "..")
    invalid("name", "must be usable as a folder name");
  try {
    pipeline.validate();
  } catch (const ValidationError& e) {
    invalid("elements", e.what());
  }
  if (metrics.empty()) invalid("metrics", "at least one metric is required");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const std::string field = "metrics[" + std::to_string(i) + "]";
    if (!is_metric(metrics[i])) invalid(field, "unknown metric '" + metrics[i] + "'");
    if (metric_info(metrics[i]).kind != kind)
      invalid(field, "metric '" + metrics[i] + "' does not apply to " + to_string(kind) + " targets");
    if (!seen.insert(metrics[i]).second) invalid(field, "duplicate metric '" + metrics[i] + "'");
  }
  if (!seen.count(best_config_metric))
    invalid("best_config_metric", "'" + best_config_metric + "' is not one of the listed metrics");
  try {
    validate_optimizer_spec(optimizer);
  } catch (const ValidationError& e) {
    invalid("optimizer", e.what());
  }
  if (optimizer.name == "switch_optimizer" && pipeline.nodes().back().kind() != NodeKind::switch_node)
    invalid("optimizer.name", "switch_optimizer needs a Switch as the last pipeline node");
  validate_cv(outer_cv, "cv.outer", kind);
  validate_cv(inner_cv, "cv.inner", kind);
  for (std::size_t i = 0; i < performance_constraints.size(); ++i) {
    const std::string field = "performance_constraints[" + std::to_string(i) + "]";
    try {
      performance_constraints[i].validate();
    } catch (const ValidationError& e) {
      invalid(field, e.what());
    }
    if (!seen.count(performance_constraints[i].metric))
      invalid(field + ".metric", "'" + performance_constraints[i].metric + "' is not one of the listed metrics");
  }
}

ConfigResult evaluate_config(const Pipeline& pipeline, const Config& config, const Dataset& train,
                             const EvaluationContext& ctx) {
  const auto t0 = Clock::now();
  ConfigResult r;
  r.config = config;
  const ScoreOptions opts{ctx.positive_label};
  const auto& splits = *ctx.inner_splits;
  const auto& metrics = *ctx.metrics;

  for (std::size_t j = 0; j < splits.size(); ++j) {
    const auto tf = Clock::now();
    InnerFoldRecord rec;
    rec.fold_id = j;
    rec.train_indices = original_ids(train, splits[j].train_indices);
    rec.validation_indices = original_ids(train, splits[j].test_indices);
    std::vector<double> val_pred;
    Dataset va;
    try {
      Pipeline p = pipeline;
      p.apply_config(config);
      p.assign_seeds(ctx.seed, {"outer", static_cast<std::int64_t>(ctx.outer_fold), "inner", static_cast<std::int64_t>(j)});
      const Dataset tr = subset(train, splits[j].train_indices);
      va = subset(train, splits[j].test_indices);
      p.fit(tr, fit_options(ctx.cache, ctx.audit, ctx.outer_fold, FitAudit::Phase::inner));
      record_scoring(ctx.audit, ctx.outer_fold, FitAudit::Phase::inner, FitAudit::Use::validate, va);
      const auto train_pred = p.predict(tr.x, tr.extras);
      val_pred = p.predict(va.x, va.extras);
      require_finite_predictions(train_pred);
      require_finite_predictions(val_pred);
      rec.train_metrics = score_all(metrics, tr.y, train_pred, opts);
      rec.validation_metrics = score_all(metrics, va.y, val_pred, opts);
    } catch (const CallbackError&) {
      throw;
    } catch (const std::exception& e) {
      r.status = ConfigStatus::failed;
      r.error = e.what();
      break;
    }
    rec.duration_ms = elapsed_ms(tf);
    r.inner_folds.push_back(std::move(rec));
    r.oof_true.insert(r.oof_true.end(), va.y.values().begin(), va.y.values().end());
    r.oof_pred.insert(r.oof_pred.end(), val_pred.begin(), val_pred.end());

    bool keep = true;
    for (const auto& c : ctx.constraints) {
      std::vector<double> so_far;
      for (const auto& f : r.inner_folds) so_far.push_back(f.validation_metrics.at(c.metric));
      keep = keep && shall_continue(c, so_far);
    }
    if (!keep) {
      r.status = ConfigStatus::pruned;
      break;
    }
  }

  if (!r.inner_folds.empty()) {
    for (const auto& m : metrics) {
      std::vector<double> tv, vv;
      for (const auto& f : r.inner_folds) {
        tv.push_back(f.train_metrics.at(m));
        vv.push_back(f.validation_metrics.at(m));
      }
      r.mean_train_metrics[m] = aggregate(tv).mean;
      const Aggregate a = aggregate(vv);
      r.mean_validation_metrics[m] = a.mean;
      r.std_validation_metrics[m] = a.std;
    }
  }
  r.duration_ms = elapsed_ms(t0);
  return r;
}

FoldResult optimize_fold(const HyperpipeConfig& cfg, const Dataset& outer_train, std::size_t fold_id,
                         const EvaluationContext& base) {
  const auto f = static_cast<std::int64_t>(fold_id);
  const auto splits = cfg.inner_cv.split(outer_train.y, derive_seed(cfg.seed, {"inner_cv", f}));
  EvaluationContext ctx = base;
  ctx.metrics = &cfg.metrics;
  ctx.constraints = cfg.performance_constraints;
  ctx.inner_splits = &splits;
  ctx.seed = cfg.seed;
  ctx.outer_fold = fold_id;

  auto optimizer = make_optimizer(cfg.optimizer);
  optimizer->prepare(cfg.pipeline, derive_seed(cfg.seed, {"optimizer", f}));
  const std::string& metric = cfg.best_config_metric;
  const bool gib = greater_is_better(metric);

  FoldResult fold;
  fold.fold_id = fold_id;
  std::optional<double> best_so_far;
  while (auto config = optimizer->ask()) {
    ConfigResult r = evaluate_config(cfg.pipeline, *config, outer_train, ctx);
    r.config_index = fold.tested_configs.size();
    const bool completed = r.status == ConfigStatus::completed;
    const double value = completed ? r.mean_validation_metrics.at(metric) : std::nan("");
    optimizer->tell(*config, value, gib);
    if (completed && (!best_so_far || (gib ? value > *best_so_far : value < *best_so_far))) best_so_far = value;
    fold.progress.push_back(best_so_far);
    if (log::verbosity() >= 1) {
      std::string line = "fold " + std::to_string(fold_id) + " config " + std::to_string(r.config_index) + " " +
                         describe(r.config) + ": " + to_string(r.status);
      if (!r.mean_validation_metrics.empty()) line += ", " + metric + "=" + display(r.mean_validation_metrics.at(metric));
      if (!r.error.empty()) line += " (" + r.error + ")";
      log::info(line);
    }
    fold.tested_configs.push_back(std::move(r));
  }
  fold.best_config_index = best_completed_config(fold.tested_configs, metric);
  if (fold.best_config_index) fold.best_config = fold.tested_configs[*fold.best_config_index].config;
  return fold;
}

FitResult hyperpipe_fit(const HyperpipeConfig& cfg, const Dataset& data, const RunOptions& options) {
  const auto t0 = Clock::now();
  data.validate();
  cfg.validate(data.y.kind());
  log::set_verbosity(cfg.verbosity);
  const TargetKind kind = data.y.kind();
  const bool classification = kind == TargetKind::classification;

  const std::filesystem::path out_dir = cfg.output_folder();
  if (options.write_artifacts) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) throw Error("cannot create output folder " + out_dir.string());
  }
  std::unique_ptr<DiskStageCache> disk_cache;
  StageCache* cache = options.cache;
  if (!cache && cfg.cache_folder) {
    disk_cache = std::make_unique<DiskStageCache>(*cfg.cache_folder);
    cache = disk_cache.get();
  }

  std::optional<double> positive;
  if (classification) positive = data.y.classes().back();
  const ScoreOptions opts{positive};
  const auto outer = cfg.outer_cv.split(data.y, derive_seed(cfg.seed, {"outer_cv"}));

  EvaluationContext base;
  base.positive_label = positive;
  base.cache = cache;
  base.audit = options.audit;

  auto run_fold = [&](std::size_t f) {
    const auto tf = Clock::now();
    const Dataset train = subset(data, outer[f].train_indices);
    const Dataset test = subset(data, outer[f].test_indices);

    // Dummy baseline; the heuristic ignores features, so it sees a constant column.
    auto dummy = default_registry().create(classification ? "DummyClassifier" : "DummyRegressor");
    const FeatureMatrix no_train = FeatureMatrix::filled(train.rows(), 1), no_test = FeatureMatrix::filled(test.rows(), 1);
    if (options.audit) options.audit->record({f, FitAudit::Phase::dummy, FitAudit::Use::fit, "dummy", train.row_ids});
    dummy->fit(no_train, train.y, {});
    BaselineResult baseline;
    baseline.train_metrics = score_all(cfg.metrics, train.y, dummy->predict(no_train, {}), opts);
    if (cfg.use_test_set) {
      record_scoring(options.audit, f, FitAudit::Phase::dummy, FitAudit::Use::test, test);
      baseline.test_metrics = score_all(cfg.metrics, test.y, dummy->predict(no_test, {}), opts);
    }

    FoldResult fold = optimize_fold(cfg, train, f, base);
    fold.train_indices = train.row_ids;
    fold.test_indices = test.row_ids;
    fold.baseline = std::move(baseline);
    if (!fold.best_config_index) {
      std::size_t pruned = 0, failed = 0;
      for (const auto& c : fold.tested_configs) {
        pruned += c.status == ConfigStatus::pruned;
        failed += c.status == ConfigStatus::failed;
      }
      throw Error("outer fold " + std::to_string(f) + ": no configuration completed (" + std::to_string(pruned) +
                  " pruned, " + std::to_string(failed) + " failed)");
    }

    std::vector<double> truth, pred;
    if (cfg.use_test_set) {
      Pipeline p = cfg.pipeline;
      p.apply_config(fold.best_config);
      p.assign_seeds(cfg.seed, {"outer", static_cast<std::int64_t>(f), "refit"});
      p.fit(train, fit_options(cache, options.audit, f, FitAudit::Phase::refit));
      record_scoring(options.audit, f, FitAudit::Phase::refit, FitAudit::Use::test, test);
      const auto train_pred = p.predict(train.x, train.extras);
      pred = p.predict(test.x, test.extras);
      require_finite_predictions(train_pred);
      require_finite_predictions(pred);
      fold.train_metrics = score_all(cfg.metrics, train.y, train_pred, opts);
      fold.test_metrics = score_all(cfg.metrics, test.y, pred, opts);
      truth = test.y.values();
      fold.evaluation_source = "outer_test";
    } else {
      const auto& best = fold.tested_configs[*fold.best_config_index];
      truth = best.oof_true;
      pred = best.oof_pred;
      fold.evaluation_source = "inner_validation";
    }
    if (classification)
      fold.confusion = confusion_matrix(truth, pred);
    else
      for (std::size_t i = 0; i < truth.size(); ++i) fold.predictions.push_back({truth[i], pred[i]});
    fold.duration_ms = elapsed_ms(tf);
    log::info("fold " + std::to_string(f) + " done: best " + describe(fold.best_config));
    return fold;
  };

  // Folds are independent; results land in fold order regardless of scheduling.
  std::vector<FoldResult> folds(outer.size());
  std::vector<std::exception_ptr> errors(outer.size());
  std::size_t workers = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.jobs;
  workers = std::min(workers, outer.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto work = [&] {
    for (std::size_t f; !stop && (f = next++) < outer.size();) {
      try {
        folds[f] = run_fold(f);
      } catch (...) {
        errors[f] = std::current_exception();
        stop = true;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ResultTree tree;
  tree.name = cfg.name;
  tree.timestamp = utc_timestamp();
  tree.seed = cfg.seed;
  tree.target_kind = kind;
  tree.n_samples = data.rows();
  tree.n_features = data.x.cols();
  tree.outer_cv = cfg.outer_cv;
  tree.inner_cv = cfg.inner_cv;
  tree.metrics = cfg.metrics;
  tree.best_config_metric = cfg.best_config_metric;
  tree.optimizer = cfg.optimizer;
  tree.performance_constraints = cfg.performance_constraints;
  tree.use_test_set = cfg.use_test_set;
  tree.pipeline = pipeline_to_json(cfg.pipeline, false);
  tree.outer_folds = std::move(folds);

  std::vector<const MetricMap*> train_s, val_s, test_s, dummy_train, dummy_test;
  std::vector<ConfusionMatrix> confusions;
  for (const auto& f : tree.outer_folds) {
    const auto& best = f.tested_configs[*f.best_config_index];
    train_s.push_back(&best.mean_train_metrics);
    val_s.push_back(&best.mean_validation_metrics);
    if (f.test_metrics) test_s.push_back(&*f.test_metrics);
    dummy_train.push_back(&f.baseline.train_metrics);
    if (f.baseline.test_metrics) dummy_test.push_back(&*f.baseline.test_metrics);
    if (f.confusion) confusions.push_back(*f.confusion);
  }
  add_summary(tree, "train", train_s);
  add_summary(tree, "validation", val_s);
  add_summary(tree, "test", test_s);
  add_summary(tree, "dummy_train", dummy_train);
  add_summary(tree, "dummy_test", dummy_test);
  if (!confusions.empty()) tree.confusion = sum_confusion_matrices(confusions);

  // Overall best: the best-testing fold's config, or without a test set the
  // fold-best config with the best mean validation value. Ties -> earlier fold.
  const std::string& metric = cfg.best_config_metric;
  const bool gib = greater_is_better(metric);
  auto fold_value = [&](const FoldResult& f) {
    return cfg.use_test_set ? f.test_metrics->at(metric)
                            : f.tested_configs[*f.best_config_index].mean_validation_metrics.at(metric);
  };
  std::size_t best_fold = 0;
  for (std::size_t f = 1; f < tree.outer_folds.size(); ++f) {
    const double v = fold_value(tree.outer_folds[f]), b = fold_value(tree.outer_folds[best_fold]);
    if (gib ? v > b : v < b) best_fold = f;
  }
  tree.best_config_fold = best_fold;
  tree.best_config = tree.outer_folds[best_fold].best_config;

  const auto& last = cfg.pipeline.nodes().back();
  if (last.kind() == NodeKind::switch_node) {
    tree.comparison_switch = last.name();
    tree.estimator_comparison = best_config_per_estimator(tree, last.name());
  }

  const auto tfinal = Clock::now();
  FitResult result{cfg.pipeline, {}};
  result.model.apply_config(tree.best_config);
  result.model.assign_seeds(cfg.seed, {"final"});
  result.model.fit(data, fit_options(cache, options.audit, 0, FitAudit::Phase::final_fit));
  tree.final_fit_samples = data.rows();
  tree.final_fit_duration_ms = elapsed_ms(tfinal);
  tree.model_path = "best_model.photon";
  tree.duration_ms = elapsed_ms(t0);
  log::info("best config " + describe(tree.best_config) + " from fold " + std::to_string(best_fold));

  if (options.write_artifacts) {
    save_model(result.model, tree.best_config, out_dir / tree.model_path);
    write_results_json(tree, out_dir / "results.json");
    // The report is rendered from the tree as it reads back from disk, so
    // regenerating it from results.json later reproduces it byte for byte.
    write_html_report(read_results_json(out_dir / "results.json"), out_dir / "report.html");
  }
  result.tree = std::move(tree);
  return result;
}

}  // namespace hyperpipe
