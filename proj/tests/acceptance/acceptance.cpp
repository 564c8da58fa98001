// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--out DIR] [N ...]
//
// --out keeps the end-to-end run artifacts (criteria 11/12) in DIR; listing
// criterion numbers runs only those. Exit status is 0 iff every selected
// criterion passed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "hyperpipe/archive.hpp"
#include "hyperpipe/elements/builtins.hpp"
#include "hyperpipe/engine.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/metrics.hpp"
#include "hyperpipe/optimization.hpp"
#include "hyperpipe/results.hpp"
#include "random_pipeline.hpp"
#include "report_check.hpp"
#include "synthetic.hpp"
#include "tempdir.hpp"

using namespace hyperpipe;
namespace fs = std::filesystem;
using HS = HyperparameterSpec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<ParamValue> ints(std::initializer_list<std::int64_t> v) { return {v.begin(), v.end()}; }

const std::string kBest = "balanced_accuracy";

// ------------------------------------------------------------------ 1

Outcome no_leakage() {
  testing::MixtureSpec spec;
  spec.rows = 300;
  spec.positive_fraction = 0.32;
  spec.missing_fraction = 0.03;
  spec.seed = 101;
  const Dataset d = testing::gaussian_mixture(spec);

  HyperpipeConfig cfg;
  cfg.name = "leakage";
  cfg.pipeline = Pipeline(
      {Node::element("scaler", "StandardScaler"), Node::element("imputer", "SimpleImputer"),
       Node::element("balance", "ImbalancedDataTransformer", {},
                     {{"method_name", HS::categorical({std::string("RandomUnderSampler"), std::string("SMOTE")})}}),
       Node::element("knn", "KNeighborsClassifier", {}, {{"n_neighbors", HS::categorical(ints({3, 7}))}})});
  cfg.metrics = {kBest, "accuracy"};
  cfg.best_config_metric = kBest;
  cfg.outer_cv = CvStrategy::shuffle_split(5, 0.2);
  cfg.inner_cv = CvStrategy::kfold(5, true);
  cfg.use_test_set = true;
  cfg.seed = 1;
  FitAudit audit;
  const auto tree = hyperpipe_fit(cfg, d, {&audit, nullptr, false}).tree;

  std::size_t violations = 0, fit_rows = 0, validation_rows = 0, events = 0;
  std::set<FitAudit::Phase> phases;
  for (const auto& e : audit.entries()) {
    if (e.phase == FitAudit::Phase::final_fit) continue;
    const auto& fold = tree.outer_folds.at(e.outer_fold);
    const std::set<std::size_t> train(fold.train_indices.begin(), fold.train_indices.end());
    const std::set<std::size_t> test(fold.test_indices.begin(), fold.test_indices.end());
    ++events;
    phases.insert(e.phase);
    for (auto id : e.row_ids) {
      if (e.use == FitAudit::Use::test) {
        violations += e.phase == FitAudit::Phase::inner || test.count(id) == 0;
      } else {
        violations += train.count(id) == 0;
        (e.use == FitAudit::Use::fit ? fit_rows : validation_rows) += 1;
      }
    }
  }
  const bool covered = phases.count(FitAudit::Phase::inner) && phases.count(FitAudit::Phase::refit) &&
                       phases.count(FitAudit::Phase::dummy) && fit_rows > 0 && validation_rows > 0;
  return {violations == 0 && covered,
          fmt("%zu violations; %zu fit rows and %zu validation rows checked over %zu events", violations, fit_rows,
              validation_rows, events)};
}

// ------------------------------------------------------------------ 2

// Confusion counts tallied by hand, then textbook definitions.
std::map<std::string, double> brute_force_metrics(const std::vector<double>& t, const std::vector<double>& p) {
  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == 1 && p[i] == 1) tp += 1;
    if (t[i] == 0 && p[i] == 1) fp += 1;
    if (t[i] == 0 && p[i] == 0) tn += 1;
    if (t[i] == 1 && p[i] == 0) fn += 1;
  }
  auto ratio = [](double a, double b) { return b == 0 ? 0.0 : a / b; };
  const double precision = ratio(tp, tp + fp), recall = ratio(tp, tp + fn), specificity = ratio(tn, tn + fp);
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  return {{"accuracy", (tp + tn) / (tp + tn + fp + fn)},
          {"precision", precision},
          {"recall", recall},
          {"sensitivity", recall},
          {"specificity", specificity},
          {"f1_score", ratio(2 * precision * recall, precision + recall)},
          {"balanced_accuracy", (recall + specificity) / 2},
          {"matthews_corrcoef", den == 0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(den)}};
}

Outcome metric_oracle() {
  SplitMix64 rng(2002);
  std::size_t compared = 0, mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.bounded(50);
    std::vector<double> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<double>(rng.bounded(2));
      p[i] = static_cast<double>(rng.bounded(2));
    }
    const TargetVector y(t, TargetKind::classification);
    for (const auto& [name, expected] : brute_force_metrics(t, p)) {
      ++compared;
      mismatches += score(name, y, p, {1.0}) != expected;
    }
  }
  const TargetVector fixed({1, 1, 0, 0}, TargetKind::classification);
  const std::vector<double> fp{1, 0, 1, 0};
  const double f1 = score("f1_score", fixed, fp), mcc = score("matthews_corrcoef", fixed, fp),
               ba = score("balanced_accuracy", fixed, fp);
  const bool fixed_ok = std::abs(f1 - 0.5) <= 1e-12 && std::abs(mcc) <= 1e-12 && std::abs(ba - 0.5) <= 1e-12;
  return {mismatches == 0 && fixed_ok,
          fmt("%zu/%zu values differ from the brute-force oracle; fixed case f1=%.4f matthews=%.4f "
              "balanced_accuracy=%.4f",
              mismatches, compared, f1, mcc, ba)};
}

// ------------------------------------------------------------------ 3

Outcome grid_count_law() {
  SplitMix64 rng(3003);
  std::size_t wrong = 0, switches = 0, disabled = 0, largest = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto rp = testing::random_pipeline(rng);
    for (const auto& n : rp.nodes) {
      switches += n.kind() == NodeKind::switch_node;
      disabled += n.test_disabled();
    }
    Pipeline p(std::move(rp.nodes));
    const auto n = grid_configurations(p).size();
    wrong += n != rp.expected || grid_size(p) != rp.expected;
    largest = std::max(largest, n);
  }
  const auto values = expand_spec(HS::float_range(0.5, 0.8, 0.1));
  std::vector<double> got;
  for (const auto& v : values) got.push_back(std::get<double>(v));
  const bool range_ok = got == std::vector<double>{0.5, 0.6, 0.7};
  return {wrong == 0 && range_ok && switches > 0 && disabled > 0,
          fmt("%zu/200 pipelines off the closed form (%zu switches, %zu test_disabled nodes, largest grid %zu); "
              "FloatRange(0.5,0.8,0.1) -> %zu values%s",
              wrong, switches, disabled, largest, got.size(), range_ok ? " [0.5,0.6,0.7]" : " (wrong)")};
}

// ------------------------------------------------------------------ 4

Outcome nested_cv_counts() {
  testing::MixtureSpec spec;
  spec.rows = 160;
  spec.seed = 404;
  const Dataset d = testing::gaussian_mixture(spec);
  HyperpipeConfig cfg;
  cfg.name = "counts";
  cfg.pipeline = Pipeline({Node::element("scaler", "StandardScaler", {}, {}, true),
                           Node::element("knn", "KNeighborsClassifier", {},
                                         {{"n_neighbors", HS::categorical(ints({1, 3, 5, 9, 15}))}})});
  cfg.metrics = {kBest, "f1_score"};
  cfg.best_config_metric = kBest;
  cfg.outer_cv = CvStrategy::kfold(4, true);
  cfg.inner_cv = CvStrategy::kfold(3, true);
  const std::size_t G = 5 * 2, T = 4, V = 3;  // n_neighbors x {enabled, disabled}
  const auto tree = hyperpipe_fit(cfg, d, {nullptr, nullptr, false}).tree;

  std::size_t configs = 0, records = 0, argmax_mismatch = 0;
  for (const auto& f : tree.outer_folds) {
    configs += f.tested_configs.size();
    std::optional<std::size_t> best;
    double best_value = 0.0;
    for (std::size_t i = 0; i < f.tested_configs.size(); ++i) {
      const auto& c = f.tested_configs[i];
      records += c.inner_folds.size();
      double sum = 0.0;
      for (const auto& r : c.inner_folds) sum += r.validation_metrics.at(kBest);
      const double mean = sum / static_cast<double>(c.inner_folds.size());
      if (!best || mean > best_value) {
        best = i;
        best_value = mean;
      }
    }
    argmax_mismatch += f.best_config_index != best || canonical(f.best_config) != canonical(f.tested_configs[*best].config);
  }
  const bool ok = tree.outer_folds.size() == T && configs == T * G && records == T * G * V && argmax_mismatch == 0;
  return {ok, fmt("%zu config results (T*G = %zu), %zu inner records (T*G*V = %zu), %zu fold-best mismatches", configs,
                  T * G, records, T * G * V, argmax_mismatch)};
}

// ------------------------------------------------------------------ 5

Outcome constraint_pruning() {
  testing::MixtureSpec spec;
  spec.rows = 150;
  spec.seed = 505;
  const Dataset d = testing::gaussian_mixture(spec);
  HyperpipeConfig cfg;
  cfg.name = "pruning";
  cfg.pipeline = Pipeline({Node::element("knn", "KNeighborsClassifier", {},
                                         {{"n_neighbors", HS::categorical(ints({1, 3, 5, 7, 9, 11}))}})});
  cfg.metrics = {kBest};
  cfg.best_config_metric = kBest;
  cfg.inner_cv = CvStrategy::kfold(5, true);

  const auto outer = CvStrategy::kfold(3, true).split(d.y, 9);
  std::size_t high_total = 0, high_bad = 0, low_total = 0, low_pruned = 0;
  for (std::size_t f = 0; f < outer.size(); ++f) {
    const Dataset train = subset(d, outer[f].train_indices);
    cfg.performance_constraints = {{kBest, 1.01, ConstraintStrategy::first}};
    for (const auto& c : optimize_fold(cfg, train, f, {}).tested_configs) {
      ++high_total;
      high_bad += c.status != ConfigStatus::pruned || c.inner_folds.size() != 1;
    }
    cfg.performance_constraints = {{kBest, -1.0, ConstraintStrategy::first}};
    for (const auto& c : optimize_fold(cfg, train, f, {}).tested_configs) {
      ++low_total;
      low_pruned += c.status == ConfigStatus::pruned || c.inner_folds.size() != 5;
    }
  }
  return {high_total > 0 && high_bad == 0 && low_pruned == 0,
          fmt("threshold 1.01: %zu/%zu configs pruned after exactly one inner fold; threshold -1: %zu/%zu pruned",
              high_total - high_bad, high_total, low_pruned, low_total)};
}

// ------------------------------------------------------------------ 6

Outcome cache_equivalence() {
  testing::TempDir plain, cached, cache_dir;
  testing::MixtureSpec spec;
  spec.rows = 240;
  spec.missing_fraction = 0.03;
  spec.seed = 606;
  const Dataset d = testing::gaussian_mixture(spec);
  HyperpipeConfig cfg;
  cfg.name = "cache";
  cfg.pipeline = Pipeline({Node::element("scaler", "StandardScaler"), Node::element("imputer", "SimpleImputer"),
                           Node::element("pca", "PCA", {}, {{"n_components", HS::categorical(ints({2, 4}))}}),
                           Node::element("knn", "KNeighborsClassifier", {},
                                         {{"n_neighbors", HS::categorical(ints({3, 9}))}})});
  cfg.metrics = {kBest, "accuracy"};
  cfg.best_config_metric = kBest;
  cfg.outer_cv = CvStrategy::kfold(3, true);
  cfg.inner_cv = CvStrategy::kfold(3, true);

  cfg.project_folder = plain.path();
  const auto f0 = transformer_fit_count();
  hyperpipe_fit(cfg, d);
  const auto uncached_fits = transformer_fit_count() - f0;

  cfg.project_folder = cached.path();
  cfg.cache_folder = cache_dir.path();
  const auto f1 = transformer_fit_count();
  hyperpipe_fit(cfg, d);
  const auto cold_fits = transformer_fit_count() - f1;
  const std::string cold = canonical_dump(strip_volatile(Json::parse(read_file(cached / "cache/results.json"))));
  const auto f2 = transformer_fit_count();
  hyperpipe_fit(cfg, d);
  const auto warm_fits = transformer_fit_count() - f2;

  const std::string a = canonical_dump(strip_volatile(Json::parse(read_file(plain / "cache/results.json"))));
  const std::string b = canonical_dump(strip_volatile(Json::parse(read_file(cached / "cache/results.json"))));
  return {a == b && a == cold && warm_fits == 0,
          fmt("stripped results %s; transformer fits: uncached %llu, cold cache %llu, warm cache %llu",
              a == b && a == cold ? "byte-identical" : "DIFFER", static_cast<unsigned long long>(uncached_fits),
              static_cast<unsigned long long>(cold_fits), static_cast<unsigned long long>(warm_fits))};
}

// ------------------------------------------------------------------ 7

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HYPERPIPE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome parallel_determinism() {
  testing::TempDir dir;
  const Json spec = {
      {"name", "jobs"},
      {"data", {{"path", std::string(HYPERPIPE_SOURCE_DIR) + "/data/heart_synthetic.csv"},
                {"target_column", "DEATH_EVENT"},
                {"kind", "classification"}}},
      {"cv", {{"outer", {{"strategy", "ShuffleSplit"}, {"n_splits", 5}, {"test_size", 0.2}}},
              {"inner", {{"strategy", "KFold"}, {"n_splits", 4}, {"shuffle", true}}}}},
      {"use_test_set", true},
      {"metrics", {"balanced_accuracy", "f1_score", "matthews_corrcoef"}},
      {"best_config_metric", "balanced_accuracy"},
      {"optimizer", {{"name", "switch_optimizer"}, {"params", {{"sub_strategy", "random_grid_search"}, {"n_configurations", 4}}}}},
      {"seed", 77},
      {"verbosity", 0},
      {"elements", Json::parse(R"([
        {"kind": "element", "name": "scaler", "keyword": "StandardScaler"},
        {"kind": "element", "name": "imputer", "keyword": "SimpleImputer"},
        {"kind": "element", "name": "balance", "keyword": "ImbalancedDataTransformer",
         "hyperparameters": {"method_name": ["RandomOverSampler", "SMOTE"]}},
        {"kind": "switch", "name": "estimator", "children": [
          {"kind": "element", "name": "forest", "keyword": "RandomForestClassifier", "fixed_params": {"n_estimators": 20},
           "hyperparameters": {"min_samples_split": [2, 8]}},
          {"kind": "element", "name": "knn", "keyword": "KNeighborsClassifier",
           "hyperparameters": {"n_neighbors": [5, 11]}}]}
      ])")}};
  write_file_atomic(dir / "spec.json", spec.dump(2));
  const std::string base = "run --spec " + (dir / "spec.json").string() + " --project-folder ";
  const int c1 = run_cli(base + (dir / "one").string() + " --jobs 1");
  const int c4 = run_cli(base + (dir / "four").string() + " --jobs 4");
  if (c1 != 0 || c4 != 0) return {false, fmt("cli exit codes %d and %d", c1, c4)};
  const std::string a = canonical_dump(strip_volatile(Json::parse(read_file(dir / "one/jobs/results.json"))));
  const std::string b = canonical_dump(strip_volatile(Json::parse(read_file(dir / "four/jobs/results.json"))));
  return {a == b, fmt("--jobs 1 vs --jobs 4: stripped results.json %s (%zu bytes)", a == b ? "identical" : "DIFFER",
                      a.size())};
}

// ------------------------------------------------------------------ 8

Node forest_node() {
  return Node::element("forest", "RandomForestClassifier", {{"n_estimators", std::int64_t{15}}},
                       {{"min_samples_split", HS::categorical(ints({2, 6, 12}))}});
}
Node knn_node() {
  return Node::element("knn", "KNeighborsClassifier", {}, {{"n_neighbors", HS::categorical(ints({3, 7, 11}))}});
}

ResultTree equivalence_run(std::vector<Node> nodes, const Dataset& d) {
  HyperpipeConfig cfg;
  cfg.name = "switch";
  cfg.pipeline = Pipeline(std::move(nodes));
  cfg.metrics = {kBest};
  cfg.best_config_metric = kBest;
  cfg.outer_cv = CvStrategy::kfold(3, true);
  cfg.inner_cv = CvStrategy::kfold(3, true);
  cfg.use_test_set = false;
  cfg.seed = 808;
  return hyperpipe_fit(cfg, d, {nullptr, nullptr, false}).tree;
}

Outcome switch_equivalence() {
  testing::MixtureSpec spec;
  spec.rows = 210;
  spec.seed = 818;
  const Dataset d = testing::gaussian_mixture(spec);
  const auto sw = equivalence_run({Node::element("scaler", "StandardScaler"), Node::switch_of("est", {forest_node(), knn_node()})}, d);
  const std::vector<ResultTree> single = {equivalence_run({Node::element("scaler", "StandardScaler"), forest_node()}, d),
                                          equivalence_run({Node::element("scaler", "StandardScaler"), knn_node()}, d)};

  auto best_of = [](const FoldResult& f) { return f.tested_configs.at(*f.best_config_index); };
  std::size_t mismatches = 0;
  std::optional<std::pair<std::size_t, Config>> overall;  // (child, config) of the separate-run winner
  double overall_value = 0.0;
  for (std::size_t f = 0; f < sw.outer_folds.size(); ++f) {
    // Argmax over the separate runs; ties go to the earlier child.
    std::size_t child = 0;
    for (std::size_t k = 1; k < single.size(); ++k)
      if (best_of(single[k].outer_folds[f]).mean_validation_metrics.at(kBest) >
          best_of(single[child].outer_folds[f]).mean_validation_metrics.at(kBest))
        child = k;
    const auto expected = best_of(single[child].outer_folds[f]);
    Config got = sw.outer_folds[f].best_config;
    const auto got_child = static_cast<std::size_t>(std::get<std::int64_t>(got.at("est__current_element")));
    got.erase("est__current_element");
    mismatches += got_child != child || canonical(got) != canonical(expected.config) ||
                  best_of(sw.outer_folds[f]).mean_validation_metrics.at(kBest) !=
                      expected.mean_validation_metrics.at(kBest);
    const double v = expected.mean_validation_metrics.at(kBest);
    if (!overall || v > overall_value) {
      overall = {child, expected.config};
      overall_value = v;
    }
  }
  Config final_cfg = sw.best_config;
  const auto final_child = static_cast<std::size_t>(std::get<std::int64_t>(final_cfg.at("est__current_element")));
  final_cfg.erase("est__current_element");
  const bool overall_ok = overall && final_child == overall->first && canonical(final_cfg) == canonical(overall->second);
  return {mismatches == 0 && overall_ok,
          fmt("%zu/%zu fold-best mismatches vs separate runs; overall best %s (%s %s)", mismatches,
              sw.outer_folds.size(), overall_ok ? "matches" : "DIFFERS", final_child == 0 ? "forest" : "knn",
              canonical(final_cfg).c_str())};
}

// ------------------------------------------------------------------ 9

double segment_distance(const FeatureMatrix& x, std::size_t a, std::size_t b, const double* p) {
  double ab2 = 0.0, dot = 0.0;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const double ab = x(b, c) - x(a, c);
    ab2 += ab * ab;
    dot += (p[c] - x(a, c)) * ab;
  }
  const double t = ab2 == 0.0 ? 0.0 : std::clamp(dot / ab2, 0.0, 1.0);
  double d2 = 0.0;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const double q = x(a, c) + t * (x(b, c) - x(a, c)) - p[c];
    d2 += q * q;
  }
  return std::sqrt(d2);
}

Outcome resampler_contract() {
  SplitMix64 rng(909);
  const char* methods[] = {"RandomUnderSampler", "RandomOverSampler", "SMOTE"};
  std::size_t unequal = 0, off_segment = 0, synthetic = 0, row_count_changes = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t rows = 12 + rng.bounded(60), cols = 1 + rng.bounded(4);
    const auto minority = std::max<std::size_t>(2, static_cast<std::size_t>((0.08 + 0.3 * rng.uniform()) * rows));
    const double minority_label = static_cast<double>(rng.bounded(2));
    std::vector<double> xv(rows * cols), yv(rows, 1.0 - minority_label);
    for (auto& v : xv) v = rng.uniform() * 8.0 - 4.0;
    const auto order = permutation(rows, rng);
    for (std::size_t i = 0; i < minority; ++i) yv[order[i]] = minority_label;
    const FeatureMatrix x(rows, cols, xv);
    const TargetVector y(yv, TargetKind::classification);
    std::vector<std::size_t> minority_rows;
    for (std::size_t i = 0; i < rows; ++i)
      if (yv[i] == minority_label) minority_rows.push_back(i);

    for (const char* method : methods) {
      ImbalancedDataTransformer t;
      t.set_param("method_name", std::string(method));
      t.set_seed(static_cast<std::uint64_t>(trial));
      const auto out = t.resample(x, y);
      std::map<double, std::size_t> counts;
      for (double v : out.y.values()) ++counts[v];
      unequal += counts.size() != 2 || counts.begin()->second != counts.rbegin()->second;

      if (std::strcmp(method, "SMOTE") == 0) {
        for (std::size_t i = rows; i < out.x.rows(); ++i) {
          ++synthetic;
          std::vector<double> p(cols);
          for (std::size_t c = 0; c < cols; ++c) p[c] = out.x(i, c);
          double best = INFINITY;
          for (std::size_t a = 0; a < minority_rows.size(); ++a)
            for (std::size_t b = a + 1; b < minority_rows.size(); ++b)
              best = std::min(best, segment_distance(x, minority_rows[a], minority_rows[b], p.data()));
          worst = std::max(worst, best);
          off_segment += !(best <= 1e-9) || out.y[i] != minority_label;
        }
      }

      // Fit-only: predicting m rows through [resampler, knn] returns m predictions.
      Pipeline p({Node::element("balance", "ImbalancedDataTransformer", {{"method_name", std::string(method)}}),
                  Node::element("knn", "KNeighborsClassifier", {{"n_neighbors", std::int64_t{1}}})});
      p.assign_seeds(static_cast<std::uint64_t>(trial), {"acceptance"});
      p.fit(Dataset(x, y));
      const std::size_t m = 1 + rng.bounded(25);
      std::vector<double> q(m * cols);
      for (auto& v : q) v = rng.uniform();
      row_count_changes += p.predict(FeatureMatrix(m, cols, q)).size() != m;
    }
  }
  return {unequal == 0 && off_segment == 0 && row_count_changes == 0 && synthetic > 0,
          fmt("%zu/1500 resamples with unequal classes; %zu/%zu SMOTE points off a minority segment (max distance "
              "%.2e); %zu predict row-count changes",
              unequal, off_segment, synthetic, worst, row_count_changes)};
}

// ------------------------------------------------------------------ 10

Outcome persistence() {
  testing::TempDir dir;
  testing::MixtureSpec spec;
  spec.rows = 300;
  spec.missing_fraction = 0.05;
  spec.seed = 1010;
  Pipeline p({Node::element("scaler", "StandardScaler"), Node::element("imputer", "SimpleImputer"),
              Node::element("forest", "RandomForestClassifier", {{"n_estimators", std::int64_t{25}}})});
  p.assign_seeds(10, {"final"});
  p.fit(testing::gaussian_mixture(spec));
  save_model(p, {}, dir / "m.photon");
  const auto loaded = load_model(dir / "m.photon");

  testing::Normal z(1011);
  std::vector<double> v(1000 * p.n_features());
  for (auto& e : v) e = 2.5 * z();
  for (std::size_t i = 0; i < v.size(); i += 97) v[i] = NAN;
  const FeatureMatrix x(1000, p.n_features(), v);
  const auto a = p.predict(x), b = model_predict(loaded.pipeline, x);
  const bool same = a.size() == 1000 && b.size() == 1000 && std::memcmp(a.data(), b.data(), 1000 * sizeof(double)) == 0;

  const std::string good = read_file(dir / "m.photon");
  auto error_of = [&](const std::string& bytes) -> std::string {
    write_file_atomic(dir / "bad.photon", bytes);
    try {
      load_model(dir / "bad.photon");
    } catch (const ArchiveError& e) {
      return e.what();
    }
    return "(accepted)";
  };
  std::string magic = good;
  magic[3] ^= 0x20;
  const std::string e1 = error_of(magic), e2 = error_of(good.substr(0, good.size() - 100));
  return {same && e1 == "not a model archive" && e2 == "truncated payload",
          fmt("1000 predictions %s; corrupted magic -> \"%s\"; truncated -> \"%s\"",
              same ? "bit-identical" : "DIFFER", e1.c_str(), e2.c_str())};
}

// ------------------------------------------------------------------ 11

struct WorkflowRuns {
  fs::path explore_dir, confirm_dir;
  ResultTree explore, confirm;
  std::string winner;
};

std::optional<WorkflowRuns> g_workflow;
fs::path g_out;

double inverse_normal_cdf(double p) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (testing::normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

HyperpipeConfig workflow_config(const std::string& name, std::vector<Node> tail) {
  HyperpipeConfig cfg;
  cfg.name = name;
  std::vector<Node> nodes = {
      Node::element("scaler", "StandardScaler"), Node::element("imputer", "SimpleImputer"),
      Node::element("balance", "ImbalancedDataTransformer", {},
                    {{"method_name", HS::categorical({std::string("RandomUnderSampler"), std::string("RandomOverSampler"),
                                                      std::string("SMOTE")})}})};
  for (auto& n : tail) nodes.push_back(std::move(n));
  cfg.pipeline = Pipeline(std::move(nodes));
  cfg.metrics = {kBest, "accuracy", "f1_score", "matthews_corrcoef", "sensitivity", "specificity"};
  cfg.best_config_metric = kBest;
  cfg.outer_cv = CvStrategy::shuffle_split(5, 0.2);
  cfg.inner_cv = CvStrategy::kfold(5, true);
  cfg.seed = 1111;
  cfg.jobs = 0;
  cfg.project_folder = g_out;
  return cfg;
}

std::map<std::string, Node> workflow_estimators() {
  std::map<std::string, Node> m;
  m.emplace("forest", Node::element("forest", "RandomForestClassifier", {{"n_estimators", std::int64_t{60}}},
                                    {{"min_samples_split", HS::categorical(ints({2, 5, 10, 20}))},
                                     {"max_depth", HS::categorical(ints({0, 3, 6}))}}));
  m.emplace("svc", Node::element("svc", "LinearSVC", {}, {{"C", HS::float_points(0.001, 10.0, 9, RangeType::logspace)}}));
  m.emplace("knn", Node::element("knn", "KNeighborsClassifier", {},
                                 {{"n_neighbors", HS::integer_range(3, 32, 2)}}));
  return m;
}

double mixture_separation() { return 2.0 * inverse_normal_cdf(0.85); }

testing::MixtureSpec workflow_mixture(std::size_t rows, std::uint64_t seed) {
  testing::MixtureSpec spec;
  spec.rows = rows;
  spec.informative = 3;
  spec.noise = 3;
  spec.positive_fraction = 0.32;
  spec.separation = mixture_separation();
  spec.seed = seed;
  return spec;
}

Outcome end_to_end() {
  // Oracle first: for equal-covariance Gaussians with mean distance D, the
  // best balanced accuracy is Phi(D/2), reached by the midpoint hyperplane.
  // Confirm on 10^6 draws from the same generator.
  const double delta = mixture_separation();
  const Dataset big = testing::gaussian_mixture(workflow_mixture(1'000'000, 4242));
  double hit[2] = {0, 0}, n[2] = {0, 0};
  for (std::size_t i = 0; i < big.rows(); ++i) {
    const double s = big.x(i, 0) + big.x(i, 1) + big.x(i, 2);
    const int label = big.y[i] == 1.0;
    n[label] += 1;
    hit[label] += (s > 0) == (label == 1);
  }
  const double mc_bayes = 0.5 * (hit[0] / n[0] + hit[1] / n[1]);
  if (std::abs(mc_bayes - 0.85) > 0.003)
    return {false, fmt("Monte-Carlo Bayes balanced accuracy %.4f is not 0.85", mc_bayes)};
  const double bayes = testing::normal_cdf(delta / 2.0);

  auto spec = workflow_mixture(300, 1112);
  spec.missing_fraction = 0.02;
  const Dataset d = testing::gaussian_mixture(spec);

  WorkflowRuns runs;
  {
    auto est = workflow_estimators();
    auto cfg = workflow_config("explore", {Node::switch_of("estimator", {est.at("forest"), est.at("svc"), est.at("knn")})});
    cfg.optimizer = {"switch_optimizer", {{"sub_strategy", std::string("random_grid_search")}, {"n_configurations", std::int64_t{10}}}};
    cfg.use_test_set = false;
    runs.explore = hyperpipe_fit(cfg, d).tree;
    runs.explore_dir = cfg.output_folder();
  }
  const double validation = runs.explore.summary.at("validation").at(kBest).mean;
  const double dummy = runs.explore.summary.at("dummy_train").at(kBest).mean;
  runs.winner = runs.explore.estimator_comparison.front().child;

  {
    auto est = workflow_estimators();
    auto cfg = workflow_config("confirm", {est.at(runs.winner)});
    cfg.optimizer = {"grid_search", {}};
    cfg.use_test_set = true;
    runs.confirm = hyperpipe_fit(cfg, d).tree;
    runs.confirm_dir = cfg.output_folder();
  }
  const double confirm_val = runs.confirm.summary.at("validation").at(kBest).mean;
  const double confirm_test = runs.confirm.summary.at("test").at(kBest).mean;
  g_workflow = runs;

  const bool ok = std::abs(validation - bayes) <= 0.05 && validation - dummy >= 0.15 &&
                  std::abs(confirm_test - confirm_val) <= 0.05;
  return {ok, fmt("Bayes %.4f (Monte-Carlo %.4f, separation %.4f); switch run validation %.4f vs dummy %.4f; "
                  "%s alone: validation %.4f, test %.4f",
                  bayes, mc_bayes, delta, validation, dummy, runs.winner.c_str(), confirm_val, confirm_test)};
}

// ------------------------------------------------------------------ 12

Outcome report_completeness() {
  if (!g_workflow) {
    const auto o = end_to_end();
    if (!g_workflow) return {false, "end-to-end run unavailable: " + o.detail};
  }
  std::size_t missing = 0, external = 0, stray = 0;
  std::string first_stray;
  for (const auto& dir : {g_workflow->explore_dir, g_workflow->confirm_dir}) {
    const std::string html = read_file(dir / "report.html");
    const Json results = Json::parse(read_file(dir / "results.json"));
    for (const char* id : {"section-performance", "section-confusion", "section-progress", "section-pipeline",
                           "section-parallel", "section-configs"})
      missing += html.find(std::string("id=\"") + id + "\"") == std::string::npos;
    external += testing::external_references(html).size();
    const auto s = testing::unexplained_numbers(html, results);
    if (!s.empty() && first_stray.empty()) first_stray = s.front();
    stray += s.size();
  }
  return {missing == 0 && external == 0 && stray == 0,
          fmt("2 reports: %zu missing sections, %zu external references, %zu numbers not in results.json%s", missing,
              external, stray, first_stray.empty() ? "" : (" (first: " + first_stray + ")").c_str())};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
  double budget_s;  // 0: no limit
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  std::optional<testing::TempDir> scratch;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) {
      g_out = argv[++i];
      fs::create_directories(g_out);
    } else {
      only.insert(std::atoi(argv[i]));
    }
  }
  if (g_out.empty()) {
    scratch.emplace("acceptance");
    g_out = scratch->path();
  }

  const std::vector<Criterion> criteria = {
      {1, "no-leakage audit", no_leakage, 60},
      {2, "metric oracle", metric_oracle, 0},
      {3, "grid-count law", grid_count_law, 0},
      {4, "nested CV counts and fold-best argmax", nested_cv_counts, 0},
      {5, "constraint pruning", constraint_pruning, 0},
      {6, "cache equivalence", cache_equivalence, 0},
      {7, "determinism under parallelism", parallel_determinism, 0},
      {8, "switch equivalence", switch_equivalence, 0},
      {9, "resampler contract", resampler_contract, 0},
      {10, "persistence round trip", persistence, 0},
      {11, "end-to-end workflow", end_to_end, 300},
      {12, "report completeness", report_completeness, 0},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_s);
    }
    failed += !o.pass;
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
