#include "hyperpipe/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hyperpipe/error.hpp"

namespace hyperpipe {

std::string to_string(ConfigStatus s) {
  switch (s) {
    case ConfigStatus::completed: return "completed";
    case ConfigStatus::pruned: return "pruned";
    case ConfigStatus::failed: return "failed";
  }
  return "completed";
}

ConfigStatus parse_config_status(const std::string& text) {
  if (text == "completed") return ConfigStatus::completed;
  if (text == "pruned") return ConfigStatus::pruned;
  if (text == "failed") return ConfigStatus::failed;
  throw ValidationError("unknown config status '" + text + "'");
}

namespace {

Json metrics_json(const MetricMap& m) {
  Json j = Json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

MetricMap metrics_from(const Json& j) {
  MetricMap m;
  for (auto it = j.begin(); it != j.end(); ++it)
    m[it.key()] = it->is_null() ? std::nan("") : it->get<double>();
  return m;
}

Json cv_json(const CvStrategy& cv) {
  return {{"variant", to_string(cv.variant)},
          {"n_splits", cv.n_splits},
          {"test_fraction", cv.test_fraction},
          {"shuffle", cv.shuffle}};
}

CvStrategy cv_from(const Json& j) {
  CvStrategy cv;
  cv.variant = parse_cv_variant(j.at("variant").get<std::string>());
  cv.n_splits = j.at("n_splits").get<std::size_t>();
  cv.test_fraction = j.at("test_fraction").get<double>();
  cv.shuffle = j.at("shuffle").get<bool>();
  return cv;
}

Json confusion_json(const ConfusionMatrix& c) {
  return {{"labels", c.labels}, {"counts", c.counts}};
}

ConfusionMatrix confusion_from(const Json& j) {
  ConfusionMatrix c;
  c.labels = j.at("labels").get<std::vector<double>>();
  c.counts = j.at("counts").get<std::vector<std::vector<std::size_t>>>();
  return c;
}

Json inner_json(const InnerFoldRecord& r) {
  return {{"fold_id", r.fold_id},
          {"train_indices", r.train_indices},
          {"validation_indices", r.validation_indices},
          {"train_metrics", metrics_json(r.train_metrics)},
          {"validation_metrics", metrics_json(r.validation_metrics)},
          {"duration_ms", r.duration_ms}};
}

InnerFoldRecord inner_from(const Json& j) {
  InnerFoldRecord r;
  r.fold_id = j.at("fold_id").get<std::size_t>();
  r.train_indices = j.at("train_indices").get<std::vector<std::size_t>>();
  r.validation_indices = j.at("validation_indices").get<std::vector<std::size_t>>();
  r.train_metrics = metrics_from(j.at("train_metrics"));
  r.validation_metrics = metrics_from(j.at("validation_metrics"));
  r.duration_ms = j.at("duration_ms").get<double>();
  return r;
}

Json config_result_json(const ConfigResult& c) {
  Json j = {{"config_index", c.config_index},
            {"config", config_to_json(c.config)},
            {"status", to_string(c.status)},
            {"mean_train_metrics", metrics_json(c.mean_train_metrics)},
            {"mean_validation_metrics", metrics_json(c.mean_validation_metrics)},
            {"std_validation_metrics", metrics_json(c.std_validation_metrics)},
            {"duration_ms", c.duration_ms}};
  Json inner = Json::array();
  for (const auto& r : c.inner_folds) inner.push_back(inner_json(r));
  j["inner_folds"] = inner;
  if (c.status == ConfigStatus::failed) j["error"] = c.error;
  return j;
}

ConfigResult config_result_from(const Json& j) {
  ConfigResult c;
  c.config_index = j.at("config_index").get<std::size_t>();
  c.config = config_from_json(j.at("config"), "config");
  c.status = parse_config_status(j.at("status").get<std::string>());
  if (j.contains("error")) c.error = j["error"].get<std::string>();
  for (const auto& r : j.at("inner_folds")) c.inner_folds.push_back(inner_from(r));
  c.mean_train_metrics = metrics_from(j.at("mean_train_metrics"));
  c.mean_validation_metrics = metrics_from(j.at("mean_validation_metrics"));
  c.std_validation_metrics = metrics_from(j.at("std_validation_metrics"));
  c.duration_ms = j.at("duration_ms").get<double>();
  return c;
}

Json fold_json(const FoldResult& f) {
  Json j = {{"fold_id", f.fold_id},
            {"train_indices", f.train_indices},
            {"test_indices", f.test_indices},
            {"best_config", config_to_json(f.best_config)},
            {"evaluation_source", f.evaluation_source},
            {"duration_ms", f.duration_ms}};
  Json dummy = {{"train_metrics", metrics_json(f.baseline.train_metrics)}};
  if (f.baseline.test_metrics) dummy["test_metrics"] = metrics_json(*f.baseline.test_metrics);
  j["dummy"] = dummy;
  Json configs = Json::array();
  for (const auto& c : f.tested_configs) configs.push_back(config_result_json(c));
  j["tested_configs"] = configs;
  j["best_config_index"] = f.best_config_index ? Json(*f.best_config_index) : Json(nullptr);
  if (f.train_metrics) j["train_metrics"] = metrics_json(*f.train_metrics);
  if (f.test_metrics) j["test_metrics"] = metrics_json(*f.test_metrics);
  Json progress = Json::array();
  for (const auto& p : f.progress) progress.push_back(p ? Json(*p) : Json(nullptr));
  j["progress"] = progress;
  if (f.confusion) j["confusion_matrix"] = confusion_json(*f.confusion);
  if (!f.predictions.empty()) j["predictions"] = f.predictions;
  return j;
}

FoldResult fold_from(const Json& j) {
  FoldResult f;
  f.fold_id = j.at("fold_id").get<std::size_t>();
  f.train_indices = j.at("train_indices").get<std::vector<std::size_t>>();
  f.test_indices = j.at("test_indices").get<std::vector<std::size_t>>();
  const Json& dummy = j.at("dummy");
  f.baseline.train_metrics = metrics_from(dummy.at("train_metrics"));
  if (dummy.contains("test_metrics")) f.baseline.test_metrics = metrics_from(dummy["test_metrics"]);
  for (const auto& c : j.at("tested_configs")) f.tested_configs.push_back(config_result_from(c));
  if (!j.at("best_config_index").is_null()) f.best_config_index = j["best_config_index"].get<std::size_t>();
  f.best_config = config_from_json(j.at("best_config"), "best_config");
  if (j.contains("train_metrics")) f.train_metrics = metrics_from(j["train_metrics"]);
  if (j.contains("test_metrics")) f.test_metrics = metrics_from(j["test_metrics"]);
  for (const auto& p : j.at("progress"))
    f.progress.push_back(p.is_null() ? std::nullopt : std::optional<double>(p.get<double>()));
  f.evaluation_source = j.at("evaluation_source").get<std::string>();
  if (j.contains("confusion_matrix")) f.confusion = confusion_from(j["confusion_matrix"]);
  if (j.contains("predictions")) f.predictions = j["predictions"].get<std::vector<std::array<double, 2>>>();
  f.duration_ms = j.at("duration_ms").get<double>();
  return f;
}

Json row_json(const EstimatorRow& r) {
  return {{"child", r.child},
          {"keyword", r.keyword},
          {"mean_validation_metrics", metrics_json(r.mean_metrics)},
          {"folds_used", r.folds_used},
          {"omitted_folds", r.omitted_folds}};
}

EstimatorRow row_from(const Json& j) {
  EstimatorRow r;
  r.child = j.at("child").get<std::string>();
  r.keyword = j.at("keyword").get<std::string>();
  r.mean_metrics = metrics_from(j.at("mean_validation_metrics"));
  r.folds_used = j.at("folds_used").get<std::size_t>();
  r.omitted_folds = j.at("omitted_folds").get<std::vector<std::size_t>>();
  return r;
}

void dump_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
  if (std::string_view(buf).find_first_of(".e") == std::string_view::npos) out += ".0";
}

void dump(const Json& j, std::string& out, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // nlohmann::json keeps keys sorted
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        dump(*it, out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line; index lists would otherwise dominate the file.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      out += flat ? "[" : "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += flat ? ", " : ",\n";
        if (!flat) out += pad;
        dump(j[i], out, depth + 1);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      dump_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

const Json* find_node(const Json& nodes, const std::string& name) {
  for (const auto& n : nodes) {
    if (n.value("name", "") == name) return &n;
    if (n.contains("children"))
      if (const Json* hit = find_node(n["children"], name)) return hit;
  }
  return nullptr;
}

}  // namespace

Json to_json(const ResultTree& t) {
  Json j;
  j["schema_version"] = ResultTree::kSchemaVersion;
  j["name"] = t.name;
  j["timestamp"] = t.timestamp;
  j["seed"] = t.seed;
  j["target_kind"] = to_string(t.target_kind);
  j["n_samples"] = t.n_samples;
  j["n_features"] = t.n_features;
  j["outer_cv"] = cv_json(t.outer_cv);
  j["inner_cv"] = cv_json(t.inner_cv);
  j["metrics"] = t.metrics;
  j["best_config_metric"] = t.best_config_metric;
  j["optimizer"] = {{"name", t.optimizer.name}, {"params", config_to_json(t.optimizer.params)}};
  Json constraints = Json::array();
  for (const auto& c : t.performance_constraints)
    constraints.push_back({{"metric", c.metric}, {"threshold", c.threshold}, {"strategy", to_string(c.strategy)}});
  j["performance_constraints"] = constraints;
  j["use_test_set"] = t.use_test_set;
  j["pipeline"] = t.pipeline;

  Json folds = Json::array();
  for (const auto& f : t.outer_folds) folds.push_back(fold_json(f));
  j["outer_folds"] = folds;
  j["best_config"] = config_to_json(t.best_config);
  j["best_config_fold"] = t.best_config_fold;

  Json summary = Json::object();
  for (const auto& [partition, metrics] : t.summary) {
    Json p = Json::object();
    for (const auto& [metric, s] : metrics) p[metric] = {{"mean", s.mean}, {"std", s.std}};
    summary[partition] = p;
  }
  j["summary"] = summary;
  if (t.confusion) j["confusion_matrix"] = confusion_json(*t.confusion);
  if (!t.comparison_switch.empty()) {
    Json rows = Json::array();
    for (const auto& r : t.estimator_comparison) rows.push_back(row_json(r));
    j["estimator_comparison"] = {{"switch", t.comparison_switch}, {"rows", rows}};
  }
  j["final_fit"] = {{"n_samples", t.final_fit_samples}, {"duration_ms", t.final_fit_duration_ms}};
  j["model_path"] = t.model_path;
  j["duration_ms"] = t.duration_ms;
  return j;
}

ResultTree result_tree_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw ValidationError("results: expected an object");
    const int version = j.at("schema_version").get<int>();
    if (version != ResultTree::kSchemaVersion)
      throw ValidationError("results: unsupported schema_version " + std::to_string(version));
    ResultTree t;
    t.name = j.at("name").get<std::string>();
    t.timestamp = j.at("timestamp").get<std::string>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.target_kind = parse_target_kind(j.at("target_kind").get<std::string>());
    t.n_samples = j.at("n_samples").get<std::size_t>();
    t.n_features = j.at("n_features").get<std::size_t>();
    t.outer_cv = cv_from(j.at("outer_cv"));
    t.inner_cv = cv_from(j.at("inner_cv"));
    t.metrics = j.at("metrics").get<std::vector<std::string>>();
    t.best_config_metric = j.at("best_config_metric").get<std::string>();
    t.optimizer.name = j.at("optimizer").at("name").get<std::string>();
    t.optimizer.params = config_from_json(j["optimizer"].at("params"), "optimizer.params");
    for (const auto& c : j.at("performance_constraints"))
      t.performance_constraints.push_back({c.at("metric").get<std::string>(), c.at("threshold").get<double>(),
                                           parse_constraint_strategy(c.at("strategy").get<std::string>())});
    t.use_test_set = j.at("use_test_set").get<bool>();
    t.pipeline = j.at("pipeline");
    for (const auto& f : j.at("outer_folds")) t.outer_folds.push_back(fold_from(f));
    t.best_config = config_from_json(j.at("best_config"), "best_config");
    t.best_config_fold = j.at("best_config_fold").get<std::size_t>();
    for (auto p = j.at("summary").begin(); p != j["summary"].end(); ++p)
      for (auto m = p->begin(); m != p->end(); ++m)
        t.summary[p.key()][m.key()] = {m->at("mean").get<double>(), m->at("std").get<double>()};
    if (j.contains("confusion_matrix")) t.confusion = confusion_from(j["confusion_matrix"]);
    if (j.contains("estimator_comparison")) {
      t.comparison_switch = j["estimator_comparison"].at("switch").get<std::string>();
      for (const auto& r : j["estimator_comparison"].at("rows")) t.estimator_comparison.push_back(row_from(r));
    }
    t.final_fit_samples = j.at("final_fit").at("n_samples").get<std::size_t>();
    t.final_fit_duration_ms = j["final_fit"].at("duration_ms").get<double>();
    t.model_path = j.at("model_path").get<std::string>();
    t.duration_ms = j.at("duration_ms").get<double>();
    return t;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed results file: ") + e.what());
  }
}

std::string canonical_dump(const Json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

void write_results_json(const ResultTree& tree, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write results file " + path.string());
  f << canonical_dump(to_json(tree));
  if (!f) throw Error("failed writing results file " + path.string());
}

ResultTree read_results_json(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read results file " + path.string());
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ValidationError("malformed results file " + path.string() + ": " + e.what());
  }
  return result_tree_from_json(j);
}

Json strip_volatile(const Json& j) {
  if (j.is_object()) {
    Json out = Json::object();
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "duration_ms" && it.key() != "timestamp") out[it.key()] = strip_volatile(*it);
    return out;
  }
  if (j.is_array()) {
    Json out = Json::array();
    for (const auto& e : j) out.push_back(strip_volatile(e));
    return out;
  }
  return j;
}

std::optional<std::size_t> best_completed_config(const std::vector<ConfigResult>& configs,
                                                 const std::string& metric) {
  const bool gib = greater_is_better(metric);
  std::optional<std::size_t> best;
  double best_value = 0.0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (configs[i].status != ConfigStatus::completed) continue;
    auto it = configs[i].mean_validation_metrics.find(metric);
    if (it == configs[i].mean_validation_metrics.end() || std::isnan(it->second)) continue;
    const double v = it->second;
    if (!best || (gib ? v > best_value : v < best_value)) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

std::vector<EstimatorRow> best_config_per_estimator(const ResultTree& tree, const std::string& switch_name) {
  const Json* node = find_node(tree.pipeline, switch_name);
  if (!node) throw ValidationError("unknown node '" + switch_name + "'");
  if (node->value("kind", "") != "switch") throw ValidationError("node '" + switch_name + "' is not a switch");

  const std::string key = switch_name + "__current_element";
  const Json& children = node->at("children");
  std::vector<EstimatorRow> rows;
  for (std::size_t c = 0; c < children.size(); ++c) {
    EstimatorRow row;
    row.child = children[c].at("name").get<std::string>();
    row.keyword = children[c].value("keyword", children[c].at("kind").get<std::string>());
    std::map<std::string, std::vector<double>> values;
    for (const auto& fold : tree.outer_folds) {
      std::vector<ConfigResult> mine;
      for (const auto& cr : fold.tested_configs) {
        auto it = cr.config.find(key);
        if (it != cr.config.end() && as_int(it->second, key) == static_cast<std::int64_t>(c)) mine.push_back(cr);
      }
      auto best = best_completed_config(mine, tree.best_config_metric);
      if (!best) {
        row.omitted_folds.push_back(fold.fold_id);
        continue;
      }
      ++row.folds_used;
      for (const auto& [m, v] : mine[*best].mean_validation_metrics) values[m].push_back(v);
    }
    for (const auto& [m, vs] : values) row.mean_metrics[m] = aggregate(vs).mean;
    rows.push_back(std::move(row));
  }
  const std::string& metric = tree.best_config_metric;
  const bool gib = greater_is_better(metric);
  std::stable_sort(rows.begin(), rows.end(), [&](const EstimatorRow& a, const EstimatorRow& b) {
    auto ia = a.mean_metrics.find(metric), ib = b.mean_metrics.find(metric);
    if (ia == a.mean_metrics.end()) return false;
    if (ib == b.mean_metrics.end()) return true;
    return gib ? ia->second > ib->second : ia->second < ib->second;
  });
  return rows;
}

}  // namespace hyperpipe
