#include "hyperpipe/spec_file.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "hyperpipe/error.hpp"

namespace hyperpipe {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& message) {
  throw ValidationError(where + ": " + message);
}

void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
  }
}

const Json& object_at(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, "missing field");
  if (!it->is_object()) fail(where, "expected an object");
  return *it;
}

std::string string_at(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, "missing field");
  if (!it->is_string()) fail(where, "expected a string");
  return it->get<std::string>();
}

std::uint64_t unsigned_at(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail(where, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

bool bool_at(const Json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected true or false");
  return j.get<bool>();
}

double number_at(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

template <typename F>
auto rethrow_at(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    fail(where, e.what());
  }
}

CvStrategy parse_cv(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  check_keys(j, {"strategy", "n_splits", "shuffle", "test_size"}, where);
  CvStrategy cv;
  cv.variant = rethrow_at(where + ".strategy", [&] { return parse_cv_variant(string_at(j, "strategy", where + ".strategy")); });
  if (j.contains("n_splits")) cv.n_splits = unsigned_at(j["n_splits"], where + ".n_splits");
  if (j.contains("test_size")) {
    if (cv.variant != CvStrategy::Variant::shuffle_split) fail(where + ".test_size", "only applies to ShuffleSplit");
    cv.test_fraction = number_at(j["test_size"], where + ".test_size");
  }
  cv.shuffle = cv.variant == CvStrategy::Variant::shuffle_split;
  if (j.contains("shuffle")) cv.shuffle = bool_at(j["shuffle"], where + ".shuffle");
  return cv;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

// Maps every value's field path ("cv.outer.n_splits", "elements[0].keyword")
// to the line it starts on. Only run on text nlohmann already accepted.
class LineIndex {
 public:
  explicit LineIndex(std::string_view text) : s_(text) { value(""); }

  /// Line of the longest recorded prefix of `path`, 0 if none.
  std::size_t line_of(std::string path) const {
    while (true) {
      if (auto it = lines_.find(path); it != lines_.end()) return it->second;
      const auto cut = path.find_last_of(".[");
      if (cut == std::string::npos) return 0;
      path.resize(cut);
    }
  }

 private:
  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
      if (s_[i_] == '\n') ++line_;
      ++i_;
    }
  }

  std::string string() {
    std::string out;
    ++i_;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\') ++i_;
      out += s_[i_++];
    }
    ++i_;
    return out;
  }

  void value(const std::string& path) {
    skip_ws();
    lines_.emplace(path, line_);
    if (i_ >= s_.size()) return;
    if (s_[i_] == '{') {
      ++i_;
      for (skip_ws(); i_ < s_.size() && s_[i_] != '}'; skip_ws()) {
        if (s_[i_] == ',') {
          ++i_;
          continue;
        }
        const std::string key = string();
        skip_ws();
        ++i_;  // ':'
        value(path.empty() ? key : path + "." + key);
      }
      ++i_;
    } else if (s_[i_] == '[') {
      ++i_;
      std::size_t n = 0;
      for (skip_ws(); i_ < s_.size() && s_[i_] != ']'; skip_ws()) {
        if (s_[i_] == ',') {
          ++i_;
          continue;
        }
        value(path + "[" + std::to_string(n++) + "]");
      }
      ++i_;
    } else if (s_[i_] == '"') {
      string();
    } else {
      while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' &&
             !std::isspace(static_cast<unsigned char>(s_[i_])))
        ++i_;
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
  std::size_t line_ = 1;
  std::map<std::string, std::size_t> lines_;
};

}  // namespace

AnalysisSpec parse_analysis_spec(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) fail("(root)", "expected an object");
  check_keys(j,
             {"name", "data", "cv", "use_test_set", "metrics", "best_config_metric", "optimizer",
              "performance_constraints", "seed", "project_folder", "cache_folder", "verbosity", "jobs", "elements"},
             "");
  AnalysisSpec spec;
  HyperpipeConfig& cfg = spec.config;
  cfg.name = string_at(j, "name", "name");

  const Json& data = object_at(j, "data", "data");
  check_keys(data, {"path", "target_column", "kind"}, "data");
  spec.data.path = resolve(base_dir, string_at(data, "path", "data.path"));
  if (auto it = data.find("target_column"); it != data.end()) {
    if (it->is_string())
      spec.data.target_column = it->get<std::string>();
    else
      spec.data.target_column = static_cast<std::size_t>(unsigned_at(*it, "data.target_column"));
  }
  if (data.contains("kind"))
    spec.data.kind = rethrow_at("data.kind", [&] { return parse_target_kind(string_at(data, "kind", "data.kind")); });

  cfg.outer_cv = cfg.inner_cv = CvStrategy::kfold(5, true);
  if (auto it = j.find("cv"); it != j.end()) {
    if (!it->is_object()) fail("cv", "expected an object");
    check_keys(*it, {"outer", "inner"}, "cv");
    if (it->contains("outer")) cfg.outer_cv = parse_cv((*it)["outer"], "cv.outer");
    if (it->contains("inner")) cfg.inner_cv = parse_cv((*it)["inner"], "cv.inner");
  }
  if (j.contains("use_test_set")) cfg.use_test_set = bool_at(j["use_test_set"], "use_test_set");

  const auto mit = j.find("metrics");
  if (mit == j.end()) fail("metrics", "missing field");
  if (!mit->is_array()) fail("metrics", "expected an array of metric names");
  for (std::size_t i = 0; i < mit->size(); ++i) {
    const std::string where = "metrics[" + std::to_string(i) + "]";
    if (!(*mit)[i].is_string()) fail(where, "expected a metric name");
    cfg.metrics.push_back((*mit)[i].get<std::string>());
  }
  cfg.best_config_metric = j.contains("best_config_metric") ? string_at(j, "best_config_metric", "best_config_metric")
                                                            : (cfg.metrics.empty() ? "" : cfg.metrics.front());

  if (auto it = j.find("optimizer"); it != j.end()) {
    if (!it->is_object()) fail("optimizer", "expected an object");
    check_keys(*it, {"name", "params"}, "optimizer");
    cfg.optimizer.name = string_at(*it, "name", "optimizer.name");
    if (it->contains("params")) cfg.optimizer.params = config_from_json((*it)["params"], "optimizer.params");
  }

  if (auto it = j.find("performance_constraints"); it != j.end()) {
    if (!it->is_array()) fail("performance_constraints", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "performance_constraints[" + std::to_string(i) + "]";
      const Json& c = (*it)[i];
      if (!c.is_object()) fail(where, "expected an object");
      check_keys(c, {"metric", "threshold", "strategy"}, where);
      PerformanceConstraint pc;
      pc.metric = string_at(c, "metric", where + ".metric");
      if (!c.contains("threshold")) fail(where + ".threshold", "missing field");
      pc.threshold = number_at(c["threshold"], where + ".threshold");
      if (c.contains("strategy"))
        pc.strategy = rethrow_at(where + ".strategy",
                                 [&] { return parse_constraint_strategy(string_at(c, "strategy", where + ".strategy")); });
      cfg.performance_constraints.push_back(pc);
    }
  }

  if (j.contains("seed")) cfg.seed = unsigned_at(j["seed"], "seed");
  cfg.project_folder = j.contains("project_folder") ? resolve(base_dir, string_at(j, "project_folder", "project_folder"))
                                                    : base_dir;
  if (j.contains("cache_folder")) cfg.cache_folder = resolve(base_dir, string_at(j, "cache_folder", "cache_folder"));
  if (j.contains("verbosity")) {
    cfg.verbosity = static_cast<int>(unsigned_at(j["verbosity"], "verbosity"));
    if (cfg.verbosity > 2) fail("verbosity", "must be 0, 1 or 2");
  }
  if (j.contains("jobs")) cfg.jobs = unsigned_at(j["jobs"], "jobs");

  if (!j.contains("elements")) fail("elements", "missing field");
  cfg.pipeline = pipeline_from_json(j["elements"], default_registry(), "elements");
  cfg.validate(spec.data.kind);
  return spec;
}

AnalysisSpec load_analysis_spec(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError(path.string() + ": cannot read spec file");
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // nlohmann reports "parse error at line L, column C: ..."
    std::string msg = e.what();
    if (auto pos = msg.find("parse error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ValidationError(path.string() + ": " + msg);
  }
  try {
    return parse_analysis_spec(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    const std::size_t line = colon == std::string::npos ? 0 : LineIndex(text).line_of(msg.substr(0, colon));
    throw ValidationError(path.string() + (line ? ":" + std::to_string(line) : std::string()) + ": " + msg);
  }
}

}  // namespace hyperpipe
