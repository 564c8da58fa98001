#include <algorithm>
#include <cmath>
#include <numeric>

#include "hyperpipe/elements/builtins.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/rng.hpp"

namespace hyperpipe {

namespace {

double impurity(const std::vector<double>& counts, double total, bool entropy) {
  if (total <= 0.0) return 0.0;
  double acc = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    acc += entropy ? -p * std::log2(p) : p * p;
  }
  return entropy ? acc : 1.0 - acc;
}

std::size_t argmax_first(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<std::size_t> class_indices(const TargetVector& y, const std::vector<double>& classes) {
  std::vector<std::size_t> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());
  }
  return out;
}

TreeSettings settings_from(const std::string& criterion, std::int64_t min_samples_split, std::int64_t max_depth) {
  TreeSettings s;
  s.entropy = criterion == "entropy";
  s.min_samples_split = static_cast<std::size_t>(min_samples_split);
  s.max_depth = static_cast<std::size_t>(max_depth);
  return s;
}

}  // namespace

// -------------------------------------------------------------------- CartTree

void CartTree::grow(const FeatureMatrix& x, std::span<const std::size_t> class_index, std::size_t n_classes,
                    std::span<const std::size_t> rows, const TreeSettings& settings, std::uint64_t seed) {
  nodes_.clear();
  SplitMix64 rng(seed);
  const std::size_t d = x.cols();
  const std::size_t m = settings.max_features == 0 ? d : std::min(settings.max_features, d);
  std::vector<std::size_t> all_features(d);
  std::iota(all_features.begin(), all_features.end(), 0);

  struct Work {
    std::size_t node;
    std::vector<std::size_t> rows;
    std::size_t depth;
  };
  std::vector<Work> stack;
  nodes_.emplace_back();
  stack.push_back({0, std::vector<std::size_t>(rows.begin(), rows.end()), 0});

  std::vector<std::pair<double, std::size_t>> sorted;
  std::vector<double> left(n_classes), right(n_classes), counts(n_classes);

  while (!stack.empty()) {
    Work work = std::move(stack.back());
    stack.pop_back();
    const auto& sample = work.rows;
    std::fill(counts.begin(), counts.end(), 0.0);
    for (auto r : sample) counts[class_index[r]] += 1.0;
    const double n = static_cast<double>(sample.size());
    const double parent = impurity(counts, n, settings.entropy);

    auto make_leaf = [&] {
      nodes_[work.node].feature = -1;
      nodes_[work.node].class_counts = counts;
    };
    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
    if (pure || sample.size() < settings.min_samples_split ||
        (settings.max_depth != 0 && work.depth >= settings.max_depth)) {
      make_leaf();
      continue;
    }

    std::vector<std::size_t> features;
    if (m == d) {
      features = all_features;
    } else {
      auto pool = all_features;
      for (std::size_t i = 0; i < m; ++i) std::swap(pool[i], pool[i + rng.bounded(d - i)]);
      features.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
      std::sort(features.begin(), features.end());
    }

    double best_gain = -std::numeric_limits<double>::infinity();
    std::int64_t best_feature = -1;
    double best_threshold = 0.0;
    for (auto f : features) {
      sorted.clear();
      for (auto r : sample) sorted.emplace_back(x(r, f), class_index[r]);
      std::sort(sorted.begin(), sorted.end());
      std::fill(left.begin(), left.end(), 0.0);
      right = counts;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left[sorted[i].second] += 1.0;
        right[sorted[i].second] -= 1.0;
        const double lo = sorted[i].first;
        const double hi = sorted[i + 1].first;
        if (!(lo < hi)) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double gain =
            parent - (nl / n) * impurity(left, nl, settings.entropy) - (nr / n) * impurity(right, nr, settings.entropy);
        // Features and thresholds are visited ascending, so only a strictly
        // better gain replaces the incumbent.
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = static_cast<std::int64_t>(f);
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) {
      make_leaf();
      continue;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : sample) {
      (x(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_rows : right_rows).push_back(r);
    }
    const auto left_id = nodes_.size();
    nodes_.emplace_back();
    const auto right_id = nodes_.size();
    nodes_.emplace_back();
    auto& node = nodes_[work.node];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = static_cast<std::int64_t>(left_id);
    node.right = static_cast<std::int64_t>(right_id);
    stack.push_back({right_id, std::move(right_rows), work.depth + 1});
    stack.push_back({left_id, std::move(left_rows), work.depth + 1});
  }
}

const TreeNode& CartTree::leaf_for(std::span<const double> sample) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& node = nodes_[i];
    i = static_cast<std::size_t>(sample[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
  }
  return nodes_[i];
}

std::size_t CartTree::predict_index(std::span<const double> sample) const {
  return argmax_first(leaf_for(sample).class_counts);
}

void CartTree::write(ByteWriter& out) const {
  out.u64(nodes_.size());
  for (const auto& n : nodes_) {
    out.i64(n.feature);
    out.f64(n.threshold);
    out.i64(n.left);
    out.i64(n.right);
    out.f64s(n.class_counts);
  }
}

void CartTree::read(ByteReader& in) {
  const auto count = in.u64();
  if (count == 0 || count > in.remaining()) throw ArchiveError("tree state is inconsistent");
  nodes_.assign(count, {});
  for (auto& n : nodes_) {
    n.feature = in.i64();
    n.threshold = in.f64();
    n.left = in.i64();
    n.right = in.i64();
    n.class_counts = in.f64s();
  }
  for (const auto& n : nodes_) {
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || static_cast<std::uint64_t>(n.left) >= count ||
                           static_cast<std::uint64_t>(n.right) >= count)) {
      throw ArchiveError("tree state is inconsistent");
    }
    if (n.feature < 0 && n.class_counts.empty()) throw ArchiveError("tree state is inconsistent");
  }
}

// ------------------------------------------------------ DecisionTreeClassifier

const std::vector<ParamSpec>& DecisionTreeClassifier::schema() const {
  static const std::vector<ParamSpec> specs = {
      {"criterion", std::string("gini"), check_one_of({"gini", "entropy"})},
      {"max_depth", std::int64_t{0}, check_int_at_least(0)},
      {"min_samples_split", std::int64_t{2}, check_int_at_least(2)},
  };
  return specs;
}

void DecisionTreeClassifier::fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData&) {
  require_finite(x, keyword());
  classes_ = y.classes();
  const auto idx = class_indices(y, classes_);
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  tree_.grow(x, idx, classes_.size(), rows,
             settings_from(string_param("criterion"), int_param("min_samples_split"), int_param("max_depth")), seed());
  n_features_ = x.cols();
  mark_fitted();
}

std::vector<double> DecisionTreeClassifier::predict(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_columns(x, n_features_, keyword());
  require_finite(x, keyword());
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = classes_[tree_.predict_index(x.row(r))];
  return out;
}

FeatureMatrix DecisionTreeClassifier::predict_proba(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_columns(x, n_features_, keyword());
  require_finite(x, keyword());
  FeatureMatrix out = FeatureMatrix::filled(x.rows(), classes_.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto& counts = tree_.leaf_for(x.row(r)).class_counts;
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    for (std::size_t c = 0; c < counts.size(); ++c) out(r, c) = counts[c] / total;
  }
  return out;
}

void DecisionTreeClassifier::write_state(ByteWriter& out) const {
  out.u64(n_features_);
  out.f64s(classes_);
  tree_.write(out);
}

void DecisionTreeClassifier::read_state(ByteReader& in) {
  n_features_ = in.u64();
  classes_ = in.f64s();
  tree_.read(in);
}

// ------------------------------------------------------ RandomForestClassifier

std::size_t RandomForestClassifier::resolve_max_features(const ParamValue& setting, std::size_t cols) {
  std::size_t m = 0;
  if (const auto* s = std::get_if<std::string>(&setting)) {
    if (*s == "auto" || *s == "sqrt") m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(cols))));
    else if (*s == "log2") m = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(cols))));
    else throw ValidationError("invalid max_features '" + *s + "'");
  } else {
    const auto v = as_int(setting, "max_features");
    if (v < 1) throw ValidationError("max_features must be at least 1");
    m = static_cast<std::size_t>(v);
  }
  return std::clamp<std::size_t>(m, 1, cols);
}

const std::vector<ParamSpec>& RandomForestClassifier::schema() const {
  static const std::vector<ParamSpec> specs = {
      {"bootstrap", true, check_bool()},
      {"criterion", std::string("gini"), check_one_of({"gini", "entropy"})},
      {"max_depth", std::int64_t{0}, check_int_at_least(0)},
      {"max_features", std::string("sqrt"),
       [](const ParamValue& v) {
         if (std::holds_alternative<std::string>(v)) check_one_of({"auto", "sqrt", "log2"})(v);
         else if (as_int(v, "max_features") < 1) throw ValidationError("must be at least 1");
       }},
      {"min_samples_split", std::int64_t{2}, check_int_at_least(2)},
      {"n_estimators", std::int64_t{50}, check_int_at_least(1)},
  };
  return specs;
}

void RandomForestClassifier::fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData&) {
  require_finite(x, keyword());
  classes_ = y.classes();
  const auto idx = class_indices(y, classes_);
  auto settings = settings_from(string_param("criterion"), int_param("min_samples_split"), int_param("max_depth"));
  settings.max_features = resolve_max_features(param("max_features"), x.cols());
  const bool bootstrap = bool_param("bootstrap");
  const auto n_trees = static_cast<std::size_t>(int_param("n_estimators"));

  SplitMix64 rng(seed());
  trees_.assign(n_trees, {});
  std::vector<std::size_t> rows(x.rows());
  for (auto& tree : trees_) {
    const std::uint64_t tree_seed = rng.next();
    if (bootstrap) {
      for (auto& r : rows) r = rng.bounded(x.rows());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    tree.grow(x, idx, classes_.size(), rows, settings, tree_seed);
  }
  n_features_ = x.cols();
  mark_fitted();
}

std::vector<double> RandomForestClassifier::predict(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_columns(x, n_features_, keyword());
  require_finite(x, keyword());
  std::vector<double> out(x.rows());
  std::vector<double> votes(classes_.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0.0);
    for (const auto& tree : trees_) votes[tree.predict_index(x.row(r))] += 1.0;
    out[r] = classes_[argmax_first(votes)];
  }
  return out;
}

FeatureMatrix RandomForestClassifier::predict_proba(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_columns(x, n_features_, keyword());
  require_finite(x, keyword());
  FeatureMatrix out = FeatureMatrix::filled(x.rows(), classes_.size());
  const double share = 1.0 / static_cast<double>(trees_.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (const auto& tree : trees_) {
      const auto& counts = tree.leaf_for(x.row(r)).class_counts;
      const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
      for (std::size_t c = 0; c < counts.size(); ++c) out(r, c) += share * counts[c] / total;
    }
  }
  return out;
}

void RandomForestClassifier::write_state(ByteWriter& out) const {
  out.u64(n_features_);
  out.f64s(classes_);
  out.u64(trees_.size());
  for (const auto& t : trees_) t.write(out);
}

void RandomForestClassifier::read_state(ByteReader& in) {
  n_features_ = in.u64();
  classes_ = in.f64s();
  const auto n = in.u64();
  if (n == 0 || n > in.remaining()) throw ArchiveError("forest state is inconsistent");
  trees_.assign(n, {});
  for (auto& t : trees_) t.read(in);
}

}  // namespace hyperpipe
