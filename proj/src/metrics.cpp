#include "hyperpipe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "hyperpipe/error.hpp"

namespace hyperpipe {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw ValidationError("y_true and y_pred differ in length");
  if (a == 0) throw ValidationError("cannot score empty predictions");
}

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::vector<double> label_union(std::span<const double> a, std::span<const double> b) {
  std::set<double> s(a.begin(), a.end());
  s.insert(b.begin(), b.end());
  return {s.begin(), s.end()};
}

struct BinaryScores {
  double precision, recall, specificity, f1, mcc, accuracy;
};

BinaryScores binary_scores(const ConfusionCounts& c) {
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  BinaryScores s{};
  s.precision = safe_div(tp, tp + fp);
  s.recall = safe_div(tp, tp + fn);
  s.specificity = safe_div(tn, tn + fp);
  s.f1 = safe_div(2.0 * s.precision * s.recall, s.precision + s.recall);
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  s.mcc = den == 0.0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(den);
  s.accuracy = (tp + tn) / (tp + tn + fp + fn);
  return s;
}

double multiclass_score(const std::string& metric, std::span<const double> t, std::span<const double> p) {
  const auto labels = label_union(t, p);
  if (metric == "accuracy") {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < t.size(); ++i) hit += t[i] == p[i];
    return static_cast<double>(hit) / static_cast<double>(t.size());
  }
  std::map<double, std::size_t> tp, support, predicted;
  for (std::size_t i = 0; i < t.size(); ++i) {
    ++support[t[i]];
    ++predicted[p[i]];
    if (t[i] == p[i]) ++tp[t[i]];
  }
  if (metric == "balanced_accuracy") {
    double acc = 0.0;
    for (const auto& [label, n] : support) acc += static_cast<double>(tp[label]) / static_cast<double>(n);
    return acc / static_cast<double>(support.size());
  }
  if (metric == "precision" || metric == "recall" || metric == "f1_score") {
    double acc = 0.0;
    for (double label : labels) {
      const double prec = safe_div(static_cast<double>(tp[label]), static_cast<double>(predicted[label]));
      const double rec = safe_div(static_cast<double>(tp[label]), static_cast<double>(support[label]));
      if (metric == "precision") acc += prec;
      else if (metric == "recall") acc += rec;
      else acc += safe_div(2.0 * prec * rec, prec + rec);
    }
    return acc / static_cast<double>(labels.size());
  }
  throw ValidationError("metric '" + metric + "' is only defined for binary classification");
}

double regression_score(const std::string& metric, std::span<const double> t, std::span<const double> p) {
  const double n = static_cast<double>(t.size());
  if (metric == "mean_absolute_error" || metric == "mean_squared_error") {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double d = t[i] - p[i];
      acc += metric == "mean_absolute_error" ? std::abs(d) : d * d;
    }
    return acc / n;
  }
  // r2
  double mean = 0.0;
  for (double v : t) mean += v;
  mean /= n;
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    ss_tot += (t[i] - mean) * (t[i] - mean);
    ss_res += (t[i] - p[i]) * (t[i] - p[i]);
  }
  return ss_tot == 0.0 ? 0.0 : 1.0 - ss_res / ss_tot;
}

}  // namespace

ConfusionCounts confusion_counts(std::span<const double> y_true, std::span<const double> y_pred, double positive_label) {
  check_lengths(y_true.size(), y_pred.size());
  auto labels = label_union(y_true, y_pred);
  if (std::find(labels.begin(), labels.end(), positive_label) == labels.end()) labels.push_back(positive_label);
  if (labels.size() > 2) throw ValidationError("confusion counts need binary labels, found more than two distinct labels");
  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool actual = y_true[i] == positive_label;
    const bool predicted = y_pred[i] == positive_label;
    if (actual && predicted) ++c.tp;
    else if (actual) ++c.fn;
    else if (predicted) ++c.fp;
    else ++c.tn;
  }
  return c;
}

ConfusionMatrix confusion_matrix(std::span<const double> y_true, std::span<const double> y_pred) {
  check_lengths(y_true.size(), y_pred.size());
  ConfusionMatrix m;
  m.labels = label_union(y_true, y_pred);
  const std::size_t k = m.labels.size();
  m.counts.assign(k, std::vector<std::size_t>(k, 0));
  auto index = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(m.labels.begin(), m.labels.end(), v) - m.labels.begin());
  };
  for (std::size_t i = 0; i < y_true.size(); ++i) ++m.counts[index(y_true[i])][index(y_pred[i])];
  return m;
}

ConfusionMatrix sum_confusion_matrices(std::span<const ConfusionMatrix> matrices) {
  std::set<double> all;
  for (const auto& m : matrices) all.insert(m.labels.begin(), m.labels.end());
  ConfusionMatrix out;
  out.labels.assign(all.begin(), all.end());
  const std::size_t k = out.labels.size();
  out.counts.assign(k, std::vector<std::size_t>(k, 0));
  auto index = [&](double v) {
    return static_cast<std::size_t>(std::lower_bound(out.labels.begin(), out.labels.end(), v) - out.labels.begin());
  };
  for (const auto& m : matrices) {
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
      for (std::size_t j = 0; j < m.labels.size(); ++j) out.counts[index(m.labels[i])][index(m.labels[j])] += m.counts[i][j];
    }
  }
  return out;
}

const std::vector<MetricInfo>& metric_registry() {
  static const std::vector<MetricInfo> registry = {
      {"accuracy", TargetKind::classification, true},
      {"balanced_accuracy", TargetKind::classification, true},
      {"f1_score", TargetKind::classification, true},
      {"matthews_corrcoef", TargetKind::classification, true},
      {"precision", TargetKind::classification, true},
      {"recall", TargetKind::classification, true},
      {"sensitivity", TargetKind::classification, true},
      {"specificity", TargetKind::classification, true},
      {"mean_absolute_error", TargetKind::regression, false},
      {"mean_squared_error", TargetKind::regression, false},
      {"r2", TargetKind::regression, true},
  };
  return registry;
}

const MetricInfo& metric_info(const std::string& name) {
  for (const auto& m : metric_registry()) {
    if (m.name == name) return m;
  }
  throw ValidationError("unknown metric '" + name + "'");
}

bool is_metric(const std::string& name) {
  const auto& r = metric_registry();
  return std::any_of(r.begin(), r.end(), [&](const MetricInfo& m) { return m.name == name; });
}

bool greater_is_better(const std::string& name) { return metric_info(name).greater_is_better; }

double score(const std::string& metric, const TargetVector& y_true, std::span<const double> y_pred,
             const ScoreOptions& options) {
  const auto& info = metric_info(metric);
  if (info.kind != y_true.kind()) {
    throw ValidationError("metric '" + metric + "' is a " + to_string(info.kind) + " metric but targets are " +
                          to_string(y_true.kind()));
  }
  const std::span<const double> t(y_true.values());
  check_lengths(t.size(), y_pred.size());
  if (info.kind == TargetKind::regression) return regression_score(metric, t, y_pred);

  auto labels = label_union(t, y_pred);
  const double positive = options.positive_label.value_or(labels.back());
  if (std::find(labels.begin(), labels.end(), positive) == labels.end()) labels.push_back(positive);
  if (labels.size() > 2) return multiclass_score(metric, t, y_pred);

  const auto s = binary_scores(confusion_counts(t, y_pred, positive));
  if (metric == "accuracy") return s.accuracy;
  if (metric == "balanced_accuracy") return (s.recall + s.specificity) / 2.0;
  if (metric == "f1_score") return s.f1;
  if (metric == "matthews_corrcoef") return s.mcc;
  if (metric == "precision") return s.precision;
  if (metric == "recall" || metric == "sensitivity") return s.recall;
  if (metric == "specificity") return s.specificity;
  throw ValidationError("unknown metric '" + metric + "'");
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw ValidationError("cannot aggregate an empty list");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / n)};
}

}  // namespace hyperpipe
