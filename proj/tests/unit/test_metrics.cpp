#include "doctest.h"

#include <cmath>
#include <map>
#include <set>

#include "hyperpipe/error.hpp"
#include "hyperpipe/metrics.hpp"
#include "hyperpipe/rng.hpp"

using namespace hyperpipe;

namespace {

TargetVector cls(std::vector<double> v) { return TargetVector(std::move(v), TargetKind::classification); }
TargetVector reg(std::vector<double> v) { return TargetVector(std::move(v), TargetKind::regression); }

double safe_div(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

// Textbook binary metrics straight from tp/fp/tn/fn counted in a loop.
std::map<std::string, double> binary_oracle(const std::vector<double>& t, const std::vector<double>& p, double pos) {
  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const bool tt = t[i] == pos, pp = p[i] == pos;
    tp += tt && pp;
    fp += !tt && pp;
    tn += !tt && !pp;
    fn += tt && !pp;
  }
  const double prec = safe_div(tp, tp + fp), rec = safe_div(tp, tp + fn), spec = safe_div(tn, tn + fp);
  const double denom = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  return {{"accuracy", (tp + tn) / t.size()},
          {"precision", prec},
          {"recall", rec},
          {"sensitivity", rec},
          {"specificity", spec},
          {"f1_score", safe_div(2 * prec * rec, prec + rec)},
          {"balanced_accuracy", (rec + spec) / 2},
          {"matthews_corrcoef", safe_div(tp * tn - fp * fn, denom)}};
}

}  // namespace

TEST_CASE("hand-computed binary example") {
  const auto t = cls({1, 1, 0, 0});
  const std::vector<double> p{1, 0, 1, 0};
  CHECK(score("accuracy", t, p) == doctest::Approx(0.5));
  CHECK(score("f1_score", t, p) == doctest::Approx(0.5));
  CHECK(score("matthews_corrcoef", t, p) == doctest::Approx(0.0));
  CHECK(score("balanced_accuracy", t, p) == doctest::Approx(0.5));
  CHECK(confusion_counts(t.values(), p, 1) == ConfusionCounts{1, 1, 1, 1});
}

TEST_CASE("imbalanced example distinguishes accuracy from balanced accuracy") {
  // 8 negatives all right, 2 positives: one hit, one miss.
  const auto t = cls({0, 0, 0, 0, 0, 0, 0, 0, 1, 1});
  const std::vector<double> p{0, 0, 0, 0, 0, 0, 0, 0, 1, 0};
  CHECK(score("accuracy", t, p) == doctest::Approx(0.9));
  CHECK(score("balanced_accuracy", t, p) == doctest::Approx(0.75));
  CHECK(score("precision", t, p) == doctest::Approx(1.0));
  CHECK(score("recall", t, p) == doctest::Approx(0.5));
  CHECK(score("specificity", t, p) == doctest::Approx(1.0));
  CHECK(score("f1_score", t, p) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("binary metrics agree with a brute-force oracle") {
  SplitMix64 rng(12);
  const std::vector<std::string> names{"accuracy",    "precision", "recall",           "sensitivity",
                                       "specificity", "f1_score",  "balanced_accuracy", "matthews_corrcoef"};
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.bounded(25);
    std::vector<double> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<double>(rng.bounded(2));
      p[i] = static_cast<double>(rng.bounded(2));
    }
    const auto oracle = binary_oracle(t, p, 1.0);
    for (const auto& name : names) {
      CAPTURE(name);
      CAPTURE(trial);
      CHECK(score(name, cls(t), p, {1.0}) == doctest::Approx(oracle.at(name)).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero-denominator conventions") {
  const auto t = cls({0, 0, 0});
  const std::vector<double> p{0, 0, 0};
  ScoreOptions opts{1.0};
  CHECK(score("precision", t, p, opts) == 0.0);
  CHECK(score("recall", t, p, opts) == 0.0);
  CHECK(score("f1_score", t, p, opts) == 0.0);
  CHECK(score("matthews_corrcoef", t, p, opts) == 0.0);
  CHECK(score("specificity", t, p, opts) == 1.0);
  CHECK(score("r2", reg({2, 2, 2}), std::vector<double>{1, 2, 3}) == 0.0);
}

TEST_CASE("positive label defaults to the larger label") {
  const auto t = cls({3, 3, 7, 7});
  const std::vector<double> p{3, 7, 7, 7};
  CHECK(score("precision", t, p) == doctest::Approx(2.0 / 3.0));
  CHECK(score("precision", t, p, {3.0}) == doctest::Approx(1.0));
}

TEST_CASE("multiclass macro averages") {
  const auto t = cls({0, 0, 1, 1, 2, 2});
  const std::vector<double> p{0, 1, 1, 1, 2, 0};
  CHECK(score("accuracy", t, p) == doctest::Approx(4.0 / 6.0));
  // recalls 1/2, 1, 1/2
  CHECK(score("balanced_accuracy", t, p) == doctest::Approx(2.0 / 3.0));
  CHECK(score("recall", t, p) == doctest::Approx(2.0 / 3.0));
  // precisions 1/2, 2/3, 1
  CHECK(score("precision", t, p) == doctest::Approx((0.5 + 2.0 / 3.0 + 1.0) / 3.0));
  CHECK_THROWS_AS(score("matthews_corrcoef", t, p), ValidationError);
  CHECK_THROWS_AS(confusion_counts(t.values(), p, 0), ValidationError);
}

TEST_CASE("regression metrics") {
  const auto t = reg({1, 2, 3});
  const std::vector<double> p{1, 2, 4};
  CHECK(score("mean_absolute_error", t, p) == doctest::Approx(1.0 / 3.0));
  CHECK(score("mean_squared_error", t, p) == doctest::Approx(1.0 / 3.0));
  CHECK(score("r2", t, p) == doctest::Approx(0.5));
  CHECK_FALSE(greater_is_better("mean_squared_error"));
  CHECK(greater_is_better("r2"));
}

TEST_CASE("metric registry and kind checks") {
  CHECK(is_metric("balanced_accuracy"));
  CHECK_FALSE(is_metric("auc_pr"));
  CHECK_THROWS_AS(metric_info("auc_pr"), ValidationError);
  CHECK_THROWS_AS(score("accuracy", reg({1.5, 2.5}), std::vector<double>{1.5, 2.5}), ValidationError);
  CHECK_THROWS_AS(score("accuracy", cls({1, 0}), std::vector<double>{1}), ValidationError);
}

TEST_CASE("confusion matrices and their sum") {
  const std::vector<double> t{0, 0, 1, 1}, p{0, 1, 1, 1};
  const auto m = confusion_matrix(t, p);
  CHECK(m.labels == std::vector<double>{0, 1});
  CHECK(m.counts == std::vector<std::vector<std::size_t>>{{1, 1}, {0, 2}});
  const std::vector<double> t2{2, 0}, p2{2, 2};
  const std::vector<ConfusionMatrix> both{m, confusion_matrix(t2, p2)};
  const auto s = sum_confusion_matrices(both);
  CHECK(s.labels == std::vector<double>{0, 1, 2});
  CHECK(s.counts == std::vector<std::vector<std::size_t>>{{1, 1, 1}, {0, 2, 0}, {0, 0, 1}});
}

TEST_CASE("aggregate uses the population standard deviation") {
  const std::vector<double> v{0.5, 0.7};
  const auto a = aggregate(v);
  CHECK(a.mean == doctest::Approx(0.6));
  CHECK(a.std == doctest::Approx(0.1));
  CHECK(aggregate(std::vector<double>{3.0}).std == 0.0);
  CHECK_THROWS_AS(aggregate(std::vector<double>{}), ValidationError);
}
