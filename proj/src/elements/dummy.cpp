#include <algorithm>
#include <map>
#include <numeric>

#include "hyperpipe/elements/builtins.hpp"
#include "hyperpipe/error.hpp"

namespace hyperpipe {

DummyEstimator::DummyEstimator(std::string keyword) : keyword_(std::move(keyword)) {
  if (keyword_ != "DummyClassifier" && keyword_ != "DummyRegressor") {
    throw ValidationError("unknown dummy estimator '" + keyword_ + "'");
  }
  init_params();
}

const std::vector<ParamSpec>& DummyEstimator::schema() const {
  static const std::vector<ParamSpec> classifier = {
      {"strategy", std::string("most_frequent"), check_one_of({"most_frequent"})}};
  static const std::vector<ParamSpec> regressor = {{"strategy", std::string("mean"), check_one_of({"mean"})}};
  return keyword_ == "DummyClassifier" ? classifier : regressor;
}

void DummyEstimator::fit(const FeatureMatrix&, const TargetVector& y, const ExtraData&) {
  if (y.empty()) throw DataError(keyword_ + " needs at least one target value");
  if (keyword_ == "DummyClassifier") {
    std::map<double, std::size_t> counts;
    for (double v : y.values()) ++counts[v];
    classes_.clear();
    std::size_t best = 0;
    for (const auto& [label, n] : counts) {
      classes_.push_back(label);
      // map iterates ascending, strict > keeps the smaller label on ties
      if (n > best) {
        best = n;
        constant_ = label;
      }
    }
  } else {
    constant_ = std::accumulate(y.values().begin(), y.values().end(), 0.0) / static_cast<double>(y.size());
  }
  mark_fitted();
}

std::vector<double> DummyEstimator::predict(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_finite(x, keyword_);
  return std::vector<double>(x.rows(), constant_);
}

FeatureMatrix DummyEstimator::predict_proba(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  if (keyword_ != "DummyClassifier") throw StateError("DummyRegressor cannot predict probabilities");
  FeatureMatrix out = FeatureMatrix::filled(x.rows(), classes_.size());
  const auto c = static_cast<std::size_t>(std::find(classes_.begin(), classes_.end(), constant_) - classes_.begin());
  for (std::size_t r = 0; r < x.rows(); ++r) out(r, c) = 1.0;
  return out;
}

void DummyEstimator::write_state(ByteWriter& out) const {
  out.f64(constant_);
  out.f64s(classes_);
}

void DummyEstimator::read_state(ByteReader& in) {
  constant_ = in.f64();
  classes_ = in.f64s();
}

}  // namespace hyperpipe
