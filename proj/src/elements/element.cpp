#include "hyperpipe/elements/element.hpp"

#include <algorithm>
#include <cmath>

#include "hyperpipe/error.hpp"

namespace hyperpipe {

void Element::init_params() {
  params_.clear();
  for (const auto& spec : schema()) params_[spec.name] = spec.default_value;
}

void Element::set_params(const ParamMap& updates) {
  const auto& specs = schema();
  for (const auto& [name, value] : updates) {
    auto it = std::find_if(specs.begin(), specs.end(), [&](const ParamSpec& s) { return s.name == name; });
    if (it == specs.end()) throw ValidationError(keyword() + ": unknown parameter '" + name + "'");
    try {
      if (it->check) it->check(value);
    } catch (const ValidationError& e) {
      throw ValidationError(keyword() + ": invalid value " + canonical(value) + " for '" + name + "': " + e.what());
    }
  }
  for (const auto& [name, value] : updates) params_[name] = value;
  fitted_ = false;
}

void Element::set_param(const std::string& name, const ParamValue& value) { set_params({{name, value}}); }

const ParamValue& Element::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ValidationError(keyword() + ": unknown parameter '" + name + "'");
  return it->second;
}

void Element::require_fitted() const {
  if (!fitted_) throw StateError(keyword() + " used before fit");
}

void Element::fit(const FeatureMatrix&, const TargetVector&, const ExtraData&) {
  throw StateError(keyword() + " cannot be fitted directly");
}

FeatureMatrix Element::transform(const FeatureMatrix&, const ExtraData&) const {
  throw StateError(keyword() + " cannot transform");
}

Resampled Element::resample(const FeatureMatrix&, const TargetVector&) {
  throw StateError(keyword() + " cannot resample");
}

std::vector<double> Element::predict(const FeatureMatrix&, const ExtraData&) const {
  throw StateError(keyword() + " cannot predict");
}

FeatureMatrix Element::predict_proba(const FeatureMatrix&, const ExtraData&) const {
  throw StateError(keyword() + " cannot predict probabilities");
}

void Element::save_state(ByteWriter& out) const {
  out.boolean(fitted_);
  if (fitted_) write_state(out);
}

void Element::load_state(ByteReader& in) {
  fitted_ = in.boolean();
  if (fitted_) read_state(in);
}

void require_finite(const FeatureMatrix& x, const std::string& who) {
  if (x.has_nan()) throw DataError("NaN reached estimator " + who);
}

void require_columns(const FeatureMatrix& x, std::size_t expected, const std::string& who) {
  if (x.cols() != expected) {
    throw ValidationError(who + ": expected " + std::to_string(expected) + " columns, got " + std::to_string(x.cols()));
  }
}

std::function<void(const ParamValue&)> check_one_of(std::vector<std::string> allowed) {
  return [allowed = std::move(allowed)](const ParamValue& v) {
    const auto& s = as_string(v, "value");
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ValidationError("expected one of {" + list + "}");
    }
  };
}

std::function<void(const ParamValue&)> check_int_at_least(std::int64_t lo) {
  return [lo](const ParamValue& v) {
    if (as_int(v, "value") < lo) throw ValidationError("must be at least " + std::to_string(lo));
  };
}

std::function<void(const ParamValue&)> check_real_positive() {
  return [](const ParamValue& v) {
    const double d = as_double(v, "value");
    if (!(d > 0.0) || !std::isfinite(d)) throw ValidationError("must be positive");
  };
}

std::function<void(const ParamValue&)> check_real_nonnegative() {
  return [](const ParamValue& v) {
    const double d = as_double(v, "value");
    if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("must be non-negative");
  };
}

std::function<void(const ParamValue&)> check_bool() {
  return [](const ParamValue& v) { as_bool(v, "value"); };
}

}  // namespace hyperpipe
