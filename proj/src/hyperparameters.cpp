#include "hyperpipe/hyperparameters.hpp"

#include <cmath>

#include "hyperpipe/error.hpp"

namespace hyperpipe {

std::string to_string(RangeType t) {
  switch (t) {
    case RangeType::linspace: return "linspace";
    case RangeType::logspace: return "logspace";
    case RangeType::geomspace: return "geomspace";
  }
  return "linspace";
}

RangeType parse_range_type(const std::string& text) {
  if (text == "linspace") return RangeType::linspace;
  if (text == "logspace") return RangeType::logspace;
  if (text == "geomspace") return RangeType::geomspace;
  throw ValidationError("unknown range type '" + text + "'");
}

HyperparameterSpec HyperparameterSpec::float_range(double start, double stop, double step) {
  HyperparameterSpec s;
  s.kind = Kind::float_range;
  s.start = start;
  s.stop = stop;
  s.step = step;
  s.validate();
  return s;
}

HyperparameterSpec HyperparameterSpec::float_points(double start, double stop, std::int64_t num, RangeType type) {
  HyperparameterSpec s;
  s.kind = Kind::float_range;
  s.start = start;
  s.stop = stop;
  s.num = num;
  s.range_type = type;
  s.validate();
  return s;
}

HyperparameterSpec HyperparameterSpec::integer_range(std::int64_t start, std::int64_t stop, std::int64_t step) {
  HyperparameterSpec s;
  s.kind = Kind::integer_range;
  s.start = static_cast<double>(start);
  s.stop = static_cast<double>(stop);
  s.step = static_cast<double>(step);
  s.validate();
  return s;
}

HyperparameterSpec HyperparameterSpec::integer_points(std::int64_t start, std::int64_t stop, std::int64_t num,
                                                      RangeType type) {
  HyperparameterSpec s;
  s.kind = Kind::integer_range;
  s.start = static_cast<double>(start);
  s.stop = static_cast<double>(stop);
  s.num = num;
  s.range_type = type;
  s.validate();
  return s;
}

HyperparameterSpec HyperparameterSpec::categorical(std::vector<ParamValue> values) {
  HyperparameterSpec s;
  s.kind = Kind::categorical;
  s.values = std::move(values);
  s.validate();
  return s;
}

HyperparameterSpec HyperparameterSpec::boolean() {
  HyperparameterSpec s;
  s.kind = Kind::boolean;
  s.values = {false, true};
  return s;
}

void HyperparameterSpec::validate() const {
  switch (kind) {
    case Kind::categorical:
      if (values.empty()) throw ValidationError("categorical hyperparameter needs at least one value");
      return;
    case Kind::boolean:
      return;
    case Kind::float_range:
    case Kind::integer_range:
      break;
  }
  if (!std::isfinite(start) || !std::isfinite(stop)) throw ValidationError("range bounds must be finite");
  if (!(start < stop)) throw ValidationError("range start must be below stop");
  if (step.has_value() == num.has_value()) throw ValidationError("range needs exactly one of step or num");
  if (step && !(*step > 0.0)) throw ValidationError("range step must be positive");
  if (num && *num < 2) throw ValidationError("range num must be at least 2");
  if (kind == Kind::integer_range) {
    if (start != std::floor(start) || stop != std::floor(stop)) throw ValidationError("integer range bounds must be integers");
    if (step && *step != std::floor(*step)) throw ValidationError("integer range step must be an integer");
  }
  if (num && range_type != RangeType::linspace && !(start > 0.0 && stop > 0.0))
    throw ValidationError(to_string(range_type) + " range needs positive bounds");
}

namespace {

std::vector<double> points(double start, double stop, std::int64_t num, RangeType type) {
  std::vector<double> out(static_cast<std::size_t>(num));
  const double last = static_cast<double>(num - 1);
  if (type == RangeType::linspace) {
    for (std::int64_t i = 0; i < num; ++i) out[i] = start + (stop - start) * (static_cast<double>(i) / last);
  } else {
    // Both geometric forms take endpoint values; interpolate exponents in base 10.
    const double a = std::log10(start), b = std::log10(stop);
    for (std::int64_t i = 0; i < num; ++i) out[i] = std::pow(10.0, a + (b - a) * (static_cast<double>(i) / last));
  }
  out.front() = start;
  out.back() = stop;
  return out;
}

}  // namespace

std::vector<ParamValue> expand_spec(const HyperparameterSpec& spec) {
  spec.validate();
  std::vector<ParamValue> out;
  switch (spec.kind) {
    case HyperparameterSpec::Kind::categorical:
    case HyperparameterSpec::Kind::boolean:
      return spec.values;
    case HyperparameterSpec::Kind::float_range:
      if (spec.step) {
        // Guard against i*step landing a rounding error short of stop.
        const double limit = spec.stop - *spec.step * 1e-9;
        for (std::int64_t i = 0;; ++i) {
          const double v = spec.start + static_cast<double>(i) * *spec.step;
          if (!(v < limit)) break;
          out.emplace_back(v);
        }
      } else {
        for (double v : points(spec.start, spec.stop, *spec.num, spec.range_type)) out.emplace_back(v);
      }
      return out;
    case HyperparameterSpec::Kind::integer_range: {
      const auto start = static_cast<std::int64_t>(spec.start);
      const auto stop = static_cast<std::int64_t>(spec.stop);
      if (spec.step) {
        const auto step = static_cast<std::int64_t>(*spec.step);
        for (std::int64_t v = start; v < stop; v += step) out.emplace_back(v);
      } else {
        for (double p : points(spec.start, spec.stop, *spec.num, spec.range_type)) {
          const auto v = static_cast<std::int64_t>(std::llround(p));
          if (out.empty() || std::get<std::int64_t>(out.back()) != v) out.emplace_back(v);
        }
      }
      return out;
    }
  }
  return out;
}

}  // namespace hyperpipe
