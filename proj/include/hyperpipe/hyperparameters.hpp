#pragma once

// Hyperparameter search spaces attached to pipeline elements.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hyperpipe/params.hpp"

namespace hyperpipe {

enum class RangeType { linspace, logspace, geomspace };

std::string to_string(RangeType t);
RangeType parse_range_type(const std::string& text);

struct HyperparameterSpec {
  enum class Kind { float_range, integer_range, categorical, boolean };

  Kind kind = Kind::categorical;
  double start = 0.0;
  double stop = 0.0;
  /// Step form: half-open progression start + i*step < stop.
  std::optional<double> step;
  /// Count form: num endpoint-inclusive points.
  std::optional<std::int64_t> num;
  RangeType range_type = RangeType::linspace;
  std::vector<ParamValue> values;

  static HyperparameterSpec float_range(double start, double stop, double step);
  static HyperparameterSpec float_points(double start, double stop, std::int64_t num = 10,
                                         RangeType type = RangeType::linspace);
  static HyperparameterSpec integer_range(std::int64_t start, std::int64_t stop, std::int64_t step = 1);
  static HyperparameterSpec integer_points(std::int64_t start, std::int64_t stop, std::int64_t num = 10,
                                           RangeType type = RangeType::linspace);
  static HyperparameterSpec categorical(std::vector<ParamValue> values);
  static HyperparameterSpec boolean();

  /// Throws ValidationError describing the first broken invariant.
  void validate() const;
};

/// Parameter name -> search space. Sorted by name, which fixes grid order.
using HyperparameterMap = std::map<std::string, HyperparameterSpec>;

/// Concrete values of a space: float ranges yield doubles, integer ranges
/// int64, categorical/boolean their listed values.
std::vector<ParamValue> expand_spec(const HyperparameterSpec& spec);

}  // namespace hyperpipe
