#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>

namespace hyperpipe {

/// A single hyperparameter or fixed-parameter value.
using ParamValue = std::variant<bool, std::int64_t, double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

/// Stable text form, used for descriptors, seeds and display. Doubles print
/// with 17 significant digits; strings are quoted.
std::string canonical(const ParamValue& v);
std::string canonical(const ParamMap& m);
/// Human-facing form: strings unquoted, doubles shortest round-trip.
std::string display(const ParamValue& v);

/// Numeric view; bool is rejected. `what` names the parameter in errors.
double as_double(const ParamValue& v, const std::string& what);
/// Integral view; doubles must be integral.
std::int64_t as_int(const ParamValue& v, const std::string& what);
bool as_bool(const ParamValue& v, const std::string& what);
const std::string& as_string(const ParamValue& v, const std::string& what);

bool is_numeric(const ParamValue& v) noexcept;

}  // namespace hyperpipe
