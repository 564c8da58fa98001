#include "hyperpipe/params.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "hyperpipe/error.hpp"

namespace hyperpipe {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string canonical(const ParamValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, double>) {
          char buf[40];
          std::snprintf(buf, sizeof buf, "%.17g", x);
          std::string s(buf);
          if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
          return s;
        } else {
          return quote(x);
        }
      },
      v);
}

std::string canonical(const ParamMap& m) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : m) {
    if (!first) out += ",";
    first = false;
    out += quote(k) + ":" + canonical(v);
  }
  return out + "}";
}

std::string display(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* d = std::get_if<double>(&v)) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *d);
    return std::string(buf, ptr);
  }
  return canonical(v);
}

bool is_numeric(const ParamValue& v) noexcept {
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

double as_double(const ParamValue& v, const std::string& what) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw ValidationError("parameter '" + what + "' must be numeric, got " + canonical(v));
}

std::int64_t as_int(const ParamValue& v, const std::string& what) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v); d != nullptr && std::isfinite(*d) && *d == std::floor(*d)) {
    return static_cast<std::int64_t>(*d);
  }
  throw ValidationError("parameter '" + what + "' must be an integer, got " + canonical(v));
}

bool as_bool(const ParamValue& v, const std::string& what) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw ValidationError("parameter '" + what + "' must be a boolean, got " + canonical(v));
}

const std::string& as_string(const ParamValue& v, const std::string& what) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw ValidationError("parameter '" + what + "' must be a string, got " + canonical(v));
}

}  // namespace hyperpipe
