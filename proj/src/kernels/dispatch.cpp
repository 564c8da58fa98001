#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hyperpipe/kernels.hpp"

namespace hyperpipe::kernels {

namespace {

struct Table {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
};

Table make_table(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2:
      return {Isa::avx2, avx2::dot, avx2::squared_distance, avx2::axpy, avx2::sum};
#endif
#if defined(__aarch64__)
    case Isa::neon:
      return {Isa::neon, neon::dot, neon::squared_distance, neon::axpy, neon::sum};
#endif
    default:
      return {Isa::scalar, scalar::dot, scalar::squared_distance, scalar::axpy, scalar::sum};
  }
}

Isa select_isa() {
  if (const char* env = std::getenv("HYPERPIPE_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Isa::scalar;
  }
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

const Table& table() {
  static const Table t = make_table(select_isa());
  return t;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel operands differ in length");
}

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return table().isa; }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return table().dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return table().squared_distance(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size());
  table().axpy(alpha, x.data(), y.data(), x.size());
}

double sum(std::span<const double> a) { return table().sum(a.data(), a.size()); }

}  // namespace hyperpipe::kernels
