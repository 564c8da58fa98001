#pragma once

// Dense double-precision inner loops used by the estimators and resamplers.
//
// Every kernel has a portable scalar reference in kernels::scalar and, where
// the target supports it, a vectorized variant (AVX2+FMA on x86-64, NEON on
// AArch64). The public entry points forward to whichever variant was selected
// once at first use. Setting HYPERPIPE_SIMD=scalar in the environment forces
// the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace hyperpipe::kernels {

enum class Isa { scalar, avx2, neon };

/// Variant chosen for this process.
Isa active_isa();
std::string_view isa_name(Isa isa);

/// True when the running CPU can execute the given variant.
bool isa_available(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum(std::span<const double> a);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
}  // namespace neon
#endif

}  // namespace hyperpipe::kernels
