#include <cmath>

#include "hyperpipe/elements/builtins.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/kernels.hpp"
#include "hyperpipe/rng.hpp"

namespace hyperpipe {

const std::vector<ParamSpec>& LinearSVC::schema() const {
  static const std::vector<ParamSpec> specs = {
      {"C", 1.0, check_real_positive()},
      {"epochs", std::int64_t{30}, check_int_at_least(1)},
      // Kernelized SVMs are not provided; only the linear kernel is accepted.
      {"kernel", std::string("linear"), check_one_of({"linear"})},
  };
  return specs;
}

double LinearSVC::decision_function(std::span<const double> sample) const {
  return kernels::dot(w_, sample) + b_;
}

void LinearSVC::fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData&) {
  require_finite(x, keyword());
  classes_ = y.classes();
  if (classes_.size() != 2) {
    throw DataError(keyword() + " needs exactly two classes, found " + std::to_string(classes_.size()));
  }
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const double lambda = 1.0 / (real_param("C") * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);
  const auto epochs = static_cast<std::size_t>(int_param("epochs"));

  std::vector<double> w(d, 0.0);
  double b = 0.0;
  SplitMix64 rng(seed());
  std::size_t t = 0;
  for (std::size_t e = 0; e < epochs; ++e) {
    for (auto i : permutation(n, rng)) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double label = y[i] == classes_[1] ? 1.0 : -1.0;
      const auto row = x.row(i);
      const double margin = label * (kernels::dot(w, row) + b);
      const double shrink = 1.0 - eta * lambda;
      for (auto& v : w) v *= shrink;
      b *= shrink;
      if (margin < 1.0) {
        kernels::axpy(eta * label, row, w);
        b += eta * label;
      }
      const double norm = std::sqrt(kernels::dot(w, w) + b * b);
      if (norm > radius) {
        const double s = radius / norm;
        for (auto& v : w) v *= s;
        b *= s;
      }
    }
  }
  w_ = std::move(w);
  b_ = b;
  mark_fitted();
}

std::vector<double> LinearSVC::predict(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_columns(x, w_.size(), keyword());
  require_finite(x, keyword());
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = decision_function(x.row(r)) >= 0.0 ? classes_[1] : classes_[0];
  return out;
}

void LinearSVC::write_state(ByteWriter& out) const {
  out.f64s(w_);
  out.f64(b_);
  out.f64s(classes_);
}

void LinearSVC::read_state(ByteReader& in) {
  w_ = in.f64s();
  b_ = in.f64();
  classes_ = in.f64s();
  if (classes_.size() != 2) throw ArchiveError("LinearSVC state is inconsistent");
}

}  // namespace hyperpipe
