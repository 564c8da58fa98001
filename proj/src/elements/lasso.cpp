#include <algorithm>
#include <cmath>
#include <numeric>

#include "hyperpipe/elements/builtins.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/kernels.hpp"

namespace hyperpipe {

double soft_threshold(double value, double threshold) noexcept {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

std::vector<double> lasso_coordinate_descent(const FeatureMatrix& x, std::span<const double> y, double alpha,
                                             int max_iter, double tol) {
  if (!(alpha >= 0.0)) throw ValidationError("lasso alpha must be non-negative");
  if (y.size() != x.rows()) throw ValidationError("lasso target length does not match rows");
  if (x.has_nan() || std::any_of(y.begin(), y.end(), [](double v) { return !std::isfinite(v); })) {
    throw DataError("lasso received non-finite input");
  }
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<std::vector<double>> columns(d);
  std::vector<double> norm(d);
  for (std::size_t j = 0; j < d; ++j) {
    columns[j] = x.column(j);
    norm[j] = kernels::dot(columns[j], columns[j]) * inv_n;
  }
  std::vector<double> beta(d, 0.0);
  std::vector<double> residual(y.begin(), y.end());

  for (int iter = 0; iter < max_iter; ++iter) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (norm[j] == 0.0) continue;
      const double rho = kernels::dot(columns[j], residual) * inv_n + norm[j] * beta[j];
      const double updated = soft_threshold(rho, alpha) / norm[j];
      const double delta = updated - beta[j];
      if (delta != 0.0) {
        kernels::axpy(-delta, columns[j], residual);
        beta[j] = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < tol) break;
  }
  return beta;
}

namespace {

/// Population standardization; zero-variance columns become zero.
FeatureMatrix standardized(const FeatureMatrix& x) {
  FeatureMatrix out = x;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const auto col = x.column(c);
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(col.size()));
    for (std::size_t r = 0; r < x.rows(); ++r) out(r, c) = sd == 0.0 ? 0.0 : (x(r, c) - mean) / sd;
  }
  return out;
}

std::vector<double> centered(const std::vector<double>& y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] - mean;
  return out;
}

}  // namespace

// ------------------------------------------------------ LassoFeatureSelection

const std::vector<ParamSpec>& LassoFeatureSelection::schema() const {
  static const std::vector<ParamSpec> specs = {
      {"alpha", 1.0, check_real_nonnegative()},
      {"max_iter", std::int64_t{1000}, check_int_at_least(1)},
      {"percentile", 0.5,
       [](const ParamValue& v) {
         const double p = as_double(v, "percentile");
         if (!(p > 0.0 && p <= 1.0)) throw ValidationError("percentile must lie in (0, 1]");
       }},
      {"tol", 1e-4, check_real_positive()},
  };
  return specs;
}

std::vector<std::size_t> LassoFeatureSelection::select_top(std::span<const double> coef, double percentile) {
  if (!(percentile > 0.0 && percentile <= 1.0)) throw ValidationError("percentile must lie in (0, 1]");
  const std::size_t d = coef.size();
  const auto k = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(percentile * static_cast<double>(d))), 1, d);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(coef[a]) > std::abs(coef[b]); });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

void LassoFeatureSelection::fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData&) {
  if (x.has_nan()) throw DataError("NaN reached LassoFeatureSelection");
  coef_ = lasso_coordinate_descent(standardized(x), centered(y.values()), real_param("alpha"),
                                   static_cast<int>(int_param("max_iter")), real_param("tol"));
  selected_ = select_top(coef_, real_param("percentile"));
  n_features_ = x.cols();
  mark_fitted();
}

FeatureMatrix LassoFeatureSelection::transform(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_columns(x, n_features_, keyword());
  return x.select_columns(selected_);
}

void LassoFeatureSelection::write_state(ByteWriter& out) const {
  out.u64(n_features_);
  out.f64s(coef_);
  out.u64s(selected_);
}

void LassoFeatureSelection::read_state(ByteReader& in) {
  n_features_ = in.u64();
  coef_ = in.f64s();
  selected_ = in.u64s();
  for (auto c : selected_) {
    if (c >= n_features_) throw ArchiveError("LassoFeatureSelection state is inconsistent");
  }
}

// -------------------------------------------------------------- LassoRegressor

const std::vector<ParamSpec>& LassoRegressor::schema() const {
  static const std::vector<ParamSpec> specs = {
      {"alpha", 1.0, check_real_nonnegative()},
      {"max_iter", std::int64_t{1000}, check_int_at_least(1)},
      {"tol", 1e-4, check_real_positive()},
  };
  return specs;
}

void LassoRegressor::fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData&) {
  require_finite(x, keyword());
  x_mean_.assign(x.cols(), 0.0);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const auto col = x.column(c);
    x_mean_[c] = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
  }
  FeatureMatrix xc = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) xc(r, c) -= x_mean_[c];
  const double y_mean = std::accumulate(y.values().begin(), y.values().end(), 0.0) / static_cast<double>(y.size());
  coef_ = lasso_coordinate_descent(xc, centered(y.values()), real_param("alpha"),
                                   static_cast<int>(int_param("max_iter")), real_param("tol"));
  intercept_ = y_mean;
  mark_fitted();
}

std::vector<double> LassoRegressor::predict(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_columns(x, coef_.size(), keyword());
  require_finite(x, keyword());
  std::vector<double> out(x.rows());
  std::vector<double> row(coef_.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto src = x.row(r);
    for (std::size_t c = 0; c < coef_.size(); ++c) row[c] = src[c] - x_mean_[c];
    out[r] = intercept_ + kernels::dot(coef_, row);
  }
  return out;
}

void LassoRegressor::write_state(ByteWriter& out) const {
  out.f64s(coef_);
  out.f64s(x_mean_);
  out.f64(intercept_);
}

void LassoRegressor::read_state(ByteReader& in) {
  coef_ = in.f64s();
  x_mean_ = in.f64s();
  intercept_ = in.f64();
  if (coef_.size() != x_mean_.size()) throw ArchiveError("Lasso state is inconsistent");
}

}  // namespace hyperpipe
