#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hyperpipe/elements/builtins.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/kernels.hpp"

namespace hyperpipe {

// ------------------------------------------------------------- StandardScaler

const std::vector<ParamSpec>& StandardScaler::schema() const {
  static const std::vector<ParamSpec> specs;
  return specs;
}

void StandardScaler::fit(const FeatureMatrix& x, const TargetVector&, const ExtraData&) {
  const std::size_t cols = x.cols();
  mean_.assign(cols, 0.0);
  scale_.assign(cols, 0.0);
  for (std::size_t c = 0; c < cols; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      if (const double v = x(r, c); !std::isnan(v)) {
        sum += v;
        ++n;
      }
    }
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      if (const double v = x(r, c); !std::isnan(v)) ss += (v - mean) * (v - mean);
    }
    mean_[c] = mean;
    scale_[c] = std::sqrt(ss / static_cast<double>(n));
  }
  mark_fitted();
}

FeatureMatrix StandardScaler::transform(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_columns(x, mean_.size(), keyword());
  FeatureMatrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double v = x(r, c);
      if (std::isnan(v)) continue;
      out(r, c) = scale_[c] == 0.0 ? 0.0 : (v - mean_[c]) / scale_[c];
    }
  }
  return out;
}

void StandardScaler::write_state(ByteWriter& out) const {
  out.f64s(mean_);
  out.f64s(scale_);
}

void StandardScaler::read_state(ByteReader& in) {
  mean_ = in.f64s();
  scale_ = in.f64s();
  if (mean_.size() != scale_.size()) throw ArchiveError("StandardScaler state is inconsistent");
}

// -------------------------------------------------------------- SimpleImputer

const std::vector<ParamSpec>& SimpleImputer::schema() const {
  static const std::vector<ParamSpec> specs = {{"strategy", std::string("mean"), check_one_of({"mean"})}};
  return specs;
}

void SimpleImputer::fit(const FeatureMatrix& x, const TargetVector&, const ExtraData&) {
  fill_.assign(x.cols(), 0.0);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      if (const double v = x(r, c); !std::isnan(v)) {
        sum += v;
        ++n;
      }
    }
    if (n == 0) throw DataError("SimpleImputer: column " + std::to_string(c) + " has no observed training values");
    fill_[c] = sum / static_cast<double>(n);
  }
  mark_fitted();
}

FeatureMatrix SimpleImputer::transform(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_columns(x, fill_.size(), keyword());
  FeatureMatrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (std::isnan(out(r, c))) out(r, c) = fill_[c];
    }
  }
  return out;
}

void SimpleImputer::write_state(ByteWriter& out) const { out.f64s(fill_); }
void SimpleImputer::read_state(ByteReader& in) { fill_ = in.f64s(); }

// ------------------------------------------------------------------------ PCA

const std::vector<ParamSpec>& PCA::schema() const {
  static const std::vector<ParamSpec> specs = {
      {"n_components", std::int64_t{0}, [](const ParamValue& v) {
         const double d = as_double(v, "n_components");
         if (!std::isfinite(d) || d < 0.0) throw ValidationError("must be a positive integer or a fraction in (0, 1)");
         if (d >= 1.0 && d != std::floor(d)) throw ValidationError("must be a positive integer or a fraction in (0, 1)");
       }}};
  return specs;
}

std::size_t PCA::components_for_fraction(std::span<const double> eigenvalues, double fraction) {
  double total = 0.0;
  for (double e : eigenvalues) total += std::max(e, 0.0);
  if (total <= 0.0) return 1;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    cumulative += std::max(eigenvalues[k], 0.0);
    if (cumulative / total >= fraction) return k + 1;
  }
  return eigenvalues.size();
}

void PCA::fit(const FeatureMatrix& x, const TargetVector&, const ExtraData&) {
  if (x.rows() < 2) throw DataError("PCA needs at least two rows to fit");
  require_finite(x, keyword());
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const double requested = real_param("n_components");
  if (requested >= 1.0 && static_cast<std::size_t>(requested) > d) {
    throw ValidationError("PCA: n_components " + std::to_string(static_cast<std::size_t>(requested)) +
                          " exceeds feature count " + std::to_string(d));
  }

  Eigen::MatrixXd m(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x(r, c);
  const Eigen::RowVectorXd mu = m.colwise().mean();
  m.rowwise() -= mu;
  const Eigen::MatrixXd cov = (m.transpose() * m) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw DataError("PCA eigen decomposition failed");

  // Eigen returns ascending eigenvalues.
  std::vector<double> eigenvalues(d);
  for (std::size_t i = 0; i < d; ++i) eigenvalues[i] = solver.eigenvalues()(static_cast<Eigen::Index>(d - 1 - i));

  std::size_t k = d;
  if (requested > 0.0 && requested < 1.0) k = components_for_fraction(eigenvalues, requested);
  else if (requested >= 1.0) k = static_cast<std::size_t>(requested);

  n_features_ = d;
  n_components_ = k;
  mean_.assign(mu.data(), mu.data() + d);
  explained_variance_.assign(eigenvalues.begin(), eigenvalues.begin() + static_cast<std::ptrdiff_t>(k));
  components_.assign(k * d, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const auto vec = solver.eigenvectors().col(static_cast<Eigen::Index>(d - 1 - i));
    std::size_t pivot = 0;
    for (std::size_t c = 1; c < d; ++c) {
      if (std::abs(vec(static_cast<Eigen::Index>(c))) > std::abs(vec(static_cast<Eigen::Index>(pivot)))) pivot = c;
    }
    const double sign = vec(static_cast<Eigen::Index>(pivot)) < 0.0 ? -1.0 : 1.0;
    for (std::size_t c = 0; c < d; ++c) components_[i * d + c] = sign * vec(static_cast<Eigen::Index>(c));
  }
  mark_fitted();
}

FeatureMatrix PCA::transform(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_columns(x, n_features_, keyword());
  require_finite(x, keyword());
  FeatureMatrix out = FeatureMatrix::filled(x.rows(), n_components_);
  std::vector<double> centered(n_features_);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < n_features_; ++c) centered[c] = row[c] - mean_[c];
    for (std::size_t i = 0; i < n_components_; ++i) {
      out(r, i) = kernels::dot({components_.data() + i * n_features_, n_features_}, centered);
    }
  }
  return out;
}

void PCA::write_state(ByteWriter& out) const {
  out.u64(n_features_);
  out.u64(n_components_);
  out.f64s(mean_);
  out.f64s(components_);
  out.f64s(explained_variance_);
}

void PCA::read_state(ByteReader& in) {
  n_features_ = in.u64();
  n_components_ = in.u64();
  mean_ = in.f64s();
  components_ = in.f64s();
  explained_variance_ = in.f64s();
  if (mean_.size() != n_features_ || components_.size() != n_features_ * n_components_) {
    throw ArchiveError("PCA state is inconsistent");
  }
}

}  // namespace hyperpipe
