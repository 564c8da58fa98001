#include <algorithm>

#include "hyperpipe/elements/builtins.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/kernels.hpp"

namespace hyperpipe {

const std::vector<ParamSpec>& KNeighborsClassifier::schema() const {
  static const std::vector<ParamSpec> specs = {{"n_neighbors", std::int64_t{5}, check_int_at_least(1)}};
  return specs;
}

void KNeighborsClassifier::fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData&) {
  require_finite(x, keyword());
  const auto k = static_cast<std::size_t>(int_param("n_neighbors"));
  if (k > x.rows()) {
    throw ValidationError("KNeighborsClassifier: n_neighbors " + std::to_string(k) + " exceeds training rows " +
                          std::to_string(x.rows()));
  }
  classes_ = y.classes();
  train_class_.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    train_class_[i] = static_cast<std::size_t>(std::lower_bound(classes_.begin(), classes_.end(), y[i]) - classes_.begin());
  }
  train_x_ = x;
  mark_fitted();
}

std::vector<std::size_t> KNeighborsClassifier::neighbors(std::span<const double> query) const {
  const auto k = static_cast<std::size_t>(int_param("n_neighbors"));
  std::vector<std::pair<double, std::size_t>> dist(train_x_.rows());
  for (std::size_t i = 0; i < train_x_.rows(); ++i) dist[i] = {kernels::squared_distance(query, train_x_.row(i)), i};
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

std::vector<double> KNeighborsClassifier::predict(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_columns(x, train_x_.cols(), keyword());
  require_finite(x, keyword());
  std::vector<double> out(x.rows());
  std::vector<std::size_t> votes(classes_.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0);
    for (auto n : neighbors(x.row(r))) ++votes[train_class_[n]];
    // max_element returns the first maximum: the smaller label wins ties.
    out[r] = classes_[static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin())];
  }
  return out;
}

FeatureMatrix KNeighborsClassifier::predict_proba(const FeatureMatrix& x, const ExtraData&) const {
  require_fitted();
  require_columns(x, train_x_.cols(), keyword());
  require_finite(x, keyword());
  FeatureMatrix out = FeatureMatrix::filled(x.rows(), classes_.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto nn = neighbors(x.row(r));
    for (auto n : nn) out(r, train_class_[n]) += 1.0 / static_cast<double>(nn.size());
  }
  return out;
}

void KNeighborsClassifier::write_state(ByteWriter& out) const {
  out.u64(train_x_.rows());
  out.u64(train_x_.cols());
  out.f64s(train_x_.values());
  out.u64s(train_class_);
  out.f64s(classes_);
}

void KNeighborsClassifier::read_state(ByteReader& in) {
  const auto rows = in.u64();
  const auto cols = in.u64();
  auto values = in.f64s();
  if (values.size() != rows * cols || rows == 0) throw ArchiveError("KNeighborsClassifier state is inconsistent");
  train_x_ = FeatureMatrix(rows, cols, std::move(values));
  train_class_ = in.u64s();
  classes_ = in.f64s();
  if (train_class_.size() != rows) throw ArchiveError("KNeighborsClassifier state is inconsistent");
}

}  // namespace hyperpipe
