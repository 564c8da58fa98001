#include <algorithm>
#include <numeric>

#include "hyperpipe/elements/builtins.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/kernels.hpp"
#include "hyperpipe/rng.hpp"

namespace hyperpipe {

namespace {

constexpr std::size_t kSmoteNeighbors = 5;

/// k nearest other minority rows for every minority row; ties prefer lower index.
std::vector<std::vector<std::size_t>> minority_neighbors(const FeatureMatrix& x, const std::vector<std::size_t>& minority,
                                                         std::size_t k) {
  std::vector<std::vector<std::size_t>> out(minority.size());
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < minority.size(); ++i) {
    dist.clear();
    for (std::size_t j = 0; j < minority.size(); ++j) {
      if (j == i) continue;
      dist.emplace_back(kernels::squared_distance(x.row(minority[i]), x.row(minority[j])), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t n = 0; n < k; ++n) out[i].push_back(dist[n].second);
  }
  return out;
}

}  // namespace

const std::vector<ParamSpec>& ImbalancedDataTransformer::schema() const {
  static const std::vector<ParamSpec> specs = {
      {"method_name", std::string("RandomUnderSampler"),
       check_one_of({"RandomUnderSampler", "RandomOverSampler", "SMOTE"})},
  };
  return specs;
}

Resampled ImbalancedDataTransformer::resample(const FeatureMatrix& x, const TargetVector& y) {
  if (y.kind() != TargetKind::classification) throw DataError("ImbalancedDataTransformer needs classification targets");
  if (y.size() != x.rows()) throw ValidationError("ImbalancedDataTransformer: target length does not match rows");
  const auto labels = y.classes();
  if (labels.size() < 2) throw DataError("ImbalancedDataTransformer needs two classes, found one");
  if (labels.size() > 2) throw DataError("ImbalancedDataTransformer supports binary targets only");

  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i] == labels[1] ? 1 : 0].push_back(i);
  const std::size_t minority_class = by_class[1].size() < by_class[0].size() ? 1 : 0;
  const auto& minority = by_class[minority_class];
  const auto& majority = by_class[1 - minority_class];
  const std::string& method = string_param("method_name");
  SplitMix64 rng(seed());

  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), 0);
  Resampled out;

  if (minority.size() == majority.size()) {
    out = {x, y, all};
  } else if (method == "RandomUnderSampler") {
    auto pool = majority;
    shuffle(pool, rng);
    pool.resize(minority.size());
    std::vector<std::size_t> keep = minority;
    keep.insert(keep.end(), pool.begin(), pool.end());
    std::sort(keep.begin(), keep.end());
    out = {x.select_rows(keep), y.select(keep), keep};
  } else if (method == "RandomOverSampler") {
    auto rows = all;
    for (std::size_t i = minority.size(); i < majority.size(); ++i) rows.push_back(minority[rng.bounded(minority.size())]);
    out = {x.select_rows(rows), y.select(rows), rows};
  } else {
    require_finite(x, keyword() + " (SMOTE)");
    const std::size_t need = majority.size() - minority.size();
    std::vector<double> values = x.values();
    std::vector<double> targets = y.values();
    std::vector<std::size_t> sources = all;
    values.reserve(values.size() + need * x.cols());
    const double label = labels[minority_class];
    if (minority.size() == 1) {
      for (std::size_t i = 0; i < need; ++i) {
        auto r = x.row(minority[0]);
        values.insert(values.end(), r.begin(), r.end());
        targets.push_back(label);
        sources.push_back(minority[0]);
      }
    } else {
      const std::size_t k = std::min(kSmoteNeighbors, minority.size() - 1);
      const auto neighbors = minority_neighbors(x, minority, k);
      std::vector<double> synthetic(x.cols());
      for (std::size_t i = 0; i < need; ++i) {
        const std::size_t base = rng.bounded(minority.size());
        const std::size_t other = neighbors[base][rng.bounded(k)];
        const double u = rng.uniform();
        auto a = x.row(minority[base]);
        auto b = x.row(minority[other]);
        for (std::size_t c = 0; c < x.cols(); ++c) synthetic[c] = a[c] + u * (b[c] - a[c]);
        values.insert(values.end(), synthetic.begin(), synthetic.end());
        targets.push_back(label);
        sources.push_back(minority[base]);
      }
    }
    out = {FeatureMatrix(sources.size(), x.cols(), std::move(values), x.column_names()),
           TargetVector(std::move(targets), TargetKind::classification), std::move(sources)};
  }
  mark_fitted();
  return out;
}

FeatureMatrix ImbalancedDataTransformer::transform(const FeatureMatrix& x, const ExtraData&) const { return x; }

}  // namespace hyperpipe
