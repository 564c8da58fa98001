#include "hyperpipe/validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hyperpipe/error.hpp"
#include "hyperpipe/rng.hpp"

namespace hyperpipe {

namespace {

std::vector<Split> from_fold_assignment(const std::vector<std::size_t>& fold_of, std::size_t k) {
  std::vector<Split> out(k);
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (f == fold_of[i] ? out[f].test_indices : out[f].train_indices).push_back(i);
    }
  }
  return out;
}

}  // namespace

std::vector<Split> kfold_splits(std::size_t n, std::size_t k, bool shuffle, std::uint64_t seed) {
  if (k < 2) throw ValidationError("kfold needs at least 2 folds");
  if (k > n) throw ValidationError("kfold with " + std::to_string(k) + " folds needs at least that many samples");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (shuffle) {
    SplitMix64 rng(seed);
    hyperpipe::shuffle(order, rng);
  }
  std::vector<std::size_t> fold_of(n);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) fold_of[order[pos++]] = f;
  }
  return from_fold_assignment(fold_of, k);
}

std::vector<Split> stratified_kfold_splits(const TargetVector& y, std::size_t k, bool shuffle, std::uint64_t seed) {
  if (y.kind() != TargetKind::classification) throw ValidationError("stratified kfold requires classification targets");
  if (k < 2) throw ValidationError("stratified kfold needs at least 2 folds");
  std::map<double, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < y.size(); ++i) members[y[i]].push_back(i);
  for (const auto& [label, rows] : members) {
    if (rows.size() < k) {
      throw ValidationError("class " + std::to_string(static_cast<long long>(label)) + " has " +
                            std::to_string(rows.size()) + " members, fewer than " + std::to_string(k) + " folds");
    }
  }
  SplitMix64 rng(seed);
  std::vector<std::size_t> fold_of(y.size());
  // Remainders rotate across classes so overall fold sizes stay balanced.
  std::size_t offset = 0;
  for (auto& [label, rows] : members) {
    if (shuffle) hyperpipe::shuffle(rows, rng);
    const std::size_t base = rows.size() / k;
    const std::size_t extra = rows.size() % k;
    std::size_t pos = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t f = (offset + j) % k;
      const std::size_t size = base + (j < extra ? 1 : 0);
      for (std::size_t m = 0; m < size; ++m) fold_of[rows[pos++]] = f;
    }
    offset = (offset + extra) % k;
  }
  return from_fold_assignment(fold_of, k);
}

std::vector<Split> shuffle_splits(std::size_t n, std::size_t n_splits, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test fraction must lie in (0, 1)");
  if (n_splits < 1) throw ValidationError("shuffle split needs at least one split");
  const auto test_size = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction)));
  if (test_size >= n) throw ValidationError("shuffle split leaves no training samples");
  SplitMix64 rng(seed);
  std::vector<Split> out;
  out.reserve(n_splits);
  for (std::size_t s = 0; s < n_splits; ++s) {
    auto perm = permutation(n, rng);
    Split split;
    split.test_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(test_size));
    split.train_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(test_size), perm.end());
    std::sort(split.test_indices.begin(), split.test_indices.end());
    std::sort(split.train_indices.begin(), split.train_indices.end());
    out.push_back(std::move(split));
  }
  return out;
}

std::vector<Split> CvStrategy::split(const TargetVector& y, std::uint64_t seed) const {
  switch (variant) {
    case Variant::kfold:
      return kfold_splits(y.size(), n_splits, shuffle, seed);
    case Variant::stratified_kfold:
      return stratified_kfold_splits(y, n_splits, shuffle, seed);
    case Variant::shuffle_split:
      return shuffle_splits(y.size(), n_splits, test_fraction, seed);
  }
  throw ValidationError("unknown cv variant");
}

std::string CvStrategy::name() const { return to_string(variant); }

std::string to_string(CvStrategy::Variant v) {
  switch (v) {
    case CvStrategy::Variant::kfold: return "KFold";
    case CvStrategy::Variant::stratified_kfold: return "StratifiedKFold";
    case CvStrategy::Variant::shuffle_split: return "ShuffleSplit";
  }
  return "?";
}

CvStrategy::Variant parse_cv_variant(const std::string& name) {
  if (name == "KFold" || name == "kfold") return CvStrategy::Variant::kfold;
  if (name == "StratifiedKFold" || name == "stratified_kfold") return CvStrategy::Variant::stratified_kfold;
  if (name == "ShuffleSplit" || name == "shuffle_split") return CvStrategy::Variant::shuffle_split;
  throw ValidationError("unknown cross-validation strategy '" + name + "'");
}

}  // namespace hyperpipe
