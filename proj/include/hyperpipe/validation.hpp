#pragma once

// Cross-validation split generators. Index lists in every Split are sorted
// ascending; shuffling uses SplitMix64 + Fisher-Yates (see rng.hpp).

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hyperpipe/data.hpp"

namespace hyperpipe {

struct Split {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

std::vector<Split> kfold_splits(std::size_t n, std::size_t k, bool shuffle, std::uint64_t seed);
std::vector<Split> stratified_kfold_splits(const TargetVector& y, std::size_t k, bool shuffle, std::uint64_t seed);
std::vector<Split> shuffle_splits(std::size_t n, std::size_t n_splits, double test_fraction, std::uint64_t seed);

struct CvStrategy {
  enum class Variant { kfold, stratified_kfold, shuffle_split };

  Variant variant = Variant::kfold;
  std::size_t n_splits = 5;
  double test_fraction = 0.2;
  bool shuffle = false;

  static CvStrategy kfold(std::size_t k, bool shuffle = false) { return {Variant::kfold, k, 0.2, shuffle}; }
  static CvStrategy stratified(std::size_t k, bool shuffle = false) {
    return {Variant::stratified_kfold, k, 0.2, shuffle};
  }
  static CvStrategy shuffle_split(std::size_t n_splits, double test_fraction) {
    return {Variant::shuffle_split, n_splits, test_fraction, true};
  }

  std::vector<Split> split(const TargetVector& y, std::uint64_t seed) const;
  std::string name() const;
};

std::string to_string(CvStrategy::Variant v);
CvStrategy::Variant parse_cv_variant(const std::string& name);

}  // namespace hyperpipe
