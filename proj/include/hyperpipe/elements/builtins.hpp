#pragma once

// Built-in transformers, resamplers, and estimators.

#include <cstdint>
#include <span>
#include <vector>

#include "hyperpipe/elements/element.hpp"

namespace hyperpipe {

// ---------------------------------------------------------------- transformers

/// (x - mean) / std per column, population std; zero-std columns map to 0.
/// NaN cells are skipped when fitting and stay NaN.
class StandardScaler final : public ElementBase<StandardScaler> {
 public:
  StandardScaler() { init_params(); }
  std::string keyword() const override { return "StandardScaler"; }
  Capabilities capabilities() const override { return {.can_transform = true}; }
  const std::vector<ParamSpec>& schema() const override;

  void fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData& extras) override;
  FeatureMatrix transform(const FeatureMatrix& x, const ExtraData& extras) const override;

  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& scale() const noexcept { return scale_; }

 protected:
  void write_state(ByteWriter& out) const override;
  void read_state(ByteReader& in) override;

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

/// Replaces NaN with the training mean of the column.
class SimpleImputer final : public ElementBase<SimpleImputer> {
 public:
  SimpleImputer() { init_params(); }
  std::string keyword() const override { return "SimpleImputer"; }
  Capabilities capabilities() const override { return {.can_transform = true}; }
  const std::vector<ParamSpec>& schema() const override;

  void fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData& extras) override;
  FeatureMatrix transform(const FeatureMatrix& x, const ExtraData& extras) const override;

  const std::vector<double>& fill_values() const noexcept { return fill_; }

 protected:
  void write_state(ByteWriter& out) const override;
  void read_state(ByteReader& in) override;

 private:
  std::vector<double> fill_;
};

/// Projection onto the leading eigenvectors of the training covariance.
///
/// n_components: integer k >= 1, a fraction f in (0, 1) selecting the
/// smallest k whose cumulative explained variance reaches f, or 0 (default)
/// for all components. Each component's largest-magnitude entry is positive.
class PCA final : public ElementBase<PCA> {
 public:
  PCA() { init_params(); }
  std::string keyword() const override { return "PCA"; }
  Capabilities capabilities() const override { return {.can_transform = true}; }
  const std::vector<ParamSpec>& schema() const override;

  void fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData& extras) override;
  FeatureMatrix transform(const FeatureMatrix& x, const ExtraData& extras) const override;

  const std::vector<double>& explained_variance() const noexcept { return explained_variance_; }
  std::size_t n_components() const noexcept { return n_components_; }
  /// Row-major n_components x n_features.
  const std::vector<double>& components() const noexcept { return components_; }

  /// Smallest k whose cumulative share of `eigenvalues` (descending) reaches `fraction`.
  static std::size_t components_for_fraction(std::span<const double> eigenvalues, double fraction);

 protected:
  void write_state(ByteWriter& out) const override;
  void read_state(ByteReader& in) override;

 private:
  std::size_t n_features_ = 0;
  std::size_t n_components_ = 0;
  std::vector<double> mean_;
  std::vector<double> components_;
  std::vector<double> explained_variance_;
};

/// Minimizes (1/2n)||y - X b||^2 + alpha ||b||_1 by cyclic coordinate descent
/// with soft-thresholding. No intercept; callers center when they need one.
/// Stops when the largest coefficient change in a sweep is below `tol`.
std::vector<double> lasso_coordinate_descent(const FeatureMatrix& x, std::span<const double> y, double alpha,
                                             int max_iter, double tol);

double soft_threshold(double value, double threshold) noexcept;

/// Keeps the max(1, round(percentile * cols)) columns with the largest |lasso
/// coefficient| on standardized features; ties prefer lower column index.
class LassoFeatureSelection final : public ElementBase<LassoFeatureSelection> {
 public:
  LassoFeatureSelection() { init_params(); }
  std::string keyword() const override { return "LassoFeatureSelection"; }
  Capabilities capabilities() const override { return {.can_transform = true}; }
  const std::vector<ParamSpec>& schema() const override;

  void fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData& extras) override;
  FeatureMatrix transform(const FeatureMatrix& x, const ExtraData& extras) const override;

  const std::vector<std::size_t>& selected() const noexcept { return selected_; }
  const std::vector<double>& coefficients() const noexcept { return coef_; }

  /// Top-k columns by |coef| (ties -> lower index), returned ascending.
  static std::vector<std::size_t> select_top(std::span<const double> coef, double percentile);

 protected:
  void write_state(ByteWriter& out) const override;
  void read_state(ByteReader& in) override;

 private:
  std::size_t n_features_ = 0;
  std::vector<double> coef_;
  std::vector<std::size_t> selected_;
};

/// Balances a binary training set by random under-sampling, random
/// over-sampling, or SMOTE. Fit-time only.
class ImbalancedDataTransformer final : public ElementBase<ImbalancedDataTransformer> {
 public:
  ImbalancedDataTransformer() { init_params(); }
  std::string keyword() const override { return "ImbalancedDataTransformer"; }
  Capabilities capabilities() const override {
    return {.can_transform = true, .modifies_targets = true, .applies_during = AppliesDuring::fit_only, .stochastic = true};
  }
  const std::vector<ParamSpec>& schema() const override;

  Resampled resample(const FeatureMatrix& x, const TargetVector& y) override;
  /// Identity; the element does nothing outside fitting.
  FeatureMatrix transform(const FeatureMatrix& x, const ExtraData& extras) const override;

 protected:
  void write_state(ByteWriter&) const override {}
  void read_state(ByteReader&) override {}
};

// ------------------------------------------------------------------ estimators

/// Majority vote among the k nearest training rows (Euclidean). Distance
/// ties prefer the lower training row; vote ties prefer the smaller label.
class KNeighborsClassifier final : public ElementBase<KNeighborsClassifier> {
 public:
  KNeighborsClassifier() { init_params(); }
  std::string keyword() const override { return "KNeighborsClassifier"; }
  Capabilities capabilities() const override { return {.can_predict = true, .can_predict_proba = true}; }
  const std::vector<ParamSpec>& schema() const override;

  void fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData& extras) override;
  std::vector<double> predict(const FeatureMatrix& x, const ExtraData& extras) const override;
  FeatureMatrix predict_proba(const FeatureMatrix& x, const ExtraData& extras) const override;
  std::vector<double> classes() const override { return classes_; }

 protected:
  void write_state(ByteWriter& out) const override;
  void read_state(ByteReader& in) override;

 private:
  std::vector<std::size_t> neighbors(std::span<const double> query) const;
  FeatureMatrix train_x_;
  std::vector<std::size_t> train_class_;
  std::vector<double> classes_;
};

/// Binary CART tree over class indices. Shared by the tree and forest.
struct TreeNode {
  std::int64_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int64_t left = -1;
  std::int64_t right = -1;
  std::vector<double> class_counts;
};

struct TreeSettings {
  bool entropy = false;
  std::size_t min_samples_split = 2;
  std::size_t max_depth = 0;     // 0: unbounded
  std::size_t max_features = 0;  // 0: all features
};

class CartTree {
 public:
  /// rows: training row indices (duplicates allowed, e.g. bootstrap draws).
  void grow(const FeatureMatrix& x, std::span<const std::size_t> class_index, std::size_t n_classes,
            std::span<const std::size_t> rows, const TreeSettings& settings, std::uint64_t seed);
  const TreeNode& leaf_for(std::span<const double> sample) const;
  /// Majority class index of the leaf; ties prefer the smaller index.
  std::size_t predict_index(std::span<const double> sample) const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

  void write(ByteWriter& out) const;
  void read(ByteReader& in);

 private:
  std::vector<TreeNode> nodes_;
};

/// CART with gini or entropy impurity and midpoint thresholds.
class DecisionTreeClassifier final : public ElementBase<DecisionTreeClassifier> {
 public:
  DecisionTreeClassifier() { init_params(); }
  std::string keyword() const override { return "DecisionTreeClassifier"; }
  Capabilities capabilities() const override { return {.can_predict = true, .can_predict_proba = true}; }
  const std::vector<ParamSpec>& schema() const override;

  void fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData& extras) override;
  std::vector<double> predict(const FeatureMatrix& x, const ExtraData& extras) const override;
  FeatureMatrix predict_proba(const FeatureMatrix& x, const ExtraData& extras) const override;
  std::vector<double> classes() const override { return classes_; }
  const CartTree& tree() const noexcept { return tree_; }

 protected:
  void write_state(ByteWriter& out) const override;
  void read_state(ByteReader& in) override;

 private:
  std::size_t n_features_ = 0;
  std::vector<double> classes_;
  CartTree tree_;
};

/// Bagged CART trees with a random feature subset drawn at every split.
/// max_features: "auto" | "sqrt" (ceil sqrt(cols)), "log2" (ceil log2(cols)),
/// or an integer, capped at cols.
class RandomForestClassifier final : public ElementBase<RandomForestClassifier> {
 public:
  RandomForestClassifier() { init_params(); }
  std::string keyword() const override { return "RandomForestClassifier"; }
  Capabilities capabilities() const override {
    return {.can_predict = true, .can_predict_proba = true, .stochastic = true};
  }
  const std::vector<ParamSpec>& schema() const override;

  void fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData& extras) override;
  std::vector<double> predict(const FeatureMatrix& x, const ExtraData& extras) const override;
  FeatureMatrix predict_proba(const FeatureMatrix& x, const ExtraData& extras) const override;
  std::vector<double> classes() const override { return classes_; }

  static std::size_t resolve_max_features(const ParamValue& setting, std::size_t cols);

 protected:
  void write_state(ByteWriter& out) const override;
  void read_state(ByteReader& in) override;

 private:
  std::size_t n_features_ = 0;
  std::vector<double> classes_;
  std::vector<CartTree> trees_;
};

/// Linear SVM trained by stochastic subgradient descent on the L2-regularized
/// hinge loss (Pegasos): lambda = 1 / (C n), step 1 / (lambda t), a constant
/// feature for the bias, and projection onto the 1/sqrt(lambda) ball. The
/// larger label is the positive class; a zero margin predicts positive.
class LinearSVC final : public ElementBase<LinearSVC> {
 public:
  explicit LinearSVC(std::string keyword = "LinearSVC") : keyword_(std::move(keyword)) { init_params(); }
  std::string keyword() const override { return keyword_; }
  Capabilities capabilities() const override { return {.can_predict = true, .stochastic = true}; }
  const std::vector<ParamSpec>& schema() const override;

  void fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData& extras) override;
  std::vector<double> predict(const FeatureMatrix& x, const ExtraData& extras) const override;
  std::vector<double> classes() const override { return classes_; }

  const std::vector<double>& weights() const noexcept { return w_; }
  double bias() const noexcept { return b_; }
  double decision_function(std::span<const double> sample) const;

 protected:
  void write_state(ByteWriter& out) const override;
  void read_state(ByteReader& in) override;

 private:
  std::string keyword_;
  std::vector<double> w_;
  double b_ = 0.0;
  std::vector<double> classes_;
};

/// Constant predictor: most frequent class (ties -> smaller label) or mean.
class DummyEstimator final : public ElementBase<DummyEstimator> {
 public:
  explicit DummyEstimator(std::string keyword = "DummyClassifier");
  std::string keyword() const override { return keyword_; }
  Capabilities capabilities() const override {
    return {.can_predict = true, .can_predict_proba = keyword_ == "DummyClassifier"};
  }
  const std::vector<ParamSpec>& schema() const override;

  void fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData& extras) override;
  std::vector<double> predict(const FeatureMatrix& x, const ExtraData& extras) const override;
  FeatureMatrix predict_proba(const FeatureMatrix& x, const ExtraData& extras) const override;
  std::vector<double> classes() const override { return classes_; }
  double constant() const noexcept { return constant_; }

 protected:
  void write_state(ByteWriter& out) const override;
  void read_state(ByteReader& in) override;

 private:
  std::string keyword_;
  double constant_ = 0.0;
  std::vector<double> classes_;
};

/// Lasso regression with an intercept (features and target centered on the
/// training means).
class LassoRegressor final : public ElementBase<LassoRegressor> {
 public:
  LassoRegressor() { init_params(); }
  std::string keyword() const override { return "Lasso"; }
  Capabilities capabilities() const override { return {.can_predict = true}; }
  const std::vector<ParamSpec>& schema() const override;

  void fit(const FeatureMatrix& x, const TargetVector& y, const ExtraData& extras) override;
  std::vector<double> predict(const FeatureMatrix& x, const ExtraData& extras) const override;

 protected:
  void write_state(ByteWriter& out) const override;
  void read_state(ByteReader& in) override;

 private:
  std::vector<double> coef_;
  std::vector<double> x_mean_;
  double intercept_ = 0.0;
};

}  // namespace hyperpipe
