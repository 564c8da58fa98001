#include "hyperpipe/elements/builtins.hpp"
#include "hyperpipe/elements/registry.hpp"

namespace hyperpipe {

void register_builtin_elements(Registry& r) {
  r.register_type<StandardScaler>("StandardScaler", "center and scale to unit variance");
  r.register_type<SimpleImputer>("SimpleImputer", "replace NaN with the training column mean");
  r.register_type<PCA>("PCA", "principal component projection");
  r.register_type<LassoFeatureSelection>("LassoFeatureSelection", "keep the top percentile of features by |lasso coefficient|");
  r.register_type<ImbalancedDataTransformer>("ImbalancedDataTransformer", "class balancing by under/over-sampling or SMOTE");
  r.register_type<KNeighborsClassifier>("KNeighborsClassifier", "k-nearest-neighbour majority vote");
  r.register_type<DecisionTreeClassifier>("DecisionTreeClassifier", "CART classification tree");
  r.register_type<RandomForestClassifier>("RandomForestClassifier", "bagged CART trees with random feature subsets");

  auto register_svc = [&r](const std::string& keyword) {
    ElementFactory f = [keyword] { return std::make_unique<LinearSVC>(keyword); };
    auto probe = f();
    ElementMetadata meta{probe->capabilities(), {}, "linear SVM trained by stochastic subgradient descent"};
    for (const auto& s : probe->schema()) meta.parameter_names.push_back(s.name);
    r.register_element(keyword, std::move(f), std::move(meta));
  };
  register_svc("LinearSVC");
  register_svc("SVC");

  for (std::string keyword : {"DummyClassifier", "DummyRegressor"}) {
    ElementFactory f = [keyword] { return std::make_unique<DummyEstimator>(keyword); };
    auto probe = f();
    ElementMetadata meta{probe->capabilities(), {}, "constant-prediction baseline"};
    for (const auto& s : probe->schema()) meta.parameter_names.push_back(s.name);
    r.register_element(keyword, std::move(f), std::move(meta));
  }
  r.register_type<LassoRegressor>("Lasso", "L1-regularized linear regression");
}

}  // namespace hyperpipe
