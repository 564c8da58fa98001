#include "random_pipeline.hpp"

#include <string>

namespace hyperpipe::testing {

namespace {

using HS = HyperparameterSpec;

std::size_t random_element(SplitMix64& rng, int& counter, bool estimator, std::vector<Node>& out) {
  const std::string name = "n" + std::to_string(counter++);
  std::size_t count = 1;
  HyperparameterMap hps;
  if (estimator) {
    if (rng.bounded(2)) {
      const auto lo = static_cast<std::int64_t>(1 + rng.bounded(3));
      const auto len = static_cast<std::int64_t>(1 + rng.bounded(4));
      hps["n_neighbors"] = HS::integer_range(lo, lo + len);
      count *= static_cast<std::size_t>(len);
    }
    out.push_back(Node::element(name, "KNeighborsClassifier", {}, hps));
    return count;
  }
  switch (rng.bounded(3)) {
    case 0: {  // PCA with a float range over (0, 1)
      const double step = 0.1 * static_cast<double>(1 + rng.bounded(3));
      const auto n = static_cast<std::size_t>(1 + rng.bounded(4));
      hps["n_components"] = HS::float_range(0.05, 0.05 + step * static_cast<double>(n) - step / 2, step);
      count *= n;
      out.push_back(Node::element(name, "PCA", {}, hps, rng.bounded(2) == 1));
      break;
    }
    case 1: {
      const auto n = 1 + rng.bounded(3);
      std::vector<ParamValue> values;
      for (std::size_t i = 0; i < n; ++i) values.emplace_back(0.01 * static_cast<double>(i + 1));
      hps["alpha"] = HS::categorical(values);
      const auto points = 2 + rng.bounded(3);
      hps["percentile"] = HS::float_points(0.2, 0.8, static_cast<std::int64_t>(points));
      count *= n * points;
      out.push_back(Node::element(name, "LassoFeatureSelection", {}, hps, rng.bounded(2) == 1));
      break;
    }
    default:
      out.push_back(Node::element(name, "StandardScaler", {}, {}, rng.bounded(2) == 1));
      break;
  }
  if (out.back().test_disabled()) count += 1;
  return count;
}

}  // namespace

RandomPipeline random_pipeline(SplitMix64& rng) {
  RandomPipeline rp;
  int counter = 0;
  const auto transformers = rng.bounded(4);
  for (std::size_t i = 0; i < transformers; ++i) rp.expected *= random_element(rng, counter, false, rp.nodes);
  if (rng.bounded(2)) {
    std::vector<Node> children;
    std::size_t total = 0;
    const auto n_children = 1 + rng.bounded(3);
    for (std::size_t i = 0; i < n_children; ++i) total += random_element(rng, counter, true, children);
    rp.nodes.push_back(Node::switch_of("switch" + std::to_string(counter++), std::move(children)));
    rp.expected *= total;
  } else {
    rp.expected *= random_element(rng, counter, true, rp.nodes);
  }
  return rp;
}

}  // namespace hyperpipe::testing
