#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "hyperpipe/error.hpp"
#include "hyperpipe/optimization.hpp"
#include "hyperpipe/rng.hpp"
#include "random_pipeline.hpp"

using namespace hyperpipe;

namespace {

using HS = HyperparameterSpec;

std::vector<double> doubles(const std::vector<ParamValue>& values) {
  std::vector<double> out;
  for (const auto& v : values) out.push_back(std::get<double>(v));
  return out;
}

Node knn(const std::string& name, std::vector<std::int64_t> ks) {
  std::vector<ParamValue> values(ks.begin(), ks.end());
  return Node::element(name, "KNeighborsClassifier", {}, {{"n_neighbors", HS::categorical(values)}});
}

}  // namespace

TEST_CASE("expand_spec examples") {
  CHECK(doubles(expand_spec(HS::float_range(0.5, 0.8, 0.1))) == std::vector<double>{0.5, 0.6, 0.7});
  const auto ints = expand_spec(HS::integer_range(2, 4));
  REQUIRE(ints.size() == 2);
  CHECK(std::get<std::int64_t>(ints[0]) == 2);
  CHECK(std::get<std::int64_t>(ints[1]) == 3);
  const auto logs = doubles(expand_spec(HS::float_points(0.001, 1, 4, RangeType::logspace)));
  REQUIRE(logs.size() == 4);
  const double expected[] = {0.001, 0.01, 0.1, 1.0};
  for (int i = 0; i < 4; ++i) CHECK(logs[i] == doctest::Approx(expected[i]).epsilon(1e-14));
  CHECK(logs.front() == 0.001);
  CHECK(logs.back() == 1.0);
  const auto lin = doubles(expand_spec(HS::float_points(0.0, 1.0, 5)));
  CHECK(lin == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(doubles(expand_spec(HS::float_range(0.0, 0.3, 0.1))).size() == 3);
  CHECK(doubles(expand_spec(HS::float_range(0.0, 1.0, 0.1))).size() == 10);
  CHECK(expand_spec(HS::boolean()).size() == 2);
  CHECK(expand_spec(HS::integer_points(1, 3, 10)).size() == 3);
}

TEST_CASE("invalid specs") {
  CHECK_THROWS_AS(HS::float_range(1.0, 0.5, 0.1), ValidationError);
  CHECK_THROWS_AS(HS::float_range(0.0, 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(HS::float_points(0.0, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(HS::float_points(0.0, 1.0, 4, RangeType::logspace), ValidationError);
  CHECK_THROWS_AS(HS::categorical({}), ValidationError);
  CHECK_THROWS_AS(parse_range_type("cubic"), ValidationError);
}

TEST_CASE("grid counts") {
  Pipeline two({Node::element("pca", "PCA", {}, {{"n_components", HS::categorical({0.5, 0.7, 0.9})}}),
                knn("knn", {1, 3})});
  CHECK(grid_configurations(two).size() == 6);

  Pipeline disabled({Node::element("pca", "PCA", {}, {{"n_components", HS::categorical({0.5, 0.7, 0.9})}}, true),
                     knn("knn", {1, 3})});
  const auto grid = grid_configurations(disabled);
  CHECK(grid.size() == 8);
  CHECK(grid_size(disabled) == 8);
  // The disabled config carries only the flag for its node.
  std::size_t disabled_count = 0;
  for (const auto& c : grid) {
    if (std::get<bool>(c.at("pca__disabled"))) {
      ++disabled_count;
      CHECK(c.count("pca__n_components") == 0);
    } else {
      CHECK(c.count("pca__n_components") == 1);
    }
  }
  CHECK(disabled_count == 2);

  Pipeline sw({Node::switch_of("est", {knn("a", {1, 2, 3, 4}), knn("b", {5, 6, 7})})});
  CHECK(grid_configurations(sw).size() == 7);
}

TEST_CASE("grid order: declaration order, last factor fastest") {
  Pipeline p({Node::element("pca", "PCA", {}, {{"n_components", HS::categorical({0.5, 0.7})}}), knn("knn", {1, 3})});
  const auto grid = grid_configurations(p);
  REQUIRE(grid.size() == 4);
  CHECK(std::get<double>(grid[0].at("pca__n_components")) == 0.5);
  CHECK(std::get<std::int64_t>(grid[0].at("knn__n_neighbors")) == 1);
  CHECK(std::get<std::int64_t>(grid[1].at("knn__n_neighbors")) == 3);
  CHECK(std::get<double>(grid[2].at("pca__n_components")) == 0.7);
}

TEST_CASE("grid-count law on random pipelines") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    CAPTURE(trial);
    auto rp = testing::random_pipeline(rng);
    Pipeline p(std::move(rp.nodes));
    const auto grid = grid_configurations(p);
    CHECK(grid.size() == rp.expected);
    CHECK(grid_size(p) == rp.expected);
    std::set<std::string> unique;
    for (const auto& c : grid) unique.insert(canonical(c));
    CHECK(unique.size() == grid.size());
    if (trial % 20 == 0) {
      for (const auto& c : grid) {
        Pipeline copy = p;
        CHECK_NOTHROW(copy.apply_config(c));
      }
    }
  }
}

TEST_CASE("grid search asks the whole grid in order") {
  Pipeline p({Node::element("pca", "PCA", {}, {{"n_components", HS::categorical({0.5, 0.7, 0.9})}}), knn("knn", {1, 3})});
  auto opt = make_optimizer({"grid_search", {}});
  CHECK_THROWS_AS(opt->ask(), StateError);
  opt->prepare(p, 0);
  std::vector<Config> asked;
  while (auto c = opt->ask()) {
    opt->tell(*c, 0.5, true);
    asked.push_back(*c);
  }
  CHECK(asked == grid_configurations(p));
}

TEST_CASE("random grid search samples the grid without repetition") {
  Pipeline p({Node::element("pca", "PCA", {}, {{"n_components", HS::categorical({0.5, 0.7, 0.9})}}), knn("knn", {1, 3})});
  auto capped = make_optimizer({"random_grid_search", {{"n_configurations", std::int64_t{10}}}});
  capped->prepare(p, 5);
  std::size_t n = 0;
  while (capped->ask()) ++n;
  CHECK(n == 6);

  Pipeline big({Node::element("pca", "PCA", {}, {{"n_components", HS::float_range(0.05, 0.95, 0.05)}}),
                knn("knn", {1, 3, 5, 7, 9})});
  const auto grid = grid_configurations(big);
  std::set<std::string> members;
  for (const auto& c : grid) members.insert(canonical(c));
  auto draw = [&](std::uint64_t seed) {
    auto opt = make_optimizer({"random_grid_search", {{"n_configurations", std::int64_t{12}}}});
    opt->prepare(big, seed);
    std::vector<std::string> out;
    while (auto c = opt->ask()) out.push_back(canonical(*c));
    return out;
  };
  const auto a = draw(1);
  CHECK(a.size() == 12);
  CHECK(std::set<std::string>(a.begin(), a.end()).size() == 12);
  for (const auto& c : a) CHECK(members.count(c) == 1);
  CHECK(draw(1) == a);
  CHECK(draw(2) != a);
}

TEST_CASE("switch optimizer interleaves per-child searches") {
  Pipeline p({Node::element("pca", "PCA", {}, {{"n_components", HS::categorical({0.5, 0.7, 0.9})}}),
              Node::switch_of("est", {knn("a", {1, 2, 3, 4, 5, 6}), knn("b", {7, 8}),
                                      Node::element("c", "DecisionTreeClassifier", {},
                                                    {{"max_depth", HS::integer_range(1, 10)}})})});
  auto opt = make_optimizer({"switch_optimizer", {{"n_configurations", std::int64_t{10}}}});
  opt->prepare(p, 3);
  std::vector<std::int64_t> children;
  while (auto c = opt->ask()) children.push_back(std::get<std::int64_t>(c->at("est__current_element")));
  CHECK(children.size() <= 30);
  CHECK(std::count(children.begin(), children.end(), 0) == 10);
  CHECK(std::count(children.begin(), children.end(), 1) == 6);
  CHECK(std::count(children.begin(), children.end(), 2) == 10);
  CHECK(children[0] == 0);
  CHECK(children[1] == 1);
  CHECK(children[2] == 2);

  Pipeline plain({knn("knn", {1, 3})});
  auto bad = make_optimizer({"switch_optimizer", {}});
  CHECK_THROWS_AS(bad->prepare(plain, 0), ValidationError);
  CHECK_THROWS_AS(make_optimizer({"sk_opt", {}}), ValidationError);
  CHECK_THROWS_AS(make_optimizer({"random_grid_search", {{"n_configurations", std::int64_t{0}}}}), ValidationError);
}

TEST_CASE("shall_continue") {
  const PerformanceConstraint mean{"f1_score", 0.7, ConstraintStrategy::mean};
  CHECK_FALSE(shall_continue(mean, {0.5}));
  CHECK(shall_continue(mean, {0.9, 0.6}));
  const PerformanceConstraint first{"f1_score", 0.7, ConstraintStrategy::first};
  CHECK(shall_continue(first, {0.75, 0.1}));
  CHECK_FALSE(shall_continue(first, {0.65, 0.9}));
  const PerformanceConstraint all{"f1_score", 0.7, ConstraintStrategy::all};
  CHECK(shall_continue(all, {0.6, 0.8}));
  CHECK_FALSE(shall_continue(all, {0.6, 0.5}));
  // Smaller is better: the threshold is a ceiling.
  const PerformanceConstraint mse{"mean_squared_error", 1.0, ConstraintStrategy::first};
  CHECK(shall_continue(mse, {0.5}));
  CHECK_FALSE(shall_continue(mse, {1.5}));
  CHECK_THROWS_AS(shall_continue({"nope", 0.5, ConstraintStrategy::first}, {0.1}), ValidationError);
  CHECK(parse_constraint_strategy("all") == ConstraintStrategy::all);
}
