#include "doctest.h"

#include <map>
#include <set>

#include "hyperpipe/elements/builtins.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/pipeline.hpp"
#include "synthetic.hpp"

using namespace hyperpipe;

namespace {

Dataset mixture(std::size_t rows = 120, std::uint64_t seed = 7) {
  testing::MixtureSpec spec;
  spec.rows = rows;
  spec.seed = seed;
  return testing::gaussian_mixture(spec);
}

class MemoryCache final : public StageCache {
 public:
  std::optional<StageOutput> load(const Digest& key) override {
    auto it = entries.find(to_hex(key));
    if (it == entries.end()) return std::nullopt;
    ++hits;
    return it->second;
  }
  void store(const Digest& key, const StageOutput& output) override { entries[to_hex(key)] = output; }

  std::map<std::string, StageOutput> entries;
  int hits = 0;
};

}  // namespace

TEST_CASE("scaler then dummy predicts the majority label") {
  const auto d = mixture();
  Pipeline p({Node::element("scaler", "StandardScaler"), Node::element("dummy", "DummyClassifier")});
  p.fit(d);
  const auto pred = p.predict(d.x);
  CHECK(pred.size() == d.rows());
  for (double v : pred) CHECK(v == 0.0);  // label 1 is the minority
}

TEST_CASE("an estimator in the middle feeds its predictions forward") {
  const auto d = mixture();
  auto shapes = std::make_shared<std::vector<Shape>>();
  Pipeline p({Node::element("knn", "KNeighborsClassifier", {{"n_neighbors", std::int64_t{1}}}),
              Node::callback("probe", shape_logger(shapes)), Node::element("dummy", "DummyClassifier")});
  p.fit(d);
  REQUIRE(shapes->size() == 1);
  CHECK((*shapes)[0] == Shape{d.rows(), 1});
  // 1-NN on its own training rows reproduces y, so the dummy sees y itself.
  CHECK(p.predict(d.x).size() == d.rows());
}

TEST_CASE("stack widths add up") {
  const auto d = mixture();
  auto shapes = std::make_shared<std::vector<Shape>>();
  Pipeline labels({Node::stack("stack", {Node::element("knn", "KNeighborsClassifier"),
                                         Node::element("tree", "DecisionTreeClassifier")}),
                   Node::callback("probe", shape_logger(shapes)), Node::element("dummy", "DummyClassifier")});
  labels.fit(d);
  CHECK(shapes->back() == Shape{d.rows(), 2});

  Pipeline proba({Node::stack("stack",
                              {Node::element("knn", "KNeighborsClassifier"),
                               Node::element("tree", "DecisionTreeClassifier"), Node::element("pca", "PCA")},
                              true),
                  Node::callback("probe", shape_logger(shapes)), Node::element("dummy", "DummyClassifier")});
  proba.fit(d);
  CHECK(shapes->back() == Shape{d.rows(), 2 + 2 + d.x.cols()});
  proba.predict(d.x);
  CHECK(shapes->back() == Shape{d.rows(), 2 + 2 + d.x.cols()});
}

TEST_CASE("apply_config") {
  Pipeline p({Node::element("PCA", "PCA"),
              Node::switch_of("estimator_selection", {Node::element("knn", "KNeighborsClassifier"),
                                                      Node::element("tree", "DecisionTreeClassifier"),
                                                      Node::element("dummy", "DummyClassifier")})});
  p.apply_config({{"PCA__n_components", 0.6}});
  CHECK(std::get<double>(p.find("PCA")->element()->params().at("n_components")) == 0.6);
  p.apply_config({{"estimator_selection__current_element", std::int64_t{2}}});
  CHECK(p.find("estimator_selection")->active_child() == 2);
  CHECK_THROWS_WITH_AS(p.apply_config({{"Nope__x", std::int64_t{1}}}), doctest::Contains("unknown config key 'Nope__x'"),
                       ValidationError);
  CHECK_THROWS_AS(p.apply_config({{"PCA__bogus", 1.0}}), ValidationError);
  CHECK_THROWS_AS(p.apply_config({{"estimator_selection__current_element", std::int64_t{3}}}), ValidationError);
  CHECK_THROWS_AS(p.apply_config({{"PCA__disabled", true}}), ValidationError);
  CHECK_THROWS_AS(p.apply_config({{"PCA__n_components", std::string("many")}}), ValidationError);

  const auto d = mixture();
  p.fit(d);
  CHECK(p.fitted());
  p.apply_config({{"knn__n_neighbors", std::int64_t{3}}});
  CHECK_FALSE(p.fitted());
}

TEST_CASE("resamplers act at fit time only") {
  const auto d = mixture(150);
  Pipeline p({Node::element("balance", "ImbalancedDataTransformer", {{"method_name", std::string("RandomOverSampler")}}),
              Node::element("tree", "DecisionTreeClassifier")});
  p.fit(d);
  const FeatureMatrix probe = d.x.select_rows(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6});
  CHECK(p.predict(probe).size() == 7);
  CHECK(p.predict(probe) == p.predict(probe));
  CHECK_THROWS_AS(p.predict(FeatureMatrix(2, 2, {0, 0, 0, 0})), ValidationError);
  CHECK_THROWS_AS(Pipeline(p.nodes()).predict(probe), StateError);
}

TEST_CASE("extras and row ids follow resampled rows") {
  auto d = mixture(80);
  // Extras channel mirrors feature 0 so alignment can be checked row by row.
  d.extras.add("mirror", FeatureMatrix(d.rows(), 1, d.x.column(0)));
  std::vector<std::pair<FeatureMatrix, ExtraData>> seen;
  auto grab = [&](CallbackContext& ctx) {
    if (ctx.fitting) seen.emplace_back(ctx.x, ctx.extras);
  };
  for (const char* method : {"RandomUnderSampler", "RandomOverSampler", "SMOTE"}) {
    seen.clear();
    std::vector<std::vector<std::size_t>> fits;
    FitOptions opts;
    opts.on_fit = [&](const std::string&, std::span<const std::size_t> ids) { fits.emplace_back(ids.begin(), ids.end()); };
    Pipeline p({Node::element("balance", "ImbalancedDataTransformer", {{"method_name", std::string(method)}}),
                Node::callback("grab", grab), Node::element("tree", "DecisionTreeClassifier")});
    p.fit(d, opts);
    REQUIRE(seen.size() == 1);
    const auto& [x, extras] = seen[0];
    const auto& mirror = extras.at("mirror");
    REQUIRE(mirror.rows() == x.rows());
    REQUIRE(fits.size() == 2);
    const auto& tree_ids = fits[1];
    CHECK(tree_ids.size() == x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      CHECK(tree_ids[i] < d.rows());
      // SMOTE rows carry the extras of their base sample, so only copies match exactly.
      if (std::string(method) != "SMOTE") CHECK(mirror(i, 0) == x(i, 0));
      CHECK(mirror(i, 0) == d.extras.at("mirror")(tree_ids[i], 0));
    }
  }
}

TEST_CASE("callbacks observe copies") {
  const FeatureMatrix x = FeatureMatrix::filled(10, 3, 1.0);
  const Dataset d(x, TargetVector({0, 1, 0, 1, 0, 1, 0, 1, 0, 1}, TargetKind::classification));
  auto shapes = std::make_shared<std::vector<Shape>>();
  Pipeline logged({Node::callback("log", shape_logger(shapes)), Node::element("knn", "KNeighborsClassifier")});
  logged.fit(d);
  CHECK(shapes->at(0) == Shape{10, 3});

  Pipeline vandal({Node::callback("vandal",
                                  [](CallbackContext& ctx) {
                                    ctx.x(0, 0) = 1e9;
                                    if (ctx.y) ctx.y = TargetVector({7}, TargetKind::classification);
                                  }),
                   Node::element("knn", "KNeighborsClassifier")});
  Pipeline plain({Node::element("knn", "KNeighborsClassifier")});
  const auto vd = mixture();
  vandal.fit(vd);
  plain.fit(vd);
  CHECK(vandal.predict(vd.x) == plain.predict(vd.x));

  Pipeline boom({Node::callback("boom", [](CallbackContext&) { throw std::runtime_error("kaput"); }),
                 Node::element("knn", "KNeighborsClassifier")});
  try {
    boom.fit(vd);
    FAIL("expected a callback error");
  } catch (const CallbackError& e) {
    CHECK(e.node() == "boom");
    CHECK(std::string(e.what()).find("kaput") != std::string::npos);
  }
}

TEST_CASE("structural validation") {
  CHECK_THROWS_AS(Pipeline(std::vector<Node>{}), ValidationError);
  CHECK_THROWS_WITH_AS(Pipeline({Node::element("scaler", "StandardScaler")}), doctest::Contains("cannot predict"),
                       ValidationError);
  CHECK_THROWS_AS(Pipeline({Node::element("knn", "KNeighborsClassifier"), Node::callback("cb", shape_logger())}),
                  ValidationError);
  CHECK_THROWS_AS(Pipeline({Node::element("a", "StandardScaler"), Node::element("a", "KNeighborsClassifier")}),
                  ValidationError);
  CHECK_THROWS_AS(Node::element("a__b", "StandardScaler"), ValidationError);
  CHECK_THROWS_AS(Node::switch_of("s", {}), ValidationError);
  CHECK_THROWS_AS(Node::element("pca", "PCA", {}, {{"n_neighbours", HyperparameterSpec::integer_range(1, 3)}}),
                  ValidationError);
  CHECK_THROWS_AS(Pipeline({Node::switch_of("s", {Node::element("knn", "KNeighborsClassifier"),
                                                  Node::element("pca", "PCA")})}),
                  ValidationError);
}

TEST_CASE("composite equivalences") {
  const auto d = mixture(150, 3);
  const auto test = mixture(60, 99);

  Pipeline inlined({Node::element("scaler", "StandardScaler"), Node::element("knn", "KNeighborsClassifier")});
  Pipeline branched({Node::branch("b", {Node::element("scaler", "StandardScaler"),
                                        Node::element("knn", "KNeighborsClassifier")})});
  inlined.fit(d);
  branched.fit(d);
  CHECK(inlined.predict(test.x) == branched.predict(test.x));

  Pipeline single({Node::element("scaler", "StandardScaler"),
                   Node::switch_of("s", {Node::element("knn", "KNeighborsClassifier")})});
  single.fit(d);
  CHECK(single.predict(test.x) == inlined.predict(test.x));

  Pipeline with_pca({Node::element("scaler", "StandardScaler"), Node::element("pca", "PCA", {}, {}, true),
                     Node::element("knn", "KNeighborsClassifier")});
  with_pca.apply_config({{"pca__disabled", true}});
  with_pca.fit(d);
  CHECK(with_pca.predict(test.x) == inlined.predict(test.x));
}

TEST_CASE("transformer statistics come from the training rows only") {
  auto d = mixture(100);
  std::vector<std::size_t> train(70);
  for (std::size_t i = 0; i < 70; ++i) train[i] = i;
  auto poisoned = d;
  for (std::size_t r = 70; r < 100; ++r)
    for (std::size_t c = 0; c < d.x.cols(); ++c) poisoned.x(r, c) = 1e12;

  auto state_after_fit = [&](const Dataset& data) {
    Pipeline p({Node::element("imp", "SimpleImputer"), Node::element("scaler", "StandardScaler"),
                Node::element("pca", "PCA"), Node::element("knn", "KNeighborsClassifier")});
    p.fit(subset(data, train));
    ByteWriter w;
    for (const Node* leaf : p.leaves()) leaf->element()->save_state(w);
    return w.take();
  };
  CHECK(state_after_fit(d) == state_after_fit(poisoned));
}

TEST_CASE("stage cache serves leading transformers") {
  const auto d = mixture(90);
  MemoryCache cache;
  FitOptions opts;
  opts.cache = &cache;
  auto make = [] {
    return Pipeline({Node::element("imp", "SimpleImputer"), Node::element("scaler", "StandardScaler"),
                     Node::element("knn", "KNeighborsClassifier"), Node::element("dummy", "DummyClassifier")});
  };
  Pipeline first = make();
  first.fit(d, opts);
  CHECK(cache.entries.size() == 2);  // estimators and everything after are never cached

  const auto fits_before = transformer_fit_count();
  Pipeline second = make();
  second.fit(d, opts);
  CHECK(transformer_fit_count() == fits_before);
  CHECK(cache.hits == 2);
  CHECK(first.predict(d.x) == second.predict(d.x));

  // A different downstream parameter still hits; a different upstream one misses.
  Pipeline downstream = make();
  downstream.apply_config({{"knn__n_neighbors", std::int64_t{3}}});
  downstream.fit(d, opts);
  CHECK(cache.hits == 4);
  const auto other = subset(d, std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  Pipeline other_rows = make();
  other_rows.fit(other, opts);
  CHECK(cache.entries.size() == 4);
}

TEST_CASE("seeds depend on the node's own assignments only") {
  Pipeline p({Node::element("balance", "ImbalancedDataTransformer"),
              Node::switch_of("s", {Node::element("rf", "RandomForestClassifier"),
                                    Node::element("knn", "KNeighborsClassifier")})});
  Pipeline a = p, b = p;
  a.apply_config({{"s__current_element", std::int64_t{0}}, {"rf__n_estimators", std::int64_t{5}}});
  b.apply_config({{"s__current_element", std::int64_t{1}}, {"rf__n_estimators", std::int64_t{5}}});
  a.assign_seeds(11, {std::string("fold"), std::int64_t{0}});
  b.assign_seeds(11, {std::string("fold"), std::int64_t{0}});
  CHECK(a.find("rf")->element()->seed() == b.find("rf")->element()->seed());
  CHECK(a.find("balance")->element()->seed() == b.find("balance")->element()->seed());
  CHECK(a.find("rf")->element()->seed() != a.find("balance")->element()->seed());
  b.assign_seeds(11, {std::string("fold"), std::int64_t{1}});
  CHECK(a.find("rf")->element()->seed() != b.find("rf")->element()->seed());
}

TEST_CASE("derive_seed") {
  CHECK(derive_seed(1, {std::string("fold"), std::int64_t{0}}) == derive_seed(1, {std::string("fold"), std::int64_t{0}}));
  CHECK(derive_seed(1, {std::string("fold"), std::int64_t{0}}) != derive_seed(1, {std::string("fold"), std::int64_t{1}}));
  CHECK(derive_seed(1, {std::string("fold")}) != derive_seed(2, {std::string("fold")}));
  CHECK(derive_seed(1, {std::string("1")}) != derive_seed(1, {std::int64_t{1}}));
}
