#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hyperpipe/data.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/rng.hpp"
#include "synthetic.hpp"

using namespace hyperpipe;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  auto path = fs::temp_directory_path() / ("hyperpipe_test_" + name);
  std::ofstream(path) << content;
  return path;
}

Dataset three_rows() {
  ExtraData extras;
  extras.add("age", FeatureMatrix(3, 1, {10, 11, 12}));
  return Dataset(FeatureMatrix(3, 2, {0, 0.5, 1, 1.5, 2, 2.5}),
                 TargetVector({0, 1, 2}, TargetKind::classification), std::move(extras));
}

}  // namespace

TEST_CASE("csv loading splits target, keeps NaN for empty cells") {
  auto path = write_temp("basic.csv", "a,b,t\n1,2,0\n3,,1\n5,6,0\n");
  const auto d = load_csv_dataset(path, std::string("t"), TargetKind::classification);
  REQUIRE(d.x.rows() == 3);
  REQUIRE(d.x.cols() == 2);
  CHECK(d.x(0, 0) == 1.0);
  CHECK(d.x(0, 1) == 2.0);
  CHECK(d.x(1, 0) == 3.0);
  CHECK(std::isnan(d.x(1, 1)));
  CHECK(d.x(2, 1) == 6.0);
  CHECK(d.y.values() == std::vector<double>{0, 1, 0});
  CHECK(d.x.column_names() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("csv loading accepts a target column index and single rows") {
  auto path = write_temp("single.csv", "a,t\n1,1\n");
  const auto d = load_csv_dataset(path, std::size_t{1}, TargetKind::classification);
  CHECK(d.x.rows() == 1);
  CHECK(d.x.cols() == 1);
  CHECK(d.y.values() == std::vector<double>{1});
}

TEST_CASE("csv loading errors") {
  CHECK_THROWS_WITH_AS(load_csv_dataset("/nonexistent/file.csv", std::string("t"), TargetKind::classification),
                       doctest::Contains("missing data file"), ValidationError);
  auto path = write_temp("notarget.csv", "a,b\n1,2\n");
  CHECK_THROWS_WITH_AS(load_csv_dataset(path, std::string("t"), TargetKind::classification),
                       doctest::Contains("unknown target column"), ValidationError);
  auto bad = write_temp("bad.csv", "a,t\nx,1\n");
  CHECK_THROWS_WITH_AS(load_csv_dataset(bad, std::string("t"), TargetKind::classification),
                       doctest::Contains("non-numeric"), ValidationError);
  auto frac = write_temp("frac.csv", "a,t\n1,0.5\n");
  CHECK_THROWS_WITH_AS(load_csv_dataset(frac, std::string("t"), TargetKind::classification),
                       doctest::Contains("non-integral"), ValidationError);
  CHECK_NOTHROW(load_csv_dataset(frac, std::string("t"), TargetKind::regression));
  auto empty_target = write_temp("emptyt.csv", "a,t\n1,\n");
  CHECK_THROWS_WITH_AS(load_csv_dataset(empty_target, std::string("t"), TargetKind::regression),
                       doctest::Contains("empty target"), ValidationError);
}

TEST_CASE("csv round trip reproduces the numeric content") {
  testing::MixtureSpec spec;
  spec.rows = 40;
  spec.missing_fraction = 0.1;
  const auto d = testing::gaussian_mixture(spec);
  auto path = fs::temp_directory_path() / "hyperpipe_test_roundtrip.csv";
  write_csv_dataset(d, path, "label");
  const auto back = load_csv_dataset(path, std::string("label"), TargetKind::classification);
  CHECK(back.x == d.x);
  CHECK(back.y == d.y);
}

TEST_CASE("subset reorders and duplicates rows across x, y and extras") {
  const auto d = three_rows();
  const std::vector<std::size_t> idx{2, 0};
  const auto s = subset(d, idx);
  CHECK(s.rows() == 2);
  CHECK(s.x(0, 0) == 2.0);
  CHECK(s.x(1, 1) == 0.5);
  CHECK(s.y.values() == std::vector<double>{2, 0});
  CHECK(s.extras.at("age")(0, 0) == 12.0);
  CHECK(s.row_ids == std::vector<std::size_t>{2, 0});

  const std::vector<std::size_t> dup{0, 0};
  const auto twice = subset(d, dup);
  CHECK(twice.rows() == 2);
  CHECK(twice.x.row(0)[1] == twice.x.row(1)[1]);

  const std::vector<std::size_t> bad{5};
  CHECK_THROWS_AS(subset(d, bad), ValidationError);
}

TEST_CASE("subset composes") {
  const auto d = testing::random_binary(30, 4, 0.4, 5);
  SplitMix64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> a(15), b(10);
    for (auto& i : a) i = rng.bounded(30);
    for (auto& i : b) i = rng.bounded(15);
    std::vector<std::size_t> ab(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) ab[i] = a[b[i]];
    const auto lhs = subset(subset(d, a), b);
    const auto rhs = subset(d, ab);
    CHECK(lhs.x == rhs.x);
    CHECK(lhs.y == rhs.y);
    CHECK(lhs.row_ids == rhs.row_ids);
  }
}

TEST_CASE("fingerprints are deterministic and sensitive to values and order") {
  const auto d = three_rows();
  CHECK(fingerprint(d) == fingerprint(three_rows()));
  CHECK(fingerprint(d) == fingerprint(d));

  auto changed = three_rows();
  changed.x(0, 0) = 1.5;
  CHECK_FALSE(fingerprint(changed) == fingerprint(d));

  const std::vector<std::size_t> reversed{2, 1, 0};
  auto reordered = subset(d, reversed);
  CHECK_FALSE(fingerprint(reordered) == fingerprint(d));

  auto nan1 = three_rows();
  auto nan2 = three_rows();
  nan1.x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  nan2.x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(fingerprint(nan1) == fingerprint(nan2));
  CHECK(fingerprint(d).hex().size() == 64);
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(FeatureMatrix(2, 2, {1, 2, 3}), ValidationError);
  CHECK_THROWS_AS(FeatureMatrix(0, 2, {}), ValidationError);
  CHECK_THROWS_AS(TargetVector({0.5}, TargetKind::classification), ValidationError);
  CHECK_THROWS_AS(TargetVector({std::nan("")}, TargetKind::regression), ValidationError);
  CHECK_THROWS_AS(Dataset(FeatureMatrix(2, 1, {1, 2}), TargetVector({1}, TargetKind::regression)), ValidationError);
  ExtraData e;
  e.add("c", FeatureMatrix(1, 1, {1}));
  CHECK_THROWS_AS(e.add("c", FeatureMatrix(1, 1, {1})), ValidationError);
  CHECK_THROWS_AS(Dataset(FeatureMatrix(2, 1, {1, 2}), TargetVector({1, 2}, TargetKind::regression), e),
                  ValidationError);
}
