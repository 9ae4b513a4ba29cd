#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <memory>

#include "kdt/distribution.hpp"
#include "kdt/search.hpp"
#include "kdt/tree.hpp"
#include "test_util.hpp"

using namespace kdt;
using kdt_test::check_tree_invariants;

TEST_CASE("median order statistic") {
  CHECK(median_order_statistic(std::vector<double>{0.2, 0.4, 0.6, 0.9}) == 0.4);
  CHECK(median_order_statistic(std::vector<double>{0.7}) == 0.7);
  CHECK(median_order_statistic(std::vector<double>{5.0, 1.0, 3.0}) == 3.0);
  CHECK(median_order_statistic(std::vector<double>{0.9, 0.2, 0.6, 0.4}) == 0.4);  // order free
  CHECK(median_order_statistic(std::vector<double>{2.0, 2.0, 1.0, 1.0}) == 1.0);
  CHECK_THROWS_AS(median_order_statistic(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("1-D hand trace") {
  auto data = std::make_shared<const DataSet>(
      DataSet::from_rows({{0.2}, {0.4}, {0.6}, {0.9}}));
  const KdTree tree = build_tree(data, TreeConfig{1, std::nullopt});

  const KdNode& root = tree.node(tree.root());
  REQUIRE_FALSE(root.is_leaf());
  CHECK(root.rule.axis == 0);
  CHECK(root.rule.threshold == 0.4);

  const KdNode& left = tree.node(root.left);
  const KdNode& right = tree.node(root.right);
  REQUIRE_FALSE(left.is_leaf());
  REQUIRE_FALSE(right.is_leaf());
  CHECK(left.rule.threshold == 0.2);
  CHECK(right.rule.threshold == 0.6);
  CHECK(left.rule.axis == 0);  // round-robin in 1-D stays on axis 0

  CHECK(tree.leaf_count() == 4);
  for (NodeId leaf : tree.leaves()) CHECK(tree.node(leaf).count() == 1);
  check_tree_invariants(tree);
}

TEST_CASE("single leaf when n < 2 n0") {
  auto data = std::make_shared<const DataSet>(DataSet::from_rows({{0.1, 0.3}, {0.8, 0.2}, {0.4, 0.9}}));
  const KdTree tree = build_tree(data, TreeConfig{2, std::nullopt});
  CHECK(tree.node_count() == 1);
  CHECK(tree.node(tree.root()).is_leaf());
  CHECK(tree.leaves() == std::vector<NodeId>{0});
  CHECK(tree.node_points(tree.root()).size() == 3);
}

TEST_CASE("figure 2 fixture") {
  const auto fixture = kdt_test::load_figure2();
  auto data = std::make_shared<const DataSet>(fixture.data);
  const KdTree tree = build_tree(data, TreeConfig{*fixture.min_leaf_size, fixture.box});

  const KdNode& root = tree.node(tree.root());
  CHECK(root.rule.axis == 0);
  CHECK(root.rule.threshold == 2.26);
  const KdNode& left = tree.node(root.left);
  const KdNode& right = tree.node(root.right);
  CHECK(left.rule.axis == 1);
  CHECK(left.rule.threshold == 2.92);
  CHECK(right.rule.axis == 1);
  CHECK(right.rule.threshold == 2.13);

  CHECK(tree.leaf_count() == 8);
  std::vector<std::int64_t> sizes;
  for (NodeId leaf : tree.leaves()) sizes.push_back(tree.node(leaf).count());
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::int64_t>{2, 2, 2, 2, 3, 3, 3, 3});

  CHECK(tree.cell_of_node(root.left) == Rect({0.0, 0.0}, {2.26, 6.0}));
  CHECK(tree.bounding_box() == Rect({0.0, 0.0}, {6.0, 6.0}));

  // Query's leaf: x in (3.31, 6], y in (2.13, 6], holding points 17 and 19.
  const NodeId leaf = locate_leaf(tree, *fixture.query);
  const Rect& cell = tree.cell_of_node(leaf);
  CHECK(cell == Rect({3.31, 2.13}, {6.0, 6.0}));
  const auto pts = tree.node_points(leaf);
  CHECK(std::vector<std::int64_t>(pts.begin(), pts.end()) == std::vector<std::int64_t>{17, 19});

  // Leaf cells partition the box: volumes add up to 36.
  double total = 0.0;
  for (NodeId id : tree.leaves()) total += volume(tree.cell_of_node(id));
  CHECK(total == doctest::Approx(36.0).epsilon(1e-12));

  check_tree_invariants(tree);
}

TEST_CASE("locate_leaf takes the left child on the boundary") {
  auto data = std::make_shared<const DataSet>(
      DataSet::from_rows({{0.2, 0.1}, {0.4, 0.9}, {0.6, 0.5}, {0.9, 0.3}}));
  const KdTree tree = build_tree(data, TreeConfig{1, std::nullopt});
  const KdNode& root = tree.node(tree.root());
  REQUIRE(root.rule.threshold == 0.4);
  const NodeId leaf = locate_leaf(tree, std::vector<double>{0.4, 0.99});
  // Every node on the path must be on the <=-side of its split.
  const auto pts = tree.node_points(leaf);
  CHECK(std::all_of(pts.begin(), pts.end(),
                    [&](std::int64_t i) { return data->coord(i, 0) <= 0.4; }));
  CHECK_THROWS_AS(locate_leaf(tree, std::vector<double>{0.4}), std::invalid_argument);
}

TEST_CASE("power-of-two regularity on continuous data") {
  Sampler sampler(DistributionSpec::uniform(3), 101);
  auto data = kdt_test::sample_shared(sampler, 256);
  const KdTree tree = build_tree(data, TreeConfig{4, std::nullopt});
  CHECK(tree.leaf_count() == 64);
  CHECK(tree.depth() == 6);  // log2(256 / 4)
  for (NodeId leaf : tree.leaves()) {
    CHECK(tree.node(leaf).count() == 4);
    CHECK(tree.node(leaf).level == 6);
  }
  check_tree_invariants(tree);
}

TEST_CASE("uniform n=1024 n0=16 gives 64 leaves") {
  Sampler sampler(DistributionSpec::uniform(2), 2024);
  auto data = kdt_test::sample_shared(sampler, 1024);
  const KdTree tree = build_tree(data, TreeConfig{16, std::nullopt});
  CHECK(static_cast<std::int64_t>(tree.leaves().size()) == 64);
}

TEST_CASE("identical inputs build identical trees") {
  Sampler sampler(DistributionSpec::uniform(3), 909);
  auto data = kdt_test::sample_shared(sampler, 500);
  const KdTree a = build_tree(data, TreeConfig{4, std::nullopt});
  const KdTree b = build_tree(data, TreeConfig{4, std::nullopt});
  CHECK(write_tree(a) == write_tree(b));
}

TEST_CASE("structural invariants across distributions and shapes") {
  Rng rng(55);
  for (int rep = 0; rep < 40; ++rep) {
    const int d = 1 + static_cast<int>(rng.next_below(5));
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.next_below(600));
    const std::int64_t n0 = 1 + static_cast<std::int64_t>(rng.next_below(8));
    Sampler sampler(DistributionSpec::uniform(d), rng.next_u64());
    auto data = kdt_test::sample_shared(sampler, n);
    const KdTree tree = build_tree(data, TreeConfig{n0, std::nullopt});
    check_tree_invariants(tree);
  }
}

TEST_CASE("ties terminate as leaves") {
  SUBCASE("all points identical") {
    auto data = std::make_shared<const DataSet>(
        DataSet(std::vector<double>(20, 0.5), 10, 2));
    const KdTree tree = build_tree(data, TreeConfig{1, std::nullopt});
    CHECK(tree.node_count() == 1);
    CHECK(tree.node(tree.root()).count() == 10);
  }
  SUBCASE("one coordinate constant") {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 16; ++i) rows.push_back({0.25, (i + 1.0) / 20.0});
    auto data = std::make_shared<const DataSet>(DataSet::from_rows(rows));
    const KdTree tree = build_tree(data, TreeConfig{1, std::nullopt});
    // Splitting terminates; x-levels degenerate but y-levels still divide.
    check_tree_invariants(tree, /*expect_size_bounds=*/false);
    CHECK(tree.leaf_count() >= 1);
  }
  SUBCASE("heavy duplicates") {
    Rng rng(9);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 200; ++i) {
      if (i % 3 == 0) {
        rows.push_back({0.5, 0.5, 0.5});
      } else {
        rows.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
      }
    }
    auto data = std::make_shared<const DataSet>(DataSet::from_rows(rows));
    const KdTree tree = build_tree(data, TreeConfig{2, std::nullopt});
    check_tree_invariants(tree, /*expect_size_bounds=*/false);
  }
}

TEST_CASE("build validation") {
  auto data = std::make_shared<const DataSet>(DataSet::from_rows({{0.5, 1.5}}));
  CHECK_THROWS_AS(build_tree(data, TreeConfig{1, std::nullopt}), std::invalid_argument);
  CHECK_THROWS_AS(build_tree(data, TreeConfig{0, Rect::cube(2, 0.0, 2.0)}), std::invalid_argument);
  CHECK_THROWS_AS(build_tree(nullptr, TreeConfig{1, std::nullopt}), std::invalid_argument);
  const KdTree tree = build_tree(data, TreeConfig{1, Rect::cube(2, 0.0, 2.0)});
  CHECK_THROWS_AS(tree.node(5), std::out_of_range);
  CHECK_THROWS_AS(tree.cell_of_node(-1), std::out_of_range);
}

TEST_CASE("cells of children partition the parent") {
  Sampler sampler(DistributionSpec::uniform(3), 77);
  auto data = kdt_test::sample_shared(sampler, 300);
  const KdTree tree = build_tree(data, TreeConfig{4, std::nullopt});
  for (NodeId id = 0; id < tree.node_count(); ++id) {
    const KdNode& u = tree.node(id);
    if (u.is_leaf()) continue;
    const Rect& cell = tree.cell_of_node(id);
    const Rect& lc = tree.cell_of_node(u.left);
    const Rect& rc = tree.cell_of_node(u.right);
    CHECK(volume(lc) + volume(rc) == doctest::Approx(volume(cell)).epsilon(1e-12));
    CHECK(lc.hi(u.rule.axis) == u.rule.threshold);
    CHECK(rc.lo(u.rule.axis) == u.rule.threshold);
  }
  // locate_leaf agrees with geometric containment inside the box.
  Rng rng(78);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> q{rng.next_double(), rng.next_double(), rng.next_double()};
    CHECK(tree.cell_of_node(locate_leaf(tree, q)).contains(q));
  }
}
