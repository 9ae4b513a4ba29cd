#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>

#include "kdt/distribution.hpp"
#include "kdt/stats.hpp"
#include "kdt/tree_io.hpp"
#include "test_util.hpp"

using namespace kdt;

TEST_CASE("tree serialization round trip is byte exact") {
  Sampler sampler(DistributionSpec::uniform(3), 404);
  auto data = kdt_test::sample_shared(sampler, 300);
  const KdTree tree = build_tree(data, TreeConfig{4, std::nullopt});

  const std::string doc = write_tree(tree);
  const KdTree loaded = tree_from_json(nlohmann::json::parse(doc));
  CHECK(write_tree(loaded) == doc);

  // Full-precision coordinates survive, bit for bit.
  for (std::int64_t i = 0; i < data->size(); ++i) {
    for (int j = 0; j < 3; ++j) REQUIRE(loaded.data().coord(i, j) == data->coord(i, j));
  }
  CHECK(loaded.node_count() == tree.node_count());
  CHECK(loaded.leaf_count() == tree.leaf_count());
  for (NodeId id = 0; id < tree.node_count(); ++id) {
    CHECK(loaded.cell_of_node(id) == tree.cell_of_node(id));
    CHECK(loaded.node(id).level == tree.node(id).level);
    CHECK(loaded.node(id).rule.axis == tree.node(id).rule.axis);
  }
}

TEST_CASE("figure 2 golden document") {
  const auto fixture = kdt_test::load_figure2();
  CHECK(fixture.data.size() == 20);
  CHECK(fixture.data.dim() == 2);
  REQUIRE(fixture.box.has_value());
  CHECK(*fixture.box == Rect({0.0, 0.0}, {6.0, 6.0}));
  REQUIRE(fixture.query.has_value());
  CHECK((*fixture.query)[0] == 3.47);
  REQUIRE(fixture.min_leaf_size.has_value());

  auto data = std::make_shared<const DataSet>(fixture.data);
  const KdTree tree = build_tree(data, TreeConfig{*fixture.min_leaf_size, fixture.box});
  const auto doc = tree_to_json(tree);
  CHECK(doc.at("nodes").at(0).at("threshold").get<double>() == 2.26);
  CHECK(doc.at("format").get<std::string>() == "kdt-tree");
}

TEST_CASE("format and version checks") {
  CHECK_THROWS_AS(tree_from_json(nlohmann::json{{"format", "other"}}), std::invalid_argument);
  Sampler sampler(DistributionSpec::uniform(1), 5);
  auto data = kdt_test::sample_shared(sampler, 4);
  auto doc = tree_to_json(build_tree(data, TreeConfig{1, std::nullopt}));
  doc["version"] = 99;
  CHECK_THROWS_AS(tree_from_json(doc), std::invalid_argument);
}

TEST_CASE("loader rejects structural corruption") {
  Sampler sampler(DistributionSpec::uniform(2), 6);
  auto data = kdt_test::sample_shared(sampler, 64);
  auto doc = tree_to_json(build_tree(data, TreeConfig{4, std::nullopt}));

  SUBCASE("dangling child id") {
    doc["nodes"][0]["left"] = 999;
    CHECK_THROWS(tree_from_json(doc));
  }
  SUBCASE("tampered threshold breaks point-in-cell") {
    doc["nodes"][0]["threshold"] = -5.0;
    CHECK_THROWS(tree_from_json(doc));
  }
  SUBCASE("duplicated leaf index") {
    bool patched = false;
    for (auto& node : doc["nodes"]) {
      if (node.contains("points") && node["points"].size() >= 2) {
        node["points"][0] = node["points"][1];
        patched = true;
        break;
      }
    }
    REQUIRE(patched);
    CHECK_THROWS(tree_from_json(doc));
  }
}

TEST_CASE("doubles survive json round trips bit-exactly") {
  Rng rng(42);
  for (int rep = 0; rep < 5000; ++rep) {
    const double x = (rng.next_double() - 0.5) * std::pow(10.0, static_cast<double>(rng.next_below(40)) - 20.0);
    nlohmann::json j = x;
    const double back = nlohmann::json::parse(j.dump()).get<double>();
    REQUIRE(back == x);
    REQUIRE(nlohmann::json::parse("[" + format_double(x) + "]").at(0).get<double>() == x);
  }
}

TEST_CASE("content hash is stable") {
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("kdt") == fnv1a64_hex("kdt"));
  CHECK(fnv1a64_hex("kdt") != fnv1a64_hex("kds"));
}
