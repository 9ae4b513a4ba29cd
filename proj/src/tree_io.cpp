#include "kdt/tree_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kdt {

namespace {

nlohmann::ordered_json rect_to_json(const Rect& r) {
  return {{"lo", std::vector<double>(r.lo().begin(), r.lo().end())},
          {"hi", std::vector<double>(r.hi().begin(), r.hi().end())}};
}

Rect rect_from_json(const nlohmann::json& j) {
  return Rect(j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>());
}

}  // namespace

nlohmann::ordered_json tree_to_json(const KdTree& tree) {
  nlohmann::ordered_json j;
  j["format"] = kTreeFormatName;
  j["version"] = kTreeFormatVersion;
  j["n"] = tree.data().size();
  j["d"] = tree.dim();
  j["min_leaf_size"] = tree.min_leaf_size();
  j["bounding_box"] = rect_to_json(tree.bounding_box());

  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (std::int64_t i = 0; i < tree.data().size(); ++i) {
    const auto p = tree.data().point(i);
    points.push_back(std::vector<double>(p.begin(), p.end()));
  }
  j["points"] = std::move(points);

  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (NodeId id = 0; id < tree.node_count(); ++id) {
    const KdNode& u = tree.node(id);
    nlohmann::ordered_json nj;
    nj["level"] = u.level;
    if (u.is_leaf()) {
      const auto pts = tree.node_points(id);
      nj["points"] = std::vector<std::int64_t>(pts.begin(), pts.end());
    } else {
      nj["axis"] = u.rule.axis;
      nj["threshold"] = u.rule.threshold;
      nj["left"] = u.left;
      nj["right"] = u.right;
    }
    nodes.push_back(std::move(nj));
  }
  j["nodes"] = std::move(nodes);
  j["root"] = 0;
  return j;
}

KdTree tree_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != kTreeFormatName)
    throw std::invalid_argument("tree document: missing or unknown \"format\"");
  if (j.at("version").get<int>() != kTreeFormatVersion)
    throw std::invalid_argument("tree document: unsupported version");

  const std::int64_t n = j.at("n").get<std::int64_t>();
  const int d = j.at("d").get<int>();
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(d));
  for (const auto& row : j.at("points")) {
    const auto vals = row.get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != d)
      throw std::invalid_argument("tree document: point dimension mismatch");
    coords.insert(coords.end(), vals.begin(), vals.end());
  }
  auto data = std::make_shared<const DataSet>(std::move(coords), n, d);

  const auto& nodes_json = j.at("nodes");
  std::vector<KdNode> nodes(nodes_json.size());
  // First pass: structure. Leaf point ranges are laid out in preorder, which
  // is exactly how build_tree arranges the permutation.
  std::vector<std::vector<std::int64_t>> leaf_lists(nodes_json.size());
  for (std::size_t id = 0; id < nodes_json.size(); ++id) {
    const auto& nj = nodes_json[id];
    nodes[id].level = nj.at("level").get<std::int32_t>();
    if (nj.contains("points")) {
      leaf_lists[id] = nj.at("points").get<std::vector<std::int64_t>>();
    } else {
      nodes[id].rule.axis = nj.at("axis").get<int>();
      nodes[id].rule.threshold = nj.at("threshold").get<double>();
      nodes[id].left = nj.at("left").get<NodeId>();
      nodes[id].right = nj.at("right").get<NodeId>();
      if (nodes[id].left < 0 || nodes[id].right < 0 ||
          static_cast<std::size_t>(nodes[id].left) >= nodes.size() ||
          static_cast<std::size_t>(nodes[id].right) >= nodes.size())
        throw std::invalid_argument("tree document: child id out of range");
    }
  }
  // Second pass: rebuild the permutation, assigning leaf ranges in id order
  // (ids are preorder) and propagating ranges to internal nodes bottom-up.
  std::vector<std::int64_t> perm;
  perm.reserve(static_cast<std::size_t>(n));
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (!nodes[id].is_leaf()) continue;
    nodes[id].begin = static_cast<std::int64_t>(perm.size());
    perm.insert(perm.end(), leaf_lists[id].begin(), leaf_lists[id].end());
    nodes[id].end = static_cast<std::int64_t>(perm.size());
  }
  for (std::size_t rid = nodes.size(); rid-- > 0;) {
    if (nodes[rid].is_leaf()) continue;
    nodes[rid].begin = nodes[static_cast<std::size_t>(nodes[rid].left)].begin;
    nodes[rid].end = nodes[static_cast<std::size_t>(nodes[rid].right)].end;
  }

  return KdTree(std::move(data), j.at("min_leaf_size").get<std::int64_t>(),
                rect_from_json(j.at("bounding_box")), std::move(nodes), std::move(perm));
}

std::string write_tree(const KdTree& tree) { return tree_to_json(tree).dump(2) + "\n"; }

KdTree read_tree_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tree file: " + path);
  nlohmann::json j;
  in >> j;
  return tree_from_json(j);
}

void write_tree_file(const KdTree& tree, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write tree file: " + path);
  out << write_tree(tree);
}

PointsFile read_points_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open points file: " + path);
  nlohmann::json j;
  in >> j;
  const int d = j.at("d").get<int>();
  std::vector<double> coords;
  for (const auto& row : j.at("points")) {
    const auto vals = row.get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != d)
      throw std::invalid_argument("points file: point dimension mismatch in " + path);
    coords.insert(coords.end(), vals.begin(), vals.end());
  }
  const std::int64_t n = static_cast<std::int64_t>(j.at("points").size());

  PointsFile out{DataSet(std::move(coords), n, d), std::nullopt, std::nullopt, std::nullopt};
  if (j.contains("box")) out.box = rect_from_json(j.at("box"));
  if (j.contains("query")) out.query = j.at("query").get<std::vector<double>>();
  if (j.contains("min_leaf_size")) out.min_leaf_size = j.at("min_leaf_size").get<std::int64_t>();
  return out;
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << hash;
  return os.str();
}

}  // namespace kdt
