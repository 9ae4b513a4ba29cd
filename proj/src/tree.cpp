#include "kdt/tree.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace kdt {

double median_order_statistic(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("median_order_statistic: empty input");
  std::vector<double> scratch(values.begin(), values.end());
  const std::size_t k = (scratch.size() + 1) / 2;  // ceil(N/2)
  std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
  return scratch[k - 1];
}

KdTree::KdTree(std::shared_ptr<const DataSet> data, std::int64_t min_leaf_size, Rect bounding_box,
               std::vector<KdNode> nodes, std::vector<std::int64_t> perm)
    : data_(std::move(data)), min_leaf_size_(min_leaf_size), nodes_(std::move(nodes)) {
  if (!data_) throw std::invalid_argument("KdTree: null dataset");
  if (min_leaf_size_ < 1) throw std::invalid_argument("KdTree: min_leaf_size must be >= 1");
  if (bounding_box.dim() != data_->dim())
    throw std::invalid_argument("KdTree: bounding box dimension mismatch");
  if (nodes_.empty()) throw std::invalid_argument("KdTree: no nodes");
  perm_ = std::move(perm);

  // Derive cells top-down. Ids are preorder, so parents precede children.
  cells_.assign(nodes_.size(), bounding_box);
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const KdNode& u = nodes_[id];
    if (u.is_leaf()) {
      ++leaf_count_;
      depth_ = std::max(depth_, static_cast<int>(u.level));
      continue;
    }
    cells_[static_cast<std::size_t>(u.left)] =
        cells_[id].clipped_below(u.rule.axis, u.rule.threshold);
    cells_[static_cast<std::size_t>(u.right)] =
        cells_[id].clipped_above(u.rule.axis, u.rule.threshold);
  }
  validate();
}

void KdTree::check_id(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    throw std::out_of_range("KdTree: unknown node id " + std::to_string(id));
}

const KdNode& KdTree::node(NodeId id) const {
  check_id(id);
  return nodes_[static_cast<std::size_t>(id)];
}

const Rect& KdTree::cell_of_node(NodeId id) const {
  check_id(id);
  return cells_[static_cast<std::size_t>(id)];
}

std::span<const std::int64_t> KdTree::node_points(NodeId id) const {
  const KdNode& u = node(id);
  return {perm_.data() + u.begin, static_cast<std::size_t>(u.count())};
}

std::vector<NodeId> KdTree::leaves() const {
  std::vector<NodeId> out;
  out.reserve(static_cast<std::size_t>(leaf_count_));
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].is_leaf()) out.push_back(static_cast<NodeId>(id));
  }
  return out;
}

void KdTree::validate() const {
  const std::int64_t n = data_->size();
  if (perm_.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("KdTree: permutation size != n");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (std::int64_t idx : perm_) {
    if (idx < 0 || idx >= n || seen[static_cast<std::size_t>(idx)])
      throw std::invalid_argument("KdTree: permutation is not a permutation of [0, n)");
    seen[static_cast<std::size_t>(idx)] = 1;
  }

  const KdNode& root_node = nodes_.front();
  if (root_node.level != 0 || root_node.begin != 0 || root_node.end != n)
    throw std::invalid_argument("KdTree: root must cover [0, n) at level 0");

  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const KdNode& u = nodes_[id];
    if (u.begin >= u.end) throw std::invalid_argument("KdTree: empty node range");
    if (u.is_leaf()) {
      for (std::int64_t i = u.begin; i < u.end; ++i) {
        if (!cells_[id].contains(data_->point(perm_[static_cast<std::size_t>(i)])))
          throw std::invalid_argument("KdTree: point outside its leaf cell");
      }
      continue;
    }
    if (u.rule.axis != static_cast<int>(u.level) % data_->dim())
      throw std::invalid_argument("KdTree: split axis violates round-robin order");
    check_id(u.left);
    check_id(u.right);
    const KdNode& l = nodes_[static_cast<std::size_t>(u.left)];
    const KdNode& r = nodes_[static_cast<std::size_t>(u.right)];
    if (l.level != u.level + 1 || r.level != u.level + 1)
      throw std::invalid_argument("KdTree: child level mismatch");
    if (l.begin != u.begin || l.end != r.begin || r.end != u.end)
      throw std::invalid_argument("KdTree: children do not partition the parent range");
    if (u.count() < 2 * min_leaf_size_)
      throw std::invalid_argument("KdTree: internal node below 2 * min_leaf_size");
  }
}

KdTree build_tree(std::shared_ptr<const DataSet> data, const TreeConfig& config) {
  if (!data) throw std::invalid_argument("build_tree: null dataset");
  if (config.min_leaf_size < 1)
    throw std::invalid_argument("build_tree: min_leaf_size must be >= 1");
  const std::int64_t n = data->size();
  const int d = data->dim();
  const Rect box = config.bounding_box ? *config.bounding_box : Rect::unit_cube(d);
  if (box.dim() != d) throw std::invalid_argument("build_tree: bounding box dimension mismatch");
  for (std::int64_t i = 0; i < n; ++i) {
    if (!box.contains(data->point(i)))
      throw std::invalid_argument("build_tree: point " + std::to_string(i) +
                                  " lies outside the bounding box");
  }

  std::vector<std::int64_t> perm(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;

  std::vector<KdNode> nodes;
  nodes.reserve(static_cast<std::size_t>(std::min<std::int64_t>(
      2 * (n / config.min_leaf_size) + 1, 2 * n + 1)));

  struct Pending {
    std::int64_t begin, end;
    std::int32_t level;
    NodeId parent;
    bool is_left;
  };
  std::vector<Pending> stack;
  stack.push_back({0, n, 0, -1, false});

  while (!stack.empty()) {
    const Pending e = stack.back();
    stack.pop_back();
    const NodeId id = static_cast<NodeId>(nodes.size());
    nodes.push_back({});
    KdNode& u = nodes.back();
    u.level = e.level;
    u.begin = e.begin;
    u.end = e.end;
    if (e.parent >= 0) {
      KdNode& p = nodes[static_cast<std::size_t>(e.parent)];
      (e.is_left ? p.left : p.right) = id;
    }

    const std::int64_t count = e.end - e.begin;
    if (count < 2 * config.min_leaf_size) continue;  // leaf

    const int axis = static_cast<int>(e.level % d);
    auto first = perm.begin() + e.begin;
    auto last = perm.begin() + e.end;
    const std::int64_t k = (count + 1) / 2;  // ceil(count / 2)
    std::nth_element(first, first + (k - 1), last, [&](std::int64_t a, std::int64_t b) {
      return data->coord(a, axis) < data->coord(b, axis);
    });
    const double s = data->coord(*(first + (k - 1)), axis);
    auto mid = std::partition(first, last,
                              [&](std::int64_t idx) { return data->coord(idx, axis) <= s; });
    if (mid == last) continue;  // all coordinates tie at or below s: keep as leaf

    u.rule = {axis, s};
    const std::int64_t split_at = mid - perm.begin();
    stack.push_back({split_at, e.end, e.level + 1, id, false});
    stack.push_back({e.begin, split_at, e.level + 1, id, true});
  }

  // Ascending order inside each leaf makes serialization and tie-breaking
  // independent of the partition's internal reshuffling.
  for (const KdNode& u : nodes) {
    if (u.is_leaf()) std::sort(perm.begin() + u.begin, perm.begin() + u.end);
  }

  return KdTree(std::move(data), config.min_leaf_size, box, std::move(nodes), std::move(perm));
}

NodeId locate_leaf(const KdTree& tree, std::span<const double> q) {
  if (static_cast<int>(q.size()) != tree.dim())
    throw std::invalid_argument("locate_leaf: query dimension mismatch");
  NodeId id = tree.root();
  const KdNode* u = &tree.node(id);
  while (!u->is_leaf()) {
    id = q[static_cast<std::size_t>(u->rule.axis)] <= u->rule.threshold ? u->left : u->right;
    u = &tree.node(id);
  }
  return id;
}

}  // namespace kdt
