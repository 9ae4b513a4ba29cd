// k-d tree with round-robin median splits.
//
// Build rule, per the classic construction: at level l split on axis
// l mod d at the ceil(N/2)-th order statistic of the node's coordinates;
// points with coordinate <= threshold go left; recursion stops when a node
// holds fewer than 2 * min_leaf_size points. Nodes live in a contiguous
// arena in preorder; ids are stable and serializable.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "kdt/dataset.hpp"
#include "kdt/rect.hpp"

namespace kdt {

using NodeId = std::int32_t;

struct TreeConfig {
  std::int64_t min_leaf_size = 1;
  /// Root cell. Defaults to the unit cube; must contain every data point.
  std::optional<Rect> bounding_box;
};

struct SplitRule {
  int axis = -1;
  double threshold = 0.0;
};

struct KdNode {
  std::int32_t level = 0;
  SplitRule rule;              // rule.axis < 0 marks a leaf
  NodeId left = -1, right = -1;
  std::int64_t begin = 0, end = 0;  // range into the tree's point permutation

  bool is_leaf() const { return rule.axis < 0; }
  std::int64_t count() const { return end - begin; }
};

class KdTree {
 public:
  /// Assembles a tree from parts and validates the structural invariants
  /// (child ranges partition the parent, permutation covers [0, n), every
  /// point inside its leaf cell). Normal construction goes via build_tree.
  KdTree(std::shared_ptr<const DataSet> data, std::int64_t min_leaf_size, Rect bounding_box,
         std::vector<KdNode> nodes, std::vector<std::int64_t> perm);

  const DataSet& data() const { return *data_; }
  std::shared_ptr<const DataSet> data_ptr() const { return data_; }
  int dim() const { return data_->dim(); }
  std::int64_t min_leaf_size() const { return min_leaf_size_; }
  const Rect& bounding_box() const { return cells_.front(); }

  NodeId root() const { return 0; }
  std::int64_t node_count() const { return static_cast<std::int64_t>(nodes_.size()); }
  const KdNode& node(NodeId id) const;
  const Rect& cell_of_node(NodeId id) const;

  /// Point indices under a node; ascending within each leaf.
  std::span<const std::int64_t> node_points(NodeId id) const;

  /// All leaf ids in depth-first (preorder) order.
  std::vector<NodeId> leaves() const;
  std::int64_t leaf_count() const { return leaf_count_; }

  /// Maximum leaf level.
  int depth() const { return depth_; }

 private:
  void check_id(NodeId id) const;
  void validate() const;

  std::shared_ptr<const DataSet> data_;
  std::int64_t min_leaf_size_;
  std::vector<KdNode> nodes_;
  std::vector<Rect> cells_;
  std::vector<std::int64_t> perm_;
  std::int64_t leaf_count_ = 0;
  int depth_ = 0;
};

/// The ceil(N/2)-th smallest value (order statistics 1-indexed).
double median_order_statistic(std::span<const double> values);

KdTree build_tree(std::shared_ptr<const DataSet> data, const TreeConfig& config = {});

/// Descend by rule(x) = (x[axis] <= threshold) to the unique leaf. For q
/// inside the bounding box this is the leaf whose cell contains q.
NodeId locate_leaf(const KdTree& tree, std::span<const double> q);

}  // namespace kdt
