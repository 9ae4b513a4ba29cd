#include "kdt/search.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace kdt {

namespace {

struct Best {
  double dist_sq = std::numeric_limits<double>::infinity();
  std::int64_t index = -1;

  void offer(double d_sq, std::int64_t idx) {
    if (d_sq < dist_sq || (d_sq == dist_sq && idx < index)) {
      dist_sq = d_sq;
      index = idx;
    }
  }
};

// Scans a leaf's points (ascending index order) against the running best.
void scan_leaf(const KdTree& tree, NodeId id, std::span<const double> q, Best& best,
               SearchOutcome& out) {
  for (std::int64_t idx : tree.node_points(id)) {
    ++out.distance_computations;
    best.offer(dist_sq_points(tree.data().point(idx), q), idx);
  }
  ++out.visited_leaves;
}

void comprehensive_rec(const KdTree& tree, NodeId id, std::span<const double> q, Best& best,
                       SearchOutcome& out, std::vector<NodeId>* visited) {
  const KdNode& u = tree.node(id);
  if (u.is_leaf()) {
    scan_leaf(tree, id, q, best, out);
    if (visited) visited->push_back(id);
    return;
  }
  const bool q_left = q[static_cast<std::size_t>(u.rule.axis)] <= u.rule.threshold;
  const NodeId first = q_left ? u.left : u.right;
  const NodeId second = q_left ? u.right : u.left;
  comprehensive_rec(tree, first, q, best, out, visited);
  // Sibling cell meets the open ball of the current best distance.
  if (dist_sq_point_to_rect(q, tree.cell_of_node(second)) < best.dist_sq) {
    ++out.backtracks;
    comprehensive_rec(tree, second, q, best, out, visited);
  }
}

void check_dim(int data_dim, std::span<const double> q, const char* who) {
  if (static_cast<int>(q.size()) != data_dim)
    throw std::invalid_argument(std::string(who) + ": query dimension mismatch");
}

}  // namespace

SearchOutcome brute_force_nn(const DataSet& data, std::span<const double> q) {
  check_dim(data.dim(), q, "brute_force_nn");
  Best best;
  SearchOutcome out;
  for (std::int64_t i = 0; i < data.size(); ++i) {
    ++out.distance_computations;
    best.offer(dist_sq_points(data.point(i), q), i);
  }
  out.index = best.index;
  out.distance = std::sqrt(best.dist_sq);
  return out;
}

SearchOutcome defeatist_search(const KdTree& tree, std::span<const double> q) {
  check_dim(tree.dim(), q, "defeatist_search");
  Best best;
  SearchOutcome out;
  scan_leaf(tree, locate_leaf(tree, q), q, best, out);
  out.index = best.index;
  out.distance = std::sqrt(best.dist_sq);
  return out;
}

SearchOutcome comprehensive_search(const KdTree& tree, std::span<const double> q,
                                   std::vector<NodeId>* visited) {
  check_dim(tree.dim(), q, "comprehensive_search");
  Best best;
  SearchOutcome out;
  comprehensive_rec(tree, tree.root(), q, best, out, visited);
  out.index = best.index;
  out.distance = std::sqrt(best.dist_sq);
  return out;
}

}  // namespace kdt
