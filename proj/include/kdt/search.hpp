// Nearest neighbor queries: brute-force oracle, defeatist descent, and
// comprehensive (backtracking) search, all instrumented.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kdt/dataset.hpp"
#include "kdt/tree.hpp"

namespace kdt {

struct SearchOutcome {
  std::int64_t index = -1;           // answer point index
  double distance = 0.0;             // Euclidean distance to the answer
  std::int64_t visited_leaves = 0;   // leaves whose point lists were scanned
  std::int64_t distance_computations = 0;  // point-to-point distance evaluations
  std::int64_t backtracks = 0;       // second-child descents (comprehensive only)
};

/// Exhaustive scan. Distance ties break to the smallest index, the tie rule
/// shared by all three search routines.
SearchOutcome brute_force_nn(const DataSet& data, std::span<const double> q);

/// Scan only the leaf the query descends to. visited_leaves is always 1 and
/// distance_computations < 2 * min_leaf_size.
SearchOutcome defeatist_search(const KdTree& tree, std::span<const double> q);

/// Exact search: descend the query-side child first, then the sibling iff its
/// cell intersects the open ball around q of the current best distance.
/// Always agrees with brute_force_nn. When `visited` is non-null the ids of
/// scanned leaves are appended in visit order.
SearchOutcome comprehensive_search(const KdTree& tree, std::span<const double> q,
                                   std::vector<NodeId>* visited = nullptr);

}  // namespace kdt
