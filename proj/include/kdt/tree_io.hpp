// Versioned JSON serialization of trees and point sets. Doubles are written
// in shortest round-trip form, so serialize -> parse is bit-exact and golden
// files are stable across platforms.
#pragma once

#include <string>

#include "kdt/tree.hpp"

#include "json.hpp"

namespace kdt {

inline constexpr const char* kTreeFormatName = "kdt-tree";
inline constexpr int kTreeFormatVersion = 1;

/// Full tree document: config, points, nodes with rules and leaf index lists.
nlohmann::ordered_json tree_to_json(const KdTree& tree);
KdTree tree_from_json(const nlohmann::json& j);

std::string write_tree(const KdTree& tree);            // serialized document
KdTree read_tree_file(const std::string& path);        // throws on I/O/format errors
void write_tree_file(const KdTree& tree, const std::string& path);

/// Points file: {"d": ..., "points": [[...], ...]} with optional "box",
/// "query", "min_leaf_size" (the bundled fixtures use all of them).
struct PointsFile {
  DataSet data;
  std::optional<Rect> box;
  std::optional<std::vector<double>> query;
  std::optional<std::int64_t> min_leaf_size;
};
PointsFile read_points_file(const std::string& path);

/// FNV-1a 64-bit content hash, hex encoded; used in build manifests.
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace kdt
