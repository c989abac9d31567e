#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "reach/geodesy.hpp"

namespace reach {

/// Lat/lon rectangle, closed on all sides.
struct GeoBox {
  double min_lat = 0.0;
  double min_lon = 0.0;
  double max_lat = 0.0;
  double max_lon = 0.0;

  bool contains(const GeoPoint& p) const {
    return p.lat() >= min_lat && p.lat() <= max_lat && p.lon() >= min_lon && p.lon() <= max_lon;
  }
};

/// Lower bound on haversine_m from p to any point of the box. Zero when p is
/// inside. Slightly shrunk so it never exceeds the true minimum.
double min_distance_m(const GeoBox& box, const GeoPoint& p);

struct QuadTreeEntry {
  GeoPoint point;
  std::uint64_t id = 0;

  friend bool operator==(const QuadTreeEntry&, const QuadTreeEntry&) = default;
};

struct QuadTreeHit {
  std::uint64_t id = 0;
  GeoPoint point;
  double distance_m = 0.0;

  friend bool operator==(const QuadTreeHit&, const QuadTreeHit&) = default;
};

/// Optional query instrumentation.
struct QueryStats {
  std::size_t nodes_visited = 0;
};

/// Static point quadtree with branch-and-bound geodesic queries.
///
/// Internal nodes own exactly four children whose boxes partition the parent
/// (split at the midpoint; points on a split line go to the upper/eastern
/// child). Leaves hold at most `capacity` points unless they sit at
/// `max_depth`, where duplicates accumulate. All query ties are broken by the
/// lowest id. Immutable after construction and safe for concurrent readers.
class QuadTree {
 public:
  static constexpr std::size_t kDefaultCapacity = 16;
  static constexpr int kDefaultMaxDepth = 20;

  QuadTree() = default;
  explicit QuadTree(std::vector<QuadTreeEntry> entries, std::size_t capacity = kDefaultCapacity,
                    int max_depth = kDefaultMaxDepth);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t capacity() const { return capacity_; }
  int max_depth() const { return max_depth_; }

  /// Nearest stored point with distance strictly below `limit_m`.
  /// `limit_m` may be +infinity for an unbounded search; must be > 0.
  std::optional<QuadTreeHit> nearest_within(const GeoPoint& p, double limit_m,
                                            QueryStats* stats = nullptr) const;

  /// All stored points with distance strictly below `limit_m`, ascending by
  /// (distance, id).
  std::vector<QuadTreeHit> within_radius(const GeoPoint& p, double limit_m,
                                         QueryStats* stats = nullptr) const;

  /// The k nearest points ascending by (distance, id); fewer if size() < k.
  std::vector<QuadTreeHit> k_nearest(const GeoPoint& p, std::size_t k,
                                     QueryStats* stats = nullptr) const;

  /// Every stored entry, in tree (leaf) order.
  std::vector<QuadTreeEntry> entries() const;

  /// Checks the structural invariants; used by tests.
  bool check_invariants() const;

 private:
  struct Node {
    GeoBox box;
    std::int32_t first_child = -1;  // four consecutive children, or -1 for a leaf
    std::uint32_t begin = 0;        // leaf range into entries_
    std::uint32_t end = 0;
    int depth = 0;
  };

  void split(std::size_t node_index);

  std::vector<QuadTreeEntry> entries_;
  std::vector<Node> nodes_;
  std::size_t capacity_ = kDefaultCapacity;
  int max_depth_ = kDefaultMaxDepth;
};

}  // namespace reach
