#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "reach/geodesy.hpp"
#include "reach/street_graph.hpp"

namespace reach {

enum class RouteMetric { distance_m, time_s };

std::string_view to_string(RouteMetric metric);
RouteMetric parse_metric(std::string_view name);

inline double edge_weight(const Edge& e, RouteMetric metric) {
  return metric == RouteMetric::distance_m ? e.length_m : e.time_s;
}

enum class RouteStatus { ok, unreachable };

struct RouteResult {
  RouteStatus status = RouteStatus::unreachable;
  double cost = 0.0;            // per the requested metric
  double secondary_cost = 0.0;  // the other measure along the same path
  std::vector<NodeIndex> node_path;  // filled only when requested

  bool reachable() const { return status == RouteStatus::ok; }
  double distance_m(RouteMetric metric) const {
    return metric == RouteMetric::distance_m ? cost : secondary_cost;
  }
  double time_s(RouteMetric metric) const { return metric == RouteMetric::time_s ? cost : secondary_cost; }
};

struct SnapResult {
  NodeIndex node = 0;
  double distance_m = 0.0;
};

/// Nearest graph node by great-circle distance; ties go to the lowest index.
SnapResult snap(const StreetGraph& graph, const GeoPoint& p);

struct SearchOptions {
  RouteMetric metric = RouteMetric::time_s;
  bool want_paths = false;
  // Search the reverse graph: costs are then *to* the root from each target.
  // Paths are always in travel order (target first when reversed).
  bool reverse = false;
};

struct SearchStats {
  std::size_t settled = 0;
};

/// Per-thread scratch state for repeated searches over one graph. Reset is
/// proportional to the nodes the previous search touched, not graph size.
class DijkstraWorkspace {
 public:
  DijkstraWorkspace() = default;
  explicit DijkstraWorkspace(std::size_t node_count) { resize(node_count); }

  void resize(std::size_t node_count);
  std::size_t size() const { return cost_.size(); }

 private:
  friend std::vector<RouteResult> shortest_cost(const StreetGraph&, NodeIndex, std::span<const NodeIndex>,
                                                const SearchOptions&, DijkstraWorkspace&, SearchStats*);

  struct HeapItem {
    double cost;
    NodeIndex node;
    friend bool operator>(const HeapItem& a, const HeapItem& b) {
      return a.cost > b.cost || (a.cost == b.cost && a.node > b.node);
    }
  };

  std::uint32_t next_generation();

  std::vector<double> cost_;
  std::vector<double> secondary_;
  std::vector<NodeIndex> parent_;
  std::vector<std::uint32_t> seen_;     // generation stamp: cost_ valid
  std::vector<std::uint32_t> settled_;  // generation stamp: settled
  std::vector<std::uint32_t> target_;   // generation stamp: pending target
  std::vector<HeapItem> heap_;
  std::uint32_t generation_ = 0;
};

/// One-to-many binary-heap Dijkstra from `source`; stops once every target is
/// settled. Results align with `targets` (duplicates allowed).
std::vector<RouteResult> shortest_cost(const StreetGraph& graph, NodeIndex source,
                                       std::span<const NodeIndex> targets, const SearchOptions& options,
                                       DijkstraWorkspace& workspace, SearchStats* stats = nullptr);

std::vector<RouteResult> shortest_cost(const StreetGraph& graph, NodeIndex source,
                                       std::span<const NodeIndex> targets, RouteMetric metric,
                                       bool want_paths = false);

/// Origins × destinations matrix, one one-to-many search per origin. Rows
/// may run on several workers; output is identical for any worker count.
struct RouteTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<RouteResult> cells;  // row-major
  std::vector<SnapResult> origin_snaps;
  std::vector<SnapResult> destination_snaps;

  const RouteResult& at(std::size_t i, std::size_t j) const { return cells[i * cols + j]; }
};

RouteTable table(const StreetGraph& graph, std::span<const GeoPoint> origins,
                 std::span<const GeoPoint> destinations, RouteMetric metric, unsigned workers = 1);

struct RoutePlan {
  std::vector<RouteResult> legs;
  RouteStatus status = RouteStatus::ok;  // unreachable if any leg is
  double total_cost = 0.0;
  double total_secondary_cost = 0.0;
  std::vector<SnapResult> snaps;
};

/// Shortest path through waypoints in order; needs at least two.
RoutePlan route(const StreetGraph& graph, std::span<const GeoPoint> waypoints, RouteMetric metric);

}  // namespace reach
