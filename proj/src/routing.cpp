#include "reach/routing.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <limits>
#include <string>
#include <thread>

#include "reach/errors.hpp"

namespace reach {

std::string_view to_string(RouteMetric metric) {
  return metric == RouteMetric::distance_m ? "distance_m" : "time_s";
}

RouteMetric parse_metric(std::string_view name) {
  if (name == "distance_m" || name == "distance") return RouteMetric::distance_m;
  if (name == "time_s" || name == "time") return RouteMetric::time_s;
  throw ArgumentError("unknown metric '" + std::string(name) + "'");
}

SnapResult snap(const StreetGraph& graph, const GeoPoint& p) {
  if (graph.empty()) throw ArgumentError("cannot snap to an empty graph");
  auto hit = graph.node_index().nearest_within(p, std::numeric_limits<double>::infinity());
  return SnapResult{static_cast<NodeIndex>(hit->id), hit->distance_m};
}

void DijkstraWorkspace::resize(std::size_t node_count) {
  cost_.assign(node_count, 0.0);
  secondary_.assign(node_count, 0.0);
  parent_.assign(node_count, 0);
  seen_.assign(node_count, 0);
  settled_.assign(node_count, 0);
  target_.assign(node_count, 0);
  generation_ = 0;
}

std::uint32_t DijkstraWorkspace::next_generation() {
  if (++generation_ == 0) {
    std::fill(seen_.begin(), seen_.end(), 0);
    std::fill(settled_.begin(), settled_.end(), 0);
    std::fill(target_.begin(), target_.end(), 0);
    generation_ = 1;
  }
  return generation_;
}

std::vector<RouteResult> shortest_cost(const StreetGraph& graph, NodeIndex source,
                                       std::span<const NodeIndex> targets, const SearchOptions& options,
                                       DijkstraWorkspace& ws, SearchStats* stats) {
  const std::size_t n = graph.node_count();
  if (source >= n) throw ArgumentError("source node out of range");
  for (NodeIndex t : targets) {
    if (t >= n) throw ArgumentError("target node out of range");
  }
  if (ws.size() != n) ws.resize(n);
  const std::uint32_t gen = ws.next_generation();

  std::size_t pending = 0;
  for (NodeIndex t : targets) {
    if (ws.target_[t] != gen) {
      ws.target_[t] = gen;
      ++pending;
    }
  }

  const RouteMetric secondary_metric =
      options.metric == RouteMetric::time_s ? RouteMetric::distance_m : RouteMetric::time_s;
  auto& heap = ws.heap_;
  heap.clear();
  ws.cost_[source] = 0.0;
  ws.secondary_[source] = 0.0;
  ws.parent_[source] = source;
  ws.seen_[source] = gen;
  heap.push_back({0.0, source});

  while (!heap.empty() && pending > 0) {
    std::pop_heap(heap.begin(), heap.end(), std::greater<>{});
    const auto item = heap.back();
    heap.pop_back();
    const NodeIndex u = item.node;
    if (ws.settled_[u] == gen || item.cost > ws.cost_[u]) continue;
    ws.settled_[u] = gen;
    if (stats) ++stats->settled;
    if (ws.target_[u] == gen) --pending;

    const auto edges = options.reverse ? graph.in_edges(u) : graph.out_edges(u);
    for (const Edge& e : edges) {
      const NodeIndex v = e.target;
      if (ws.settled_[v] == gen) continue;
      const double c = item.cost + edge_weight(e, options.metric);
      if (ws.seen_[v] != gen || c < ws.cost_[v]) {
        ws.seen_[v] = gen;
        ws.cost_[v] = c;
        ws.secondary_[v] = ws.secondary_[u] + edge_weight(e, secondary_metric);
        ws.parent_[v] = u;
        heap.push_back({c, v});
        std::push_heap(heap.begin(), heap.end(), std::greater<>{});
      }
    }
  }

  std::vector<RouteResult> results(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const NodeIndex t = targets[i];
    if (ws.settled_[t] != gen) continue;
    RouteResult& r = results[i];
    r.status = RouteStatus::ok;
    r.cost = ws.cost_[t];
    r.secondary_cost = ws.secondary_[t];
    if (options.want_paths) {
      for (NodeIndex v = t;; v = ws.parent_[v]) {
        r.node_path.push_back(v);
        if (v == source) break;
      }
      // Parent chains run target→root; forward paths read root→target.
      if (!options.reverse) std::reverse(r.node_path.begin(), r.node_path.end());
    }
  }
  return results;
}

std::vector<RouteResult> shortest_cost(const StreetGraph& graph, NodeIndex source,
                                       std::span<const NodeIndex> targets, RouteMetric metric,
                                       bool want_paths) {
  DijkstraWorkspace ws(graph.node_count());
  return shortest_cost(graph, source, targets, SearchOptions{metric, want_paths, false}, ws);
}

RouteTable table(const StreetGraph& graph, std::span<const GeoPoint> origins,
                 std::span<const GeoPoint> destinations, RouteMetric metric, unsigned workers) {
  if (origins.empty() || destinations.empty()) throw ArgumentError("table needs origins and destinations");
  RouteTable t;
  t.rows = origins.size();
  t.cols = destinations.size();
  t.cells.resize(t.rows * t.cols);
  for (const auto& p : origins) t.origin_snaps.push_back(snap(graph, p));
  std::vector<NodeIndex> targets;
  for (const auto& p : destinations) {
    t.destination_snaps.push_back(snap(graph, p));
    targets.push_back(t.destination_snaps.back().node);
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    DijkstraWorkspace ws(graph.node_count());
    for (std::size_t i = next++; i < t.rows; i = next++) {
      auto row = shortest_cost(graph, t.origin_snaps[i].node, targets, SearchOptions{metric}, ws);
      std::move(row.begin(), row.end(), t.cells.begin() + static_cast<std::ptrdiff_t>(i * t.cols));
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(t.rows)));
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  return t;
}

RoutePlan route(const StreetGraph& graph, std::span<const GeoPoint> waypoints, RouteMetric metric) {
  if (waypoints.size() < 2) throw ArgumentError("route needs at least two waypoints");
  RoutePlan plan;
  for (const auto& p : waypoints) plan.snaps.push_back(snap(graph, p));
  DijkstraWorkspace ws(graph.node_count());
  for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
    const NodeIndex target = plan.snaps[k + 1].node;
    auto leg = shortest_cost(graph, plan.snaps[k].node, std::span(&target, 1), SearchOptions{metric}, ws);
    if (leg[0].reachable()) {
      plan.total_cost += leg[0].cost;
      plan.total_secondary_cost += leg[0].secondary_cost;
    } else {
      plan.status = RouteStatus::unreachable;
    }
    plan.legs.push_back(std::move(leg[0]));
  }
  return plan;
}

}  // namespace reach
