#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace reach::testing {

namespace {

double weight(const Edge& e, RouteMetric metric) {
  return metric == RouteMetric::distance_m ? e.length_m : e.time_s;
}

}  // namespace

std::vector<double> oracle_dijkstra(const StreetGraph& graph, NodeIndex source, RouteMetric metric, bool reverse) {
  const std::size_t n = graph.node_count();
  std::vector<std::vector<std::pair<NodeIndex, double>>> adj(n);
  for (const auto& de : graph.edges()) {
    const double w = weight(de.edge, metric);
    if (reverse) {
      adj[de.edge.target].emplace_back(de.source, w);
    } else {
      adj[de.source].emplace_back(de.edge.target, w);
    }
  }
  // Ordered-set Dijkstra with decrease-key by erase/insert.
  std::vector<double> dist(n, kInf);
  std::set<std::pair<double, NodeIndex>> frontier;
  dist[source] = 0.0;
  frontier.emplace(0.0, source);
  while (!frontier.empty()) {
    const auto [d, u] = *frontier.begin();
    frontier.erase(frontier.begin());
    for (const auto& [to, w] : adj[u]) {
      if (d + w < dist[to]) {
        frontier.erase({dist[to], to});
        dist[to] = d + w;
        frontier.emplace(dist[to], to);
      }
    }
  }
  return dist;
}

double oracle_path_enumeration(const StreetGraph& graph, NodeIndex source, NodeIndex target, RouteMetric metric) {
  std::vector<bool> on_path(graph.node_count(), false);
  double best = kInf;
  std::function<void(NodeIndex, double)> dfs = [&](NodeIndex v, double cost) {
    if (cost >= best) return;
    if (v == target) {
      best = cost;
      return;
    }
    on_path[v] = true;
    for (const auto& e : graph.out_edges(v)) {
      if (!on_path[e.target]) dfs(e.target, cost + weight(e, metric));
    }
    on_path[v] = false;
  };
  dfs(source, 0.0);
  return best;
}

NodeIndex oracle_snap(const StreetGraph& graph, const GeoPoint& p) {
  NodeIndex best = 0;
  double best_d = kInf;
  for (NodeIndex v = 0; v < graph.node_count(); ++v) {
    const double d = haversine_m(p, graph.node(v));
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

OracleNearest oracle_nearest_network(const GeoPoint& p, std::span<const Opportunity> opps, const StreetGraph& graph,
                                     RouteMetric metric) {
  const auto dist = oracle_dijkstra(graph, oracle_snap(graph, p), metric);
  OracleNearest out;
  for (std::size_t i = 0; i < opps.size(); ++i) {
    const double v = dist[oracle_snap(graph, opps[i].location)];
    if (v < out.value) {  // opps sorted by id, so strict < keeps the lowest id
      out = OracleNearest{true, i, v};
    }
  }
  return out;
}

OracleTrip oracle_single_ride(const GeoPoint& p, const GeoPoint& q, std::span<const BusLine> lines,
                              const StreetGraph& foot, double walk_radius_m, bool nearest_only) {
  const NodeIndex ps = oracle_snap(foot, p);
  const NodeIndex qs = oracle_snap(foot, q);
  const auto from_p = oracle_dijkstra(foot, ps, RouteMetric::time_s);
  const auto to_q = oracle_dijkstra(foot, qs, RouteMetric::time_s, true);
  OracleTrip best;
  if (from_p[qs] < kInf) best = OracleTrip{true, true, from_p[qs]};

  for (const auto& line : lines) {
    auto candidates = [&](const GeoPoint& x) {
      std::vector<std::size_t> idx;
      double nearest = kInf;
      std::size_t nearest_i = 0;
      for (std::size_t i = 0; i < line.stops.size(); ++i) {
        const double d = haversine_m(x, line.stops[i].location);
        if (d < walk_radius_m) idx.push_back(i);
        if (d < nearest) {
          nearest = d;
          nearest_i = i;
        }
      }
      if (nearest_only) {
        idx.clear();
        if (nearest < walk_radius_m) idx.push_back(nearest_i);
      }
      return idx;
    };
    for (auto b : candidates(p)) {
      for (auto a : candidates(q)) {
        if (a <= b) continue;
        const double ride = line.timetable[a] - line.timetable[b];
        if (ride < 0) continue;
        const double walk_to = from_p[oracle_snap(foot, line.stops[b].location)];
        const double walk_from = to_q[oracle_snap(foot, line.stops[a].location)];
        const double total = walk_to + ride + walk_from;
        if (total < best.total_s) best = OracleTrip{true, false, total};
      }
    }
  }
  return best;
}

namespace {

// Winding number of a closed ring around p (lon = x, lat = y).
int winding(const Ring& ring, const GeoPoint& p) {
  int wn = 0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const auto& a = ring[i];
    const auto& b = ring[i + 1];
    const double cross = (b.lon() - a.lon()) * (p.lat() - a.lat()) - (p.lon() - a.lon()) * (b.lat() - a.lat());
    if (a.lat() <= p.lat()) {
      if (b.lat() > p.lat() && cross > 0) ++wn;
    } else if (b.lat() <= p.lat() && cross < 0) {
      --wn;
    }
  }
  return wn;
}

}  // namespace

bool oracle_inside(const DistrictPolygon& district, const GeoPoint& p) {
  for (const auto& part : district.parts) {
    if (winding(part.outer, p) == 0) continue;
    bool in_hole = false;
    for (const auto& h : part.holes) in_hole = in_hole || winding(h, p) != 0;
    if (!in_hole) return true;
  }
  return false;
}

std::vector<ScanHit> oracle_within(std::span<const GeoPoint> points, const GeoPoint& p, double limit_m) {
  std::vector<ScanHit> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = haversine_m(p, points[i]);
    if (d < limit_m) out.push_back({i, d});
  }
  std::sort(out.begin(), out.end(), [](const ScanHit& a, const ScanHit& b) {
    return a.distance_m != b.distance_m ? a.distance_m < b.distance_m : a.id < b.id;
  });
  return out;
}

std::vector<ScanHit> oracle_k_nearest(std::span<const GeoPoint> points, const GeoPoint& p, std::size_t k) {
  auto all = oracle_within(points, p, kInf);
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace reach::testing
