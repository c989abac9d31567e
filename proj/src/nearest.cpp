#include "reach/nearest.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "reach/csv.hpp"
#include "reach/errors.hpp"
#include "reach/log.hpp"

namespace reach {

OpportunitySet::OpportunitySet(std::vector<Opportunity> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Opportunity& a, const Opportunity& b) { return a.dest_id < b.dest_id; });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].dest_id == entries_[i - 1].dest_id) {
      throw ArgumentError("duplicate dest_id '" + entries_[i].dest_id + "'");
    }
  }
  std::vector<QuadTreeEntry> points;
  points.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) points.push_back({entries_[i].location, i});
  index_ = QuadTree(std::move(points));
}

namespace {

GeoPoint parse_point(const CsvReader& csv, const std::string& lat, const std::string& lon) {
  const auto la = parse_double(lat);
  const auto lo = parse_double(lon);
  if (!la || !lo) {
    throw IoError(csv.path().string() + " line " + std::to_string(csv.line()) + ": bad coordinates");
  }
  try {
    return GeoPoint(*la, *lo);
  } catch (const ArgumentError& e) {
    throw IoError(csv.path().string() + " line " + std::to_string(csv.line()) + ": " + e.what());
  }
}

}  // namespace

OpportunitySet load_opportunities_csv(const std::filesystem::path& path) {
  CsvReader csv(path);
  const auto c_id = csv.column("dest_id") ? *csv.column("dest_id") : csv.require_column("id");
  const auto c_lat = csv.require_column("lat");
  const auto c_lon = csv.require_column("lon");
  std::vector<Opportunity> entries;
  std::vector<std::string> row;
  while (csv.next(row)) {
    Opportunity o{row[c_id], parse_point(csv, row[c_lat], row[c_lon]), {}};
    for (std::size_t c = 0; c < csv.header().size(); ++c) {
      if (c != c_id && c != c_lat && c != c_lon) o.metadata.emplace(csv.header()[c], row[c]);
    }
    entries.push_back(std::move(o));
  }
  return OpportunitySet(std::move(entries));
}

std::vector<Origin> load_origins_csv(const std::filesystem::path& path) {
  CsvReader csv(path);
  const auto c_id = csv.require_column("id");
  const auto c_lat = csv.require_column("lat");
  const auto c_lon = csv.require_column("lon");
  std::vector<Origin> origins;
  std::vector<std::string> row;
  while (csv.next(row)) origins.push_back(Origin{row[c_id], parse_point(csv, row[c_lat], row[c_lon])});
  return origins;
}

std::string_view to_string(TravelMode mode) {
  switch (mode) {
    case TravelMode::foot: return "foot";
    case TravelMode::bike: return "bike";
    case TravelMode::car: return "car";
    case TravelMode::public_transport: return "public_transport";
  }
  return "unknown";
}

TravelMode parse_travel_mode(std::string_view name) {
  if (name == "foot") return TravelMode::foot;
  if (name == "bike") return TravelMode::bike;
  if (name == "car") return TravelMode::car;
  if (name == "public_transport" || name == "transit") return TravelMode::public_transport;
  throw ArgumentError("unknown mode '" + std::string(name) + "'");
}

Mode street_mode(TravelMode m) {
  switch (m) {
    case TravelMode::foot: return Mode::foot;
    case TravelMode::bike: return Mode::bike;
    case TravelMode::car: return Mode::car;
    case TravelMode::public_transport: break;
  }
  throw ArgumentError("public_transport is not a street mode");
}

std::string_view to_string(ResultStatus status) { return status == ResultStatus::ok ? "ok" : "unreachable"; }

ResultStatus parse_result_status(std::string_view name) {
  if (name == "ok") return ResultStatus::ok;
  if (name == "unreachable") return ResultStatus::unreachable;
  throw ArgumentError("unknown status '" + std::string(name) + "'");
}

void NearestConfig::validate() const {
  if (k == 0) throw ArgumentError("K must be at least 1");
  if (mode == TravelMode::public_transport) {
    if (!(walk_radius_m > 0.0)) throw ArgumentError("walk radius must be positive");
    if (metric != RouteMetric::time_s) throw ArgumentError("public_transport supports only the time_s metric");
  }
}

std::vector<Candidate> knn_geodesic(const GeoPoint& p, const OpportunitySet& opportunities, std::size_t k) {
  if (k == 0) throw ArgumentError("K must be at least 1");
  if (opportunities.empty()) throw ArgumentError("opportunity set is empty");
  std::vector<Candidate> out;
  for (const auto& hit : opportunities.index().k_nearest(p, k)) {
    out.push_back(Candidate{static_cast<std::size_t>(hit.id), hit.distance_m});
  }
  return out;
}

// ---------------------------------------------------------------------------

NetworkNearest::NetworkNearest(const StreetGraph& graph, const OpportunitySet& opportunities)
    : graph_(graph), opportunities_(opportunities) {
  if (opportunities.empty()) throw ArgumentError("opportunity set is empty");
  dest_nodes_.reserve(opportunities.size());
  for (const auto& o : opportunities.entries()) dest_nodes_.push_back(snap(graph, o.location).node);
}

AccessibilityResult NetworkNearest::query(const Origin& origin, const NearestConfig& config,
                                          DijkstraWorkspace& workspace, QueryCounters* counters) const {
  AccessibilityResult r;
  r.origin_id = origin.id;
  r.origin = origin.location;
  r.mode = config.mode;
  r.metric = config.metric;

  const auto candidates = knn_geodesic(origin.location, opportunities_, config.k);
  const SnapResult source = snap(graph_, origin.location);
  r.snap_distance_m = source.distance_m;

  std::vector<NodeIndex> targets;
  targets.reserve(candidates.size());
  for (const auto& c : candidates) targets.push_back(dest_nodes_[c.index]);
  SearchStats stats;
  const auto costs = shortest_cost(graph_, source.node, targets, SearchOptions{config.metric}, workspace, &stats);
  if (counters) {
    counters->candidates_evaluated += candidates.size();
    counters->nodes_settled += stats.settled;
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!costs[i].reachable()) continue;
    if (!best || costs[i].cost < costs[*best].cost ||
        (costs[i].cost == costs[*best].cost && candidates[i].index < candidates[*best].index)) {
      best = i;
    }
  }
  if (!best) return r;
  r.status = ResultStatus::ok;
  r.dest_id = opportunities_.at(candidates[*best].index).dest_id;
  r.value = costs[*best].cost;
  r.travel_time_s = costs[*best].time_s(config.metric);
  r.distance_m = costs[*best].distance_m(config.metric);
  return r;
}

// ---------------------------------------------------------------------------

TransitNearest::TransitNearest(const StreetGraph& foot_graph, const LineIndex& lines,
                               const OpportunitySet& opportunities, double walk_radius_m)
    : foot_(foot_graph), lines_(lines), opportunities_(opportunities), walk_radius_m_(walk_radius_m) {
  if (opportunities.empty()) throw ArgumentError("opportunity set is empty");
  if (!(walk_radius_m > 0.0)) throw ArgumentError("walk radius must be positive");
  DijkstraWorkspace ws(foot_graph.node_count());
  for (const auto& o : opportunities.entries()) {
    const NodeIndex node = snap(foot_graph, o.location).node;
    auto reach = reachable_lines(o.location, lines, walk_radius_m);
    std::vector<NodeIndex> stop_nodes;
    for (const auto& r : reach) stop_nodes.push_back(snap(foot_graph, lines.line(r.line).stops[r.stop_index].location).node);
    std::vector<std::optional<double>> walks;
    if (!stop_nodes.empty()) {
      for (const auto& res : shortest_cost(foot_graph, node, stop_nodes,
                                           SearchOptions{RouteMetric::time_s, false, true}, ws)) {
        walks.push_back(res.reachable() ? std::optional<double>(res.cost) : std::nullopt);
      }
    }
    dest_nodes_.push_back(node);
    dest_lines_.push_back(std::move(reach));
    dest_walks_.push_back(std::move(walks));
  }
}

AccessibilityResult TransitNearest::query(const Origin& origin, const NearestConfig& config,
                                          DijkstraWorkspace& workspace, QueryCounters* counters) const {
  AccessibilityResult r;
  r.origin_id = origin.id;
  r.origin = origin.location;
  r.mode = config.mode;
  r.metric = RouteMetric::time_s;

  const auto candidates = knn_geodesic(origin.location, opportunities_, config.k);
  const SnapResult source = snap(foot_, origin.location);
  r.snap_distance_m = source.distance_m;
  const auto from_p = reachable_lines(origin.location, lines_, walk_radius_m_);

  // One forward search covers the walk to every boarding stop and the
  // direct walk to every candidate.
  std::vector<NodeIndex> targets;
  for (const auto& c : candidates) targets.push_back(dest_nodes_[c.index]);
  for (const auto& rl : from_p) {
    targets.push_back(snap(foot_, lines_.line(rl.line).stops[rl.stop_index].location).node);
  }
  SearchStats stats;
  const auto costs =
      shortest_cost(foot_, source.node, targets, SearchOptions{RouteMetric::time_s}, workspace, &stats);
  if (counters) {
    counters->candidates_evaluated += candidates.size();
    counters->nodes_settled += stats.settled;
  }
  auto as_time = [](const RouteResult& res) {
    return res.reachable() ? std::optional<double>(res.cost) : std::nullopt;
  };
  std::vector<std::optional<double>> to_board;
  for (std::size_t i = candidates.size(); i < costs.size(); ++i) to_board.push_back(as_time(costs[i]));

  std::optional<std::size_t> best;
  std::optional<Itinerary> best_itinerary;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::size_t dest = candidates[i].index;
    WalkLegs walks{as_time(costs[i]), to_board, dest_walks_[dest]};
    Itinerary it = choose_single_ride(from_p, dest_lines_[dest], lines_, walks);
    if (!it.reachable) continue;
    if (!best || it.total_s < best_itinerary->total_s ||
        (it.total_s == best_itinerary->total_s && dest < candidates[*best].index)) {
      best = i;
      best_itinerary = std::move(it);
    }
  }
  if (!best) return r;
  r.status = ResultStatus::ok;
  r.dest_id = opportunities_.at(candidates[*best].index).dest_id;
  r.value = best_itinerary->total_s;
  r.travel_time_s = best_itinerary->total_s;
  r.itinerary = std::move(best_itinerary);
  return r;
}

// ---------------------------------------------------------------------------

AccessibilityResult nearest_by_network(const GeoPoint& p, const OpportunitySet& opportunities,
                                       const NearestConfig& config, const StreetGraph& graph) {
  config.validate();
  NetworkNearest engine(graph, opportunities);
  DijkstraWorkspace ws(graph.node_count());
  return engine.query(Origin{"", p}, config, ws, nullptr);
}

AccessibilityResult nearest_by_transit(const GeoPoint& p, const OpportunitySet& opportunities,
                                       const NearestConfig& config, const StreetGraph& foot_graph,
                                       const LineIndex& lines) {
  config.validate();
  TransitNearest engine(foot_graph, lines, opportunities, config.walk_radius_m);
  DijkstraWorkspace ws(foot_graph.node_count());
  return engine.query(Origin{"", p}, config, ws, nullptr);
}

std::vector<AccessibilityResult> batch_compute(std::span<const Origin> origins, const NearestEngine& engine,
                                               const NearestConfig& config, unsigned workers,
                                               QueryCounters* counters) {
  config.validate();
  std::vector<AccessibilityResult> results(origins.size());
  std::atomic<std::size_t> next{0};
  std::mutex counter_mutex;

  auto work = [&] {
    DijkstraWorkspace ws(engine.graph_size());
    QueryCounters local;
    for (std::size_t i = next++; i < origins.size(); i = next++) {
      try {
        results[i] = engine.query(origins[i], config, ws, &local);
      } catch (const std::exception& e) {
        log_warning("origin " + origins[i].id + ": " + e.what());
        AccessibilityResult failed;
        failed.origin_id = origins[i].id;
        failed.origin = origins[i].location;
        failed.mode = config.mode;
        failed.metric = config.metric;
        results[i] = std::move(failed);
      }
    }
    if (counters) {
      std::lock_guard lock(counter_mutex);
      counters->candidates_evaluated += local.candidates_evaluated;
      counters->nodes_settled += local.nodes_settled;
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, origins.size()))));
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  return results;
}

}  // namespace reach
