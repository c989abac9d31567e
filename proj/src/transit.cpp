#include "reach/transit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "reach/csv.hpp"
#include "reach/errors.hpp"
#include "reach/log.hpp"

namespace reach {

std::string_view to_string(TimetableSource source) {
  switch (source) {
    case TimetableSource::none: return "none";
    case TimetableSource::gtfs_stop_times: return "gtfs_stop_times";
    case TimetableSource::estimated: return "estimated";
  }
  return "none";
}

TimetableSource parse_timetable_source(std::string_view name) {
  if (name == "none") return TimetableSource::none;
  if (name == "gtfs_stop_times") return TimetableSource::gtfs_stop_times;
  if (name == "estimated") return TimetableSource::estimated;
  throw ArgumentError("unknown timetable source '" + std::string(name) + "'");
}

void validate_line(const BusLine& line) {
  if (line.stops.size() < 2) throw ArgumentError("line " + line.line_id + " has fewer than two stops");
  if (!line.has_timetable()) {
    if (!line.timetable.empty()) throw ArgumentError("line " + line.line_id + " has untagged timetable");
    return;
  }
  if (line.timetable.size() != line.stops.size()) {
    throw ArgumentError("line " + line.line_id + ": timetable length differs from stop count");
  }
  if (line.timetable[0] != 0.0) throw ArgumentError("line " + line.line_id + ": timetable must start at 0");
  for (std::size_t i = 1; i < line.timetable.size(); ++i) {
    if (!(line.timetable[i] >= line.timetable[i - 1]) || !std::isfinite(line.timetable[i])) {
      throw ArgumentError("line " + line.line_id + ": timetable decreases at stop " + std::to_string(i));
    }
  }
}

std::optional<int> parse_gtfs_time(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  int parts[3] = {0, 0, 0};
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int i = 0; i < 3; ++i) {
    auto [next, ec] = std::from_chars(p, end, parts[i]);
    if (ec != std::errc() || next == p || parts[i] < 0) return std::nullopt;
    p = next;
    if (i < 2) {
      if (p == end || *p != ':') return std::nullopt;
      ++p;
    }
  }
  if (p != end || parts[1] > 59 || parts[2] > 59) return std::nullopt;
  return parts[0] * 3600 + parts[1] * 60 + parts[2];
}

// ---------------------------------------------------------------------------
// GTFS

namespace {

std::filesystem::path required_file(const std::filesystem::path& dir, const char* name) {
  auto path = dir / name;
  if (!std::filesystem::is_regular_file(path)) {
    throw FeedError("GTFS feed " + dir.string() + " is missing " + name);
  }
  return path;
}

struct StopTime {
  long sequence = 0;
  std::string stop_id;
  std::optional<int> time;
};

struct TripInfo {
  std::string route_id;
  std::string direction_id;
  std::string shape_id;
  std::vector<StopTime> stop_times;
};

}  // namespace

TransitFeed parse_gtfs(const std::filesystem::path& directory) {
  TransitFeed feed;
  std::unordered_map<std::string, std::size_t> stop_lookup;
  {
    CsvReader csv(required_file(directory, "stops.txt"));
    const auto c_id = csv.require_column("stop_id");
    const auto c_lat = csv.require_column("stop_lat");
    const auto c_lon = csv.require_column("stop_lon");
    const auto c_name = csv.column("stop_name");
    std::vector<std::string> row;
    while (csv.next(row)) {
      const auto lat = parse_double(row[c_lat]);
      const auto lon = parse_double(row[c_lon]);
      if (!lat || !lon) continue;  // stations/generic nodes without coordinates
      Stop s;
      s.stop_id = row[c_id];
      try {
        s.location = GeoPoint(*lat, *lon);
      } catch (const ArgumentError& e) {
        throw FeedError("stops.txt line " + std::to_string(csv.line()) + ": " + e.what());
      }
      if (c_name) s.name = row[*c_name];
      if (!stop_lookup.emplace(s.stop_id, feed.stops.size()).second) {
        throw FeedError("stops.txt: duplicate stop_id '" + s.stop_id + "'");
      }
      feed.stops.push_back(std::move(s));
    }
  }

  std::unordered_set<std::string> routes;
  {
    CsvReader csv(required_file(directory, "routes.txt"));
    const auto c_id = csv.require_column("route_id");
    std::vector<std::string> row;
    while (csv.next(row)) routes.insert(row[c_id]);
  }

  std::map<std::string, TripInfo> trips;  // ordered by trip_id
  {
    CsvReader csv(required_file(directory, "trips.txt"));
    const auto c_route = csv.require_column("route_id");
    const auto c_trip = csv.require_column("trip_id");
    const auto c_dir = csv.column("direction_id");
    const auto c_shape = csv.column("shape_id");
    std::vector<std::string> row;
    while (csv.next(row)) {
      if (!routes.contains(row[c_route])) {
        throw FeedError("trip '" + row[c_trip] + "' references unknown route '" + row[c_route] + "'");
      }
      TripInfo t;
      t.route_id = row[c_route];
      if (c_dir) t.direction_id = row[*c_dir];
      if (c_shape) t.shape_id = row[*c_shape];
      trips.insert_or_assign(row[c_trip], std::move(t));
    }
  }

  {
    CsvReader csv(required_file(directory, "stop_times.txt"));
    const auto c_trip = csv.require_column("trip_id");
    const auto c_stop = csv.require_column("stop_id");
    const auto c_seq = csv.require_column("stop_sequence");
    const auto c_arr = csv.column("arrival_time");
    const auto c_dep = csv.column("departure_time");
    std::vector<std::string> row;
    while (csv.next(row)) {
      auto trip = trips.find(row[c_trip]);
      if (trip == trips.end()) {
        throw FeedError("stop_times.txt line " + std::to_string(csv.line()) + ": unknown trip '" +
                        row[c_trip] + "'");
      }
      if (!stop_lookup.contains(row[c_stop])) {
        throw FeedError("trip '" + row[c_trip] + "' references unknown stop '" + row[c_stop] + "'");
      }
      StopTime st;
      const std::string& seq = row[c_seq];
      auto [ptr, ec] = std::from_chars(seq.data(), seq.data() + seq.size(), st.sequence);
      if (ec != std::errc() || ptr != seq.data() + seq.size()) {
        throw FeedError("trip '" + row[c_trip] + "': bad stop_sequence '" + seq + "'");
      }
      st.stop_id = row[c_stop];
      const std::string arrival = c_arr ? row[*c_arr] : std::string();
      const std::string departure = c_dep ? row[*c_dep] : std::string();
      const std::string& stamp = arrival.empty() ? departure : arrival;
      if (!stamp.empty()) {
        st.time = parse_gtfs_time(stamp);
        if (!st.time) throw FeedError("trip '" + row[c_trip] + "': bad time '" + stamp + "'");
      }
      trip->second.stop_times.push_back(std::move(st));
    }
  }

  // Group trips into lines. Trips are visited in trip_id order, so the first
  // trip with the maximum stop count wins ties.
  using GroupKey = std::tuple<std::string, std::string, std::string>;
  std::map<GroupKey, std::string> representative;
  for (auto& [trip_id, trip] : trips) {
    if (trip.stop_times.empty()) continue;
    std::sort(trip.stop_times.begin(), trip.stop_times.end(),
              [](const StopTime& a, const StopTime& b) { return a.sequence < b.sequence; });
    std::string branch = trip.shape_id;
    if (branch.empty()) {
      branch = "pattern";
      for (const auto& st : trip.stop_times) branch += "|" + st.stop_id;
    }
    GroupKey key{trip.route_id, trip.direction_id, branch};
    auto [it, inserted] = representative.try_emplace(key, trip_id);
    if (!inserted && trip.stop_times.size() > trips.at(it->second).stop_times.size()) it->second = trip_id;
  }

  for (const auto& [key, trip_id] : representative) {
    const TripInfo& trip = trips.at(trip_id);
    BusLine line;
    line.route_id = trip.route_id;
    line.line_id = trip.route_id + ":" + (trip.direction_id.empty() ? "0" : trip.direction_id) + ":" +
                   (trip.shape_id.empty() ? trip_id : trip.shape_id);
    bool timed = true;
    for (const auto& st : trip.stop_times) {
      const Stop& s = feed.stops[stop_lookup.at(st.stop_id)];
      line.stops.push_back(LineStop{s.stop_id, s.location});
      timed = timed && st.time.has_value();
    }
    if (line.stops.size() < 2) {
      log_warning("line " + line.line_id + " skipped: fewer than two stops");
      continue;
    }
    if (timed) {
      const int origin = *trip.stop_times.front().time;
      for (const auto& st : trip.stop_times) {
        const double offset = *st.time - origin;
        if (!line.timetable.empty() && offset < line.timetable.back()) {
          throw FeedError("trip '" + trip_id + "': stop times decrease at sequence " +
                          std::to_string(st.sequence));
        }
        line.timetable.push_back(offset);
      }
      line.timetable_source = TimetableSource::gtfs_stop_times;
    }
    feed.lines.push_back(std::move(line));
  }
  std::sort(feed.lines.begin(), feed.lines.end(),
            [](const BusLine& a, const BusLine& b) { return a.line_id < b.line_id; });
  return feed;
}

// ---------------------------------------------------------------------------
// Timetables

BusLine estimate_timetable(BusLine line, const StreetGraph& car_graph, double multiplier) {
  if (!(multiplier > 0.0) || !std::isfinite(multiplier)) throw ArgumentError("multiplier must be positive");
  if (line.stops.size() < 2) throw ArgumentError("line " + line.line_id + " has fewer than two stops");
  std::vector<GeoPoint> waypoints;
  waypoints.reserve(line.stops.size());
  for (const auto& s : line.stops) waypoints.push_back(s.location);

  const RoutePlan plan = route(car_graph, waypoints, RouteMetric::time_s);
  line.timetable.assign(1, 0.0);
  double cumulative = 0.0;
  for (std::size_t k = 0; k < plan.legs.size(); ++k) {
    if (!plan.legs[k].reachable()) {
      throw EstimationError("line " + line.line_id + ": no car route from stop " + line.stops[k].stop_id +
                            " to stop " + line.stops[k + 1].stop_id);
    }
    cumulative += plan.legs[k].cost;
    line.timetable.push_back(quantize_timetable_s(multiplier * cumulative));
  }
  line.timetable_source = TimetableSource::estimated;
  return line;
}

EstimationOutcome estimate_missing_timetables(std::vector<BusLine> lines, const StreetGraph& car_graph,
                                              double multiplier) {
  EstimationOutcome out;
  for (auto& line : lines) {
    if (line.has_timetable()) {
      out.lines.push_back(std::move(line));
      continue;
    }
    const std::string line_id = line.line_id;
    try {
      out.lines.push_back(estimate_timetable(std::move(line), car_graph, multiplier));
    } catch (const EstimationError& e) {
      log_warning(std::string(e.what()) + "; line excluded");
      out.excluded.push_back(line_id);
    }
  }
  return out;
}

std::optional<double> bus_travel_time(const BusLine& line, std::size_t board, std::size_t alight) {
  if (!line.has_timetable()) throw ArgumentError("line " + line.line_id + " has no timetable");
  if (board >= line.timetable.size() || alight >= line.timetable.size()) {
    throw ArgumentError("stop index out of range for line " + line.line_id);
  }
  const double time = line.timetable[alight] - line.timetable[board];
  if (time < 0.0) return std::nullopt;
  return time;
}

// ---------------------------------------------------------------------------
// Reachable lines

LineIndex::LineIndex(std::vector<BusLine> lines) : lines_(std::move(lines)) {
  std::sort(lines_.begin(), lines_.end(),
            [](const BusLine& a, const BusLine& b) { return a.line_id < b.line_id; });
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    validate_line(lines_[i]);
    if (!lines_[i].has_timetable()) throw ArgumentError("line " + lines_[i].line_id + " has no timetable");
    if (i > 0 && lines_[i].line_id == lines_[i - 1].line_id) {
      throw ArgumentError("duplicate line id " + lines_[i].line_id);
    }
    std::vector<QuadTreeEntry> entries;
    entries.reserve(lines_[i].stops.size());
    for (std::size_t s = 0; s < lines_[i].stops.size(); ++s) entries.push_back({lines_[i].stops[s].location, s});
    trees_.emplace_back(std::move(entries));
  }
}

std::vector<ReachableLine> reachable_lines(const GeoPoint& p, const LineIndex& index, double walk_radius_m,
                                           QueryStats* stats) {
  if (!(walk_radius_m > 0.0)) throw ArgumentError("walk radius must be positive");
  std::vector<ReachableLine> out;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (auto hit = index.tree(i).nearest_within(p, walk_radius_m, stats)) {
      out.push_back(ReachableLine{i, static_cast<std::size_t>(hit->id), hit->distance_m});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Single-ride planning

Itinerary choose_single_ride(std::span<const ReachableLine> from_p, std::span<const ReachableLine> to_q,
                             const LineIndex& lines, const WalkLegs& walks) {
  if (walks.to_board.size() != from_p.size() || walks.from_alight.size() != to_q.size()) {
    throw ArgumentError("walk legs do not align with reachable lines");
  }
  std::optional<Itinerary> best_ride;
  // Both sides are ordered by line index; walk them in step.
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < from_p.size() && j < to_q.size()) {
    if (from_p[i].line < to_q[j].line) {
      ++i;
      continue;
    }
    if (to_q[j].line < from_p[i].line) {
      ++j;
      continue;
    }
    const BusLine& line = lines.line(from_p[i].line);
    const std::size_t board = from_p[i].stop_index;
    const std::size_t alight = to_q[j].stop_index;
    const auto& walk_to = walks.to_board[i];
    const auto& walk_from = walks.from_alight[j];
    if (alight > board && walk_to && walk_from) {
      if (auto ride = bus_travel_time(line, board, alight)) {
        const double total = *walk_to + *ride + *walk_from;
        if (!best_ride || total < best_ride->total_s) {
          Itinerary it;
          it.kind = ItineraryKind::bus_ride;
          it.reachable = true;
          it.walk_reason = WalkReason::none;
          it.line = from_p[i].line;
          it.line_id = line.line_id;
          it.board_index = board;
          it.alight_index = alight;
          it.board_stop_id = line.stops[board].stop_id;
          it.alight_stop_id = line.stops[alight].stop_id;
          it.walk_to_s = *walk_to;
          it.ride_s = *ride;
          it.walk_from_s = *walk_from;
          it.total_s = total;
          best_ride = std::move(it);
        }
      }
    }
    ++i;
    ++j;
  }

  if (best_ride && (!walks.direct_s || best_ride->total_s < *walks.direct_s)) return *best_ride;

  Itinerary walk;
  walk.kind = ItineraryKind::walk_only;
  walk.walk_reason = best_ride ? WalkReason::faster_than_bus : WalkReason::no_feasible_shared_line;
  walk.reachable = walks.direct_s.has_value();
  if (walk.reachable) {
    walk.walk_to_s = *walks.direct_s;
    walk.total_s = *walks.direct_s;
  }
  return walk;
}

Itinerary plan_single_ride(const GeoPoint& p, const GeoPoint& q, std::span<const ReachableLine> from_p,
                           std::span<const ReachableLine> to_q, const StreetGraph& foot_graph,
                           const LineIndex& lines, DijkstraWorkspace* workspace) {
  DijkstraWorkspace local;
  DijkstraWorkspace& ws = workspace ? *workspace : local;
  const NodeIndex p_node = snap(foot_graph, p).node;
  const NodeIndex q_node = snap(foot_graph, q).node;

  std::vector<NodeIndex> forward_targets{q_node};
  for (const auto& r : from_p) {
    forward_targets.push_back(snap(foot_graph, lines.line(r.line).stops[r.stop_index].location).node);
  }
  std::vector<NodeIndex> backward_targets;
  for (const auto& r : to_q) {
    backward_targets.push_back(snap(foot_graph, lines.line(r.line).stops[r.stop_index].location).node);
  }

  auto as_time = [](const RouteResult& r) -> std::optional<double> {
    return r.reachable() ? std::optional<double>(r.cost) : std::nullopt;
  };
  WalkLegs walks;
  const auto forward = shortest_cost(foot_graph, p_node, forward_targets, SearchOptions{RouteMetric::time_s}, ws);
  walks.direct_s = as_time(forward[0]);
  for (std::size_t k = 1; k < forward.size(); ++k) walks.to_board.push_back(as_time(forward[k]));
  if (!backward_targets.empty()) {
    const auto backward = shortest_cost(foot_graph, q_node, backward_targets,
                                        SearchOptions{RouteMetric::time_s, false, true}, ws);
    for (const auto& r : backward) walks.from_alight.push_back(as_time(r));
  }
  return choose_single_ride(from_p, to_q, lines, walks);
}

// ---------------------------------------------------------------------------
// Cache

void save_transit_cache(const TransitCache& cache, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["format"] = "reach-transit";
  j["version"] = kTransitCacheVersion;
  j["multiplier"] = cache.multiplier;
  j["excluded"] = cache.excluded;
  auto& lines = j["lines"] = nlohmann::ordered_json::array();
  for (const auto& line : cache.lines) {
    nlohmann::ordered_json l;
    l["line_id"] = line.line_id;
    l["route_id"] = line.route_id;
    l["timetable_source"] = to_string(line.timetable_source);
    auto& stops = l["stops"] = nlohmann::ordered_json::array();
    for (const auto& s : line.stops) stops.push_back({s.stop_id, s.location.lat(), s.location.lon()});
    l["timetable"] = line.timetable;
    lines.push_back(std::move(l));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write transit cache " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw IoError("failed writing transit cache " + path.string());
}

TransitCache load_transit_cache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transit cache " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("format", "") != "reach-transit") {
    throw CacheError(path.string() + " is not a transit cache; re-run prepare-transit");
  }
  if (j.value("version", -1) != kTransitCacheVersion) {
    throw CacheError("transit cache " + path.string() + " has format version " +
                     std::to_string(j.value("version", -1)) + ", expected " +
                     std::to_string(kTransitCacheVersion) + "; re-run prepare-transit");
  }
  try {
    TransitCache cache;
    cache.multiplier = j.at("multiplier").get<double>();
    cache.excluded = j.at("excluded").get<std::vector<std::string>>();
    for (const auto& l : j.at("lines")) {
      BusLine line;
      line.line_id = l.at("line_id").get<std::string>();
      line.route_id = l.at("route_id").get<std::string>();
      line.timetable_source = parse_timetable_source(l.at("timetable_source").get<std::string>());
      for (const auto& s : l.at("stops")) {
        line.stops.push_back(LineStop{s.at(0).get<std::string>(), GeoPoint(s.at(1).get<double>(), s.at(2).get<double>())});
      }
      line.timetable = l.at("timetable").get<std::vector<double>>();
      validate_line(line);
      cache.lines.push_back(std::move(line));
    }
    return cache;
  } catch (const nlohmann::json::exception& e) {
    throw CacheError("corrupt transit cache " + path.string() + ": " + e.what());
  } catch (const ArgumentError& e) {
    throw CacheError("corrupt transit cache " + path.string() + ": " + e.what());
  }
}

}  // namespace reach
