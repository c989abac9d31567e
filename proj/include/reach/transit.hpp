#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reach/geodesy.hpp"
#include "reach/quadtree.hpp"
#include "reach/routing.hpp"
#include "reach/street_graph.hpp"

namespace reach {

struct Stop {
  std::string stop_id;
  GeoPoint location;
  std::string name;
};

struct LineStop {
  std::string stop_id;
  GeoPoint location;

  friend bool operator==(const LineStop&, const LineStop&) = default;
};

enum class TimetableSource { none, gtfs_stop_times, estimated };

std::string_view to_string(TimetableSource source);
TimetableSource parse_timetable_source(std::string_view name);

/// One branch of one route in one direction: a directed path of stops with a
/// cumulative timetable (seconds since the first stop).
struct BusLine {
  std::string line_id;
  std::string route_id;
  std::vector<LineStop> stops;
  std::vector<double> timetable;  // empty while source == none
  TimetableSource timetable_source = TimetableSource::none;

  bool has_timetable() const { return timetable_source != TimetableSource::none; }

  friend bool operator==(const BusLine&, const BusLine&) = default;
};

/// Throws ArgumentError unless |stops| >= 2 and, when present, the timetable
/// matches the stop count, starts at 0 and never decreases.
void validate_line(const BusLine& line);

struct TransitFeed {
  std::vector<Stop> stops;
  std::vector<BusLine> lines;  // sorted by line_id
};

/// Reads stops.txt, routes.txt, trips.txt and stop_times.txt. One line per
/// (route, direction, shape) -- or per distinct stop pattern when trips carry
/// no shape_id. The representative trip is the one with the most stops, ties
/// to the smallest trip_id. Its times become the timetable only when every
/// stop has an arrival or departure time.
TransitFeed parse_gtfs(const std::filesystem::path& directory);

/// "HH:MM:SS" with hours possibly >= 24; nullopt when malformed.
std::optional<int> parse_gtfs_time(std::string_view text);

/// Estimated timetables are kept on a 1/1024 s grid. Sums and differences of
/// grid values are exact in double precision, so ride times stay additive.
inline constexpr double kTimetableResolutionS = 1.0 / 1024.0;
inline double quantize_timetable_s(double seconds) {
  return std::round(seconds / kTimetableResolutionS) * kTimetableResolutionS;
}

/// Times the line as a car would drive it through its stops:
/// timetable[k] = quantize(multiplier x cumulative car seconds to stop k).
/// Throws EstimationError if a leg is unreachable by car.
BusLine estimate_timetable(BusLine line, const StreetGraph& car_graph, double multiplier);

struct EstimationOutcome {
  std::vector<BusLine> lines;  // every line now has a timetable
  std::vector<std::string> excluded;  // line ids whose estimation failed
};

/// Estimates every line lacking a GTFS timetable; failures are logged and
/// the line is dropped.
EstimationOutcome estimate_missing_timetables(std::vector<BusLine> lines, const StreetGraph& car_graph,
                                              double multiplier);

/// Ride time between two stops of a line from its cumulative timetable;
/// nullopt when alighting precedes boarding in time (wrong direction).
std::optional<double> bus_travel_time(const BusLine& line, std::size_t board, std::size_t alight);

/// Timetabled lines with one stop quadtree per line. Immutable.
class LineIndex {
 public:
  LineIndex() = default;
  explicit LineIndex(std::vector<BusLine> lines);

  std::size_t size() const { return lines_.size(); }
  const BusLine& line(std::size_t i) const { return lines_[i]; }
  std::span<const BusLine> lines() const { return lines_; }
  const QuadTree& tree(std::size_t i) const { return trees_[i]; }

 private:
  std::vector<BusLine> lines_;
  std::vector<QuadTree> trees_;  // payload id = stop position on the line
};

inline LineIndex index_lines(std::vector<BusLine> lines) { return LineIndex(std::move(lines)); }

struct ReachableLine {
  std::size_t line = 0;        // index into LineIndex
  std::size_t stop_index = 0;  // nearest stop of that line
  double walk_distance_m = 0.0;

  friend bool operator==(const ReachableLine&, const ReachableLine&) = default;
};

/// Lines with some stop strictly closer than `walk_radius_m`, each with its
/// nearest stop; ordered by line_id.
std::vector<ReachableLine> reachable_lines(const GeoPoint& p, const LineIndex& index, double walk_radius_m,
                                           QueryStats* stats = nullptr);

enum class ItineraryKind { bus_ride, walk_only };

enum class WalkReason {
  none,                     // bus_ride
  no_feasible_shared_line,  // fallback: nothing to ride
  faster_than_bus,          // a ride existed but walking was no slower
};

struct Itinerary {
  ItineraryKind kind = ItineraryKind::walk_only;
  bool reachable = false;
  WalkReason walk_reason = WalkReason::no_feasible_shared_line;
  std::size_t line = 0;
  std::string line_id;
  std::size_t board_index = 0;
  std::size_t alight_index = 0;
  std::string board_stop_id;
  std::string alight_stop_id;
  double walk_to_s = 0.0;  // whole walk for walk_only
  double ride_s = 0.0;
  double walk_from_s = 0.0;
  double total_s = 0.0;
};

/// Walking times the planner combines. Entries align with the reachable
/// sets passed alongside; nullopt marks a leg with no foot path.
struct WalkLegs {
  std::optional<double> direct_s;
  std::vector<std::optional<double>> to_board;
  std::vector<std::optional<double>> from_alight;
};

/// Best walk → one bus → walk trip over lines reachable from both ends,
/// boarding and alighting at each end's nearest stop of the line. Rides must
/// move forward along the line (alight after board). Walking straight there
/// competes with the rides and wins ties.
Itinerary choose_single_ride(std::span<const ReachableLine> from_p, std::span<const ReachableLine> to_q,
                             const LineIndex& lines, const WalkLegs& walks);

/// As choose_single_ride, with walking legs timed on the foot graph.
Itinerary plan_single_ride(const GeoPoint& p, const GeoPoint& q, std::span<const ReachableLine> from_p,
                           std::span<const ReachableLine> to_q, const StreetGraph& foot_graph,
                           const LineIndex& lines, DijkstraWorkspace* workspace = nullptr);

inline constexpr int kTransitCacheVersion = 1;

struct TransitCache {
  double multiplier = 1.0;
  std::vector<BusLine> lines;
  std::vector<std::string> excluded;
};

void save_transit_cache(const TransitCache& cache, const std::filesystem::path& path);
TransitCache load_transit_cache(const std::filesystem::path& path);

}  // namespace reach
