#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reach/geodesy.hpp"
#include "reach/quadtree.hpp"
#include "reach/routing.hpp"
#include "reach/street_graph.hpp"
#include "reach/transit.hpp"

namespace reach {

struct Opportunity {
  std::string dest_id;
  GeoPoint location;
  std::map<std::string, std::string> metadata;
};

/// Destinations ordered by dest_id, with a geodesic quadtree whose payload is
/// the position in that order (so id ties and index ties agree).
class OpportunitySet {
 public:
  OpportunitySet() = default;
  explicit OpportunitySet(std::vector<Opportunity> entries);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Opportunity& at(std::size_t i) const { return entries_[i]; }
  std::span<const Opportunity> entries() const { return entries_; }
  const QuadTree& index() const { return index_; }

 private:
  std::vector<Opportunity> entries_;
  QuadTree index_;
};

/// Destinations CSV: `dest_id` (or `id`), `lat`, `lon`; other columns become
/// metadata.
OpportunitySet load_opportunities_csv(const std::filesystem::path& path);

struct Origin {
  std::string id;
  GeoPoint location;
};

/// Origins CSV: `id`, `lat`, `lon` (extra columns ignored).
std::vector<Origin> load_origins_csv(const std::filesystem::path& path);

enum class TravelMode { foot, bike, car, public_transport };

std::string_view to_string(TravelMode mode);
TravelMode parse_travel_mode(std::string_view name);
inline bool is_street_mode(TravelMode m) { return m != TravelMode::public_transport; }
Mode street_mode(TravelMode m);

struct NearestConfig {
  std::size_t k = 10;
  TravelMode mode = TravelMode::foot;
  RouteMetric metric = RouteMetric::time_s;
  double walk_radius_m = 500.0;  // public transport only

  /// Throws ArgumentError on K = 0, a non-positive radius, or a distance
  /// metric for public transport.
  void validate() const;
};

struct Candidate {
  std::size_t index = 0;  // into OpportunitySet
  double distance_m = 0.0;
};

/// The k destinations geodesically closest to p, ascending, ties by dest_id.
std::vector<Candidate> knn_geodesic(const GeoPoint& p, const OpportunitySet& opportunities, std::size_t k);

enum class ResultStatus { ok, unreachable };

std::string_view to_string(ResultStatus status);
ResultStatus parse_result_status(std::string_view name);

struct AccessibilityResult {
  std::string origin_id;
  GeoPoint origin;
  TravelMode mode = TravelMode::foot;
  RouteMetric metric = RouteMetric::time_s;
  ResultStatus status = ResultStatus::unreachable;
  std::string dest_id;
  double value = 0.0;          // in the configured metric
  // NaN when unknown (distance-metric rows read back from CSV).
  double travel_time_s = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> distance_m;   // street modes
  std::optional<Itinerary> itinerary;  // public transport
  double snap_distance_m = 0.0;
};

struct QueryCounters {
  std::size_t candidates_evaluated = 0;  // exact routing evaluations
  std::size_t nodes_settled = 0;
};

/// Read-only per-mode query engine; safe to share across threads as long as
/// each thread passes its own workspace.
class NearestEngine {
 public:
  virtual ~NearestEngine() = default;
  virtual AccessibilityResult query(const Origin& origin, const NearestConfig& config,
                                    DijkstraWorkspace& workspace, QueryCounters* counters) const = 0;
  virtual std::size_t graph_size() const = 0;
};

/// K geodesic candidates, then one one-to-many search over the street graph
/// from the origin's snapped node; the cheapest reachable candidate wins.
class NetworkNearest final : public NearestEngine {
 public:
  NetworkNearest(const StreetGraph& graph, const OpportunitySet& opportunities);

  AccessibilityResult query(const Origin& origin, const NearestConfig& config, DijkstraWorkspace& workspace,
                            QueryCounters* counters) const override;
  std::size_t graph_size() const override { return graph_.node_count(); }

 private:
  const StreetGraph& graph_;
  const OpportunitySet& opportunities_;
  std::vector<NodeIndex> dest_nodes_;
};

/// K geodesic candidates, each planned as a single bus ride or a walk; the
/// fastest wins. Destination-side data (reachable lines, walks from their
/// nearest stops) is computed once at construction.
class TransitNearest final : public NearestEngine {
 public:
  TransitNearest(const StreetGraph& foot_graph, const LineIndex& lines, const OpportunitySet& opportunities,
                 double walk_radius_m);

  AccessibilityResult query(const Origin& origin, const NearestConfig& config, DijkstraWorkspace& workspace,
                            QueryCounters* counters) const override;
  std::size_t graph_size() const override { return foot_.node_count(); }

  double walk_radius_m() const { return walk_radius_m_; }
  std::span<const ReachableLine> destination_lines(std::size_t dest) const { return dest_lines_[dest]; }

 private:
  const StreetGraph& foot_;
  const LineIndex& lines_;
  const OpportunitySet& opportunities_;
  double walk_radius_m_;
  std::vector<NodeIndex> dest_nodes_;
  std::vector<std::vector<ReachableLine>> dest_lines_;
  std::vector<std::vector<std::optional<double>>> dest_walks_;  // aligned with dest_lines_
};

AccessibilityResult nearest_by_network(const GeoPoint& p, const OpportunitySet& opportunities,
                                       const NearestConfig& config, const StreetGraph& graph);

AccessibilityResult nearest_by_transit(const GeoPoint& p, const OpportunitySet& opportunities,
                                       const NearestConfig& config, const StreetGraph& foot_graph,
                                       const LineIndex& lines);

/// One result per origin in input order, for any worker count. A failing
/// origin is recorded as unreachable and logged; the batch continues.
std::vector<AccessibilityResult> batch_compute(std::span<const Origin> origins, const NearestEngine& engine,
                                               const NearestConfig& config, unsigned workers = 1,
                                               QueryCounters* counters = nullptr);

}  // namespace reach
