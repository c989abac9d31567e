#pragma once

// Synthetic inputs shared by the unit and acceptance suites.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "reach/geodesy.hpp"
#include "reach/nearest.hpp"
#include "reach/osm.hpp"
#include "reach/street_graph.hpp"
#include "reach/transit.hpp"

namespace reach::testing {

// Reference corner for generated fixtures (central Buenos Aires).
inline constexpr double kBaseLat = -34.60;
inline constexpr double kBaseLon = -58.45;

/// Degrees of latitude/longitude per meter at kBaseLat.
double lat_per_m();
double lon_per_m();

GeoPoint offset_m(const GeoPoint& base, double north_m, double east_m);

/// Removes itself on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Builder for small OSM XML documents.
class OsmBuilder {
 public:
  std::int64_t node(const GeoPoint& p);
  void node_with_id(std::int64_t id, const GeoPoint& p);
  void way(std::vector<std::int64_t> refs, std::map<std::string, std::string> tags);
  void relation();
  std::string xml(bool ways_first = false) const;

 private:
  std::vector<std::pair<std::int64_t, GeoPoint>> nodes_;
  std::vector<std::pair<std::vector<std::int64_t>, std::map<std::string, std::string>>> ways_;
  std::int64_t next_id_ = 1;
  int relations_ = 0;
};

/// rows × cols lattice with `spacing_m` between neighbours. Every row and
/// every column is split into two ways at its middle node, so a 5×5 grid has
/// 25 nodes and 20 ways, and every node is an intersection.
std::string grid_osm_xml(int rows, int cols, double spacing_m, const std::string& highway = "residential",
                         std::map<std::string, std::string> extra_tags = {});

/// Node at (row, col) of grid_osm_xml's lattice.
GeoPoint grid_point(int row, int col, double spacing_m);

struct CityOptions {
  int rows = 45;
  int cols = 45;
  double spacing_m = 120.0;
  double jitter_m = 25.0;
  double removal_probability = 0.12;
  double oneway_probability = 0.25;  // residential streets only
  int avenue_every = 6;              // primary/secondary avenues
  std::uint64_t seed = 7;
};

/// Jittered street lattice with avenues, missing blocks and one-way streets.
std::string city_osm_xml(const CityOptions& options);

/// Bounding box of a generated city.
struct Extent {
  GeoPoint south_west;
  double height_m;
  double width_m;
};
Extent city_extent(const CityOptions& options);

GeoPoint random_point(std::mt19937_64& rng, const Extent& extent);

std::vector<Opportunity> random_opportunities(std::mt19937_64& rng, const Extent& extent, std::size_t n);
std::vector<Origin> random_origins(std::mt19937_64& rng, const Extent& extent, std::size_t n);

/// Graph straight from nodes/edges, bypassing OSM.
StreetGraph make_graph(const std::vector<GeoPoint>& nodes, const std::vector<DirectedEdge>& edges,
                       Mode mode = Mode::foot);

/// Random connected-ish graph over `n` nodes scattered in a few km.
StreetGraph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t extra_edges, bool directed);

struct GtfsStopTimeRow {
  std::string trip_id;
  std::string arrival;
  std::string departure;
  std::string stop_id;
  int sequence;
};

struct GtfsFixture {
  std::vector<Stop> stops;
  std::vector<std::string> routes;
  // trip_id, route_id, direction_id, shape_id
  std::vector<std::vector<std::string>> trips;
  std::vector<GtfsStopTimeRow> stop_times;
};

void write_gtfs(const std::filesystem::path& dir, const GtfsFixture& feed);

/// A line with explicit geometry and timetable, for planner tests.
BusLine make_line(const std::string& id, const std::vector<GeoPoint>& stops, const std::vector<double>& timetable);

}  // namespace reach::testing
