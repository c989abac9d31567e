#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <algorithm>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace reach::testing {

namespace {
constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;
}

double lat_per_m() { return 1.0 / kMetersPerDegree; }
double lon_per_m() { return 1.0 / (kMetersPerDegree * std::cos(deg_to_rad(kBaseLat))); }

GeoPoint offset_m(const GeoPoint& base, double north_m, double east_m) {
  return GeoPoint(base.lat() + north_m * lat_per_m(), base.lon() + east_m * lon_per_m());
}

TempDir::TempDir() {
  static std::mt19937_64 rng(std::random_device{}());
  path_ = std::filesystem::temp_directory_path() / ("reach-test-" + std::to_string(rng()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::int64_t OsmBuilder::node(const GeoPoint& p) {
  const auto id = next_id_++;
  nodes_.emplace_back(id, p);
  return id;
}

void OsmBuilder::node_with_id(std::int64_t id, const GeoPoint& p) {
  nodes_.emplace_back(id, p);
  next_id_ = std::max(next_id_, id + 1);
}

void OsmBuilder::way(std::vector<std::int64_t> refs, std::map<std::string, std::string> tags) {
  ways_.emplace_back(std::move(refs), std::move(tags));
}

void OsmBuilder::relation() { ++relations_; }

std::string OsmBuilder::xml(bool ways_first) const {
  std::ostringstream nodes;
  nodes << std::setprecision(12);
  for (const auto& [id, p] : nodes_) {
    nodes << "  <node id=\"" << id << "\" lat=\"" << p.lat() << "\" lon=\"" << p.lon() << "\"/>\n";
  }
  std::ostringstream ways;
  std::int64_t way_id = 1000;
  for (const auto& [refs, tags] : ways_) {
    ways << "  <way id=\"" << way_id++ << "\">\n";
    for (auto r : refs) ways << "    <nd ref=\"" << r << "\"/>\n";
    for (const auto& [k, v] : tags) ways << "    <tag k=\"" << k << "\" v=\"" << v << "\"/>\n";
    ways << "  </way>\n";
  }
  std::ostringstream rels;
  for (int i = 0; i < relations_; ++i) {
    rels << "  <relation id=\"" << 9000 + i << "\">\n    <member type=\"way\" ref=\"1000\" role=\"\"/>\n"
         << "    <tag k=\"type\" v=\"route\"/>\n  </relation>\n";
  }
  std::ostringstream doc;
  doc << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\" generator=\"fixture\">\n";
  if (ways_first) {
    doc << ways.str() << nodes.str();
  } else {
    doc << nodes.str() << ways.str();
  }
  doc << rels.str() << "</osm>\n";
  return doc.str();
}

GeoPoint grid_point(int row, int col, double spacing_m) {
  return offset_m(GeoPoint(kBaseLat, kBaseLon), row * spacing_m, col * spacing_m);
}

std::string grid_osm_xml(int rows, int cols, double spacing_m, const std::string& highway,
                         std::map<std::string, std::string> extra_tags) {
  OsmBuilder b;
  std::vector<std::vector<std::int64_t>> ids(rows, std::vector<std::int64_t>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) ids[r][c] = b.node(grid_point(r, c, spacing_m));
  }
  auto tags = extra_tags;
  tags["highway"] = highway;
  for (int r = 0; r < rows; ++r) {
    const int mid = cols / 2;
    std::vector<std::int64_t> left(ids[r].begin(), ids[r].begin() + mid + 1);
    std::vector<std::int64_t> right(ids[r].begin() + mid, ids[r].end());
    b.way(left, tags);
    b.way(right, tags);
  }
  for (int c = 0; c < cols; ++c) {
    const int mid = rows / 2;
    std::vector<std::int64_t> column;
    for (int r = 0; r < rows; ++r) column.push_back(ids[r][c]);
    b.way(std::vector<std::int64_t>(column.begin(), column.begin() + mid + 1), tags);
    b.way(std::vector<std::int64_t>(column.begin() + mid, column.end()), tags);
  }
  return b.xml();
}

std::string city_osm_xml(const CityOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> jitter(-o.jitter_m, o.jitter_m);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  OsmBuilder b;
  const GeoPoint base(kBaseLat, kBaseLon);
  std::vector<std::vector<std::int64_t>> ids(o.rows, std::vector<std::int64_t>(o.cols));
  for (int r = 0; r < o.rows; ++r) {
    for (int c = 0; c < o.cols; ++c) {
      ids[r][c] = b.node(offset_m(base, r * o.spacing_m + jitter(rng), c * o.spacing_m + jitter(rng)));
    }
  }

  // Each street is a row or column; removed blocks split it into several ways.
  auto emit_street = [&](const std::vector<std::int64_t>& nodes, bool avenue, bool major) {
    std::map<std::string, std::string> tags;
    if (avenue) {
      tags["highway"] = major ? "primary" : "secondary";
    } else {
      tags["highway"] = "residential";
      if (unit(rng) < o.oneway_probability) tags["oneway"] = unit(rng) < 0.5 ? "yes" : "-1";
    }
    std::vector<std::int64_t> current{nodes[0]};
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      const bool removed = !avenue && unit(rng) < o.removal_probability;
      if (removed) {
        if (current.size() >= 2) b.way(current, tags);
        current.assign(1, nodes[i]);
      } else {
        current.push_back(nodes[i]);
      }
    }
    if (current.size() >= 2) b.way(current, tags);
  };
  for (int r = 0; r < o.rows; ++r) {
    const bool avenue = o.avenue_every > 0 && r % o.avenue_every == 0;
    emit_street(ids[r], avenue, avenue && (r / o.avenue_every) % 2 == 0);
  }
  for (int c = 0; c < o.cols; ++c) {
    std::vector<std::int64_t> column;
    for (int r = 0; r < o.rows; ++r) column.push_back(ids[r][c]);
    const bool avenue = o.avenue_every > 0 && c % o.avenue_every == 0;
    emit_street(column, avenue, avenue && (c / o.avenue_every) % 2 == 1);
  }
  // Footpaths cutting a few blocks diagonally.
  for (int k = 0; k < o.rows * o.cols / 200; ++k) {
    std::uniform_int_distribution<int> rr(0, o.rows - 2), cc(0, o.cols - 2);
    const int r = rr(rng), c = cc(rng);
    b.way({ids[r][c], ids[r + 1][c + 1]}, {{"highway", "footway"}});
  }
  return b.xml();
}

Extent city_extent(const CityOptions& o) {
  return Extent{GeoPoint(kBaseLat, kBaseLon), (o.rows - 1) * o.spacing_m, (o.cols - 1) * o.spacing_m};
}

GeoPoint random_point(std::mt19937_64& rng, const Extent& e) {
  std::uniform_real_distribution<double> north(0.0, e.height_m), east(0.0, e.width_m);
  const double n = north(rng);
  return offset_m(e.south_west, n, east(rng));
}

std::vector<Opportunity> random_opportunities(std::mt19937_64& rng, const Extent& extent, std::size_t n) {
  std::vector<Opportunity> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream id;
    id << "d" << std::setw(6) << std::setfill('0') << i;
    out.push_back(Opportunity{id.str(), random_point(rng, extent), {}});
  }
  return out;
}

std::vector<Origin> random_origins(std::mt19937_64& rng, const Extent& extent, std::size_t n) {
  std::vector<Origin> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Origin{"o" + std::to_string(i), random_point(rng, extent)});
  return out;
}

StreetGraph make_graph(const std::vector<GeoPoint>& nodes, const std::vector<DirectedEdge>& edges, Mode mode) {
  std::vector<std::int64_t> ids(nodes.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int64_t>(i + 1);
  return StreetGraph(ModeProfile::defaults(mode), nodes, ids, edges);
}

StreetGraph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t extra_edges, bool directed) {
  std::uniform_real_distribution<double> pos(0.0, 3000.0);
  std::vector<GeoPoint> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(offset_m(GeoPoint(kBaseLat, kBaseLon), pos(rng), pos(rng)));
  std::vector<DirectedEdge> edges;
  std::uniform_real_distribution<double> slowdown(1.0, 3.0);
  auto add = [&](NodeIndex a, NodeIndex b, bool both) {
    const double length = std::max(1.0, haversine_m(nodes[a], nodes[b]) * slowdown(rng));
    const double time = length / (5.0 / 3.6) * slowdown(rng);
    edges.push_back({a, Edge{b, length, time}});
    if (both) edges.push_back({b, Edge{a, length, time}});
  };
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t i = 1; i < n; ++i) add(static_cast<NodeIndex>(i), static_cast<NodeIndex>(pick(rng) % i), !directed);
  for (std::size_t k = 0; k < extra_edges; ++k) {
    const auto a = pick(rng), b = pick(rng);
    if (a != b) add(static_cast<NodeIndex>(a), static_cast<NodeIndex>(b), !directed);
  }
  return make_graph(nodes, edges);
}

void write_gtfs(const std::filesystem::path& dir, const GtfsFixture& feed) {
  std::filesystem::create_directories(dir);
  std::ostringstream stops;
  stops << std::setprecision(12) << "stop_id,stop_name,stop_lat,stop_lon\n";
  for (const auto& s : feed.stops) {
    stops << s.stop_id << ",\"" << s.name << "\"," << s.location.lat() << ',' << s.location.lon() << '\n';
  }
  write_file(dir / "stops.txt", stops.str());
  std::ostringstream routes;
  routes << "route_id,route_short_name,route_type\n";
  for (const auto& r : feed.routes) routes << r << ',' << r << ",3\n";
  write_file(dir / "routes.txt", routes.str());
  std::ostringstream trips;
  trips << "route_id,service_id,trip_id,direction_id,shape_id\n";
  for (const auto& t : feed.trips) trips << t[1] << ",weekday," << t[0] << ',' << t[2] << ',' << t[3] << '\n';
  write_file(dir / "trips.txt", trips.str());
  std::ostringstream st;
  st << "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n";
  for (const auto& r : feed.stop_times) {
    st << r.trip_id << ',' << r.arrival << ',' << r.departure << ',' << r.stop_id << ',' << r.sequence << '\n';
  }
  write_file(dir / "stop_times.txt", st.str());
}

BusLine make_line(const std::string& id, const std::vector<GeoPoint>& stops, const std::vector<double>& timetable) {
  BusLine line;
  line.line_id = id;
  line.route_id = id;
  for (std::size_t i = 0; i < stops.size(); ++i) line.stops.push_back(LineStop{id + "-s" + std::to_string(i), stops[i]});
  line.timetable = timetable;
  line.timetable_source = TimetableSource::gtfs_stop_times;
  return line;
}

}  // namespace reach::testing
