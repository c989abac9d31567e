#include "reach/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>

#include "reach/csv.hpp"
#include "reach/errors.hpp"

namespace reach {

namespace {

__extension__ using Wide = unsigned __int128;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

double cross(const GeoPoint& o, const GeoPoint& a, const GeoPoint& b) {
  return (a.lon() - o.lon()) * (b.lat() - o.lat()) - (a.lat() - o.lat()) * (b.lon() - o.lon());
}

bool on_segment(const GeoPoint& a, const GeoPoint& b, const GeoPoint& p) {
  return std::min(a.lon(), b.lon()) <= p.lon() && p.lon() <= std::max(a.lon(), b.lon()) &&
         std::min(a.lat(), b.lat()) <= p.lat() && p.lat() <= std::max(a.lat(), b.lat());
}

bool segments_intersect(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c, const GeoPoint& d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  return (d1 == 0 && on_segment(c, d, a)) || (d2 == 0 && on_segment(c, d, b)) ||
         (d3 == 0 && on_segment(a, b, c)) || (d4 == 0 && on_segment(a, b, d));
}

double signed_area(const Ring& ring) {
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    area += ring[i].lon() * ring[i + 1].lat() - ring[i + 1].lon() * ring[i].lat();
  }
  return area / 2.0;
}

void check_ring(const Ring& ring, const std::string& id) {
  if (ring.size() < 4) throw ArgumentError("district " + id + ": ring needs at least four vertices");
  if (ring.front() != ring.back()) throw ArgumentError("district " + id + ": ring is not closed");
  const std::size_t edges = ring.size() - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    for (std::size_t j = i + 1; j < edges; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == edges - 1);
      if (adjacent) continue;
      if (segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1])) {
        throw ArgumentError("district " + id + ": ring self-intersects");
      }
    }
  }
}

void orient(Ring& ring, bool counterclockwise) {
  if ((signed_area(ring) > 0.0) != counterclockwise) std::reverse(ring.begin(), ring.end());
}

// Uniform in [0, 1) from the top 53 bits; identical on every platform.
double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Ring parse_ring(const nlohmann::json& coords, const std::string& id) {
  Ring ring;
  for (const auto& c : coords) {
    if (!c.is_array() || c.size() < 2) throw ArgumentError("district " + id + ": bad coordinate");
    ring.emplace_back(c.at(1).get<double>(), c.at(0).get<double>());
  }
  return ring;
}

PolygonPart parse_polygon(const nlohmann::json& rings, const std::string& id) {
  if (!rings.is_array() || rings.empty()) throw ArgumentError("district " + id + ": polygon without rings");
  PolygonPart part;
  part.outer = parse_ring(rings.at(0), id);
  for (std::size_t i = 1; i < rings.size(); ++i) part.holes.push_back(parse_ring(rings.at(i), id));
  return part;
}

bool on_boundary(const Ring& ring, const GeoPoint& p) {
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    if (cross(ring[i], ring[i + 1], p) == 0.0 && on_segment(ring[i], ring[i + 1], p)) return true;
  }
  return false;
}

}  // namespace

void normalize_district(DistrictPolygon& district) {
  if (district.parts.empty()) throw ArgumentError("district " + district.district_id + " has no polygon");
  for (auto& part : district.parts) {
    check_ring(part.outer, district.district_id);
    orient(part.outer, true);
    for (auto& hole : part.holes) {
      check_ring(hole, district.district_id);
      orient(hole, false);
    }
  }
}

bool strictly_inside(const Ring& ring, const GeoPoint& p) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const GeoPoint& a = ring[i];
    const GeoPoint& b = ring[j];
    if (cross(a, b, p) == 0.0 && on_segment(a, b, p)) return false;
    if ((a.lat() > p.lat()) != (b.lat() > p.lat())) {
      const double lon_at = a.lon() + (p.lat() - a.lat()) * (b.lon() - a.lon()) / (b.lat() - a.lat());
      if (p.lon() < lon_at) inside = !inside;
    }
  }
  return inside;
}

bool strictly_inside(const DistrictPolygon& district, const GeoPoint& p) {
  for (const auto& part : district.parts) {
    if (!strictly_inside(part.outer, p)) continue;
    bool in_hole = false;
    for (const auto& hole : part.holes) {
      // Hole interior and hole boundary are both excluded.
      if (strictly_inside(hole, p) || on_boundary(hole, p)) {
        in_hole = true;
        break;
      }
    }
    if (!in_hole) return true;
  }
  return false;
}

std::vector<DistrictPolygon> load_districts_geojson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open districts file " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || j.value("type", "") != "FeatureCollection" || !j.contains("features")) {
    throw ArgumentError(path.string() + " is not a GeoJSON FeatureCollection");
  }
  std::vector<DistrictPolygon> districts;
  try {
    for (const auto& f : j.at("features")) {
      const auto& props = f.at("properties");
      DistrictPolygon d;
      const auto& id = props.at("district_id");
      d.district_id = id.is_string() ? id.get<std::string>() : id.dump();
      const auto& pop = props.at("population");
      if (!pop.is_number() || pop.get<double>() < 0.0) {
        throw ArgumentError("district " + d.district_id + ": population must be a non-negative number");
      }
      d.population = static_cast<std::uint64_t>(std::llround(pop.get<double>()));
      const auto& geom = f.at("geometry");
      const std::string type = geom.at("type").get<std::string>();
      if (type == "Polygon") {
        d.parts.push_back(parse_polygon(geom.at("coordinates"), d.district_id));
      } else if (type == "MultiPolygon") {
        for (const auto& poly : geom.at("coordinates")) d.parts.push_back(parse_polygon(poly, d.district_id));
      } else {
        throw ArgumentError("district " + d.district_id + ": unsupported geometry " + type);
      }
      normalize_district(d);
      districts.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(path.string() + ": " + e.what());
  }
  std::sort(districts.begin(), districts.end(),
            [](const DistrictPolygon& a, const DistrictPolygon& b) { return a.district_id < b.district_id; });
  for (std::size_t i = 1; i < districts.size(); ++i) {
    if (districts[i].district_id == districts[i - 1].district_id) {
      throw ArgumentError("duplicate district_id " + districts[i].district_id);
    }
  }
  return districts;
}

std::map<std::string, std::size_t> allocate_counts(std::span<const DistrictPolygon> districts,
                                                   std::size_t total_n, std::uint64_t seed) {
  Wide total_pop = 0;
  for (const auto& d : districts) total_pop += d.population;
  if (total_pop == 0) throw ArgumentError("total population is zero");

  struct Share {
    const DistrictPolygon* district;
    std::size_t floor;
    Wide remainder;
    std::uint64_t tie;
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (const auto& d : districts) {
    const Wide quota = static_cast<Wide>(total_n) * d.population;
    const auto floor = static_cast<std::size_t>(quota / total_pop);
    shares.push_back({&d, floor, quota % total_pop, splitmix64(seed ^ fnv1a(d.district_id))});
    assigned += floor;
  }
  std::vector<Share*> order;
  for (auto& s : shares) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const Share* a, const Share* b) {
    if (a->remainder != b->remainder) return a->remainder > b->remainder;
    if (a->tie != b->tie) return a->tie < b->tie;
    return a->district->district_id < b->district->district_id;
  });
  for (std::size_t i = 0; assigned < total_n; ++i, ++assigned) ++order[i]->floor;

  std::map<std::string, std::size_t> counts;
  for (const auto& s : shares) counts[s.district->district_id] = s.floor;
  return counts;
}

std::uint64_t district_seed(std::uint64_t seed, std::string_view district_id) {
  return splitmix64(splitmix64(seed) ^ fnv1a(district_id));
}

std::vector<GeoPoint> sample_in_polygon(const DistrictPolygon& district, std::size_t count, std::uint64_t seed) {
  std::vector<GeoPoint> points;
  if (count == 0) return points;
  if (district.parts.empty()) throw ArgumentError("district " + district.district_id + " has no polygon");
  double min_lat = 90.0, max_lat = -90.0, min_lon = 180.0, max_lon = -180.0;
  for (const auto& part : district.parts) {
    for (const auto& v : part.outer) {
      min_lat = std::min(min_lat, v.lat());
      max_lat = std::max(max_lat, v.lat());
      min_lon = std::min(min_lon, v.lon());
      max_lon = std::max(max_lon, v.lon());
    }
  }
  std::mt19937_64 rng(seed);
  const std::size_t budget = 10'000 * count;
  std::size_t rejected = 0;
  points.reserve(count);
  while (points.size() < count) {
    const double lat = min_lat + unit_double(rng) * (max_lat - min_lat);
    const double lon = min_lon + unit_double(rng) * (max_lon - min_lon);
    const GeoPoint p(lat, lon);
    if (strictly_inside(district, p)) {
      points.push_back(p);
    } else if (++rejected > budget) {
      throw ArgumentError("district " + district.district_id + ": polygon looks degenerate (" +
                          std::to_string(budget) + " samples rejected)");
    }
  }
  return points;
}

std::vector<SampledOrigin> sample_origins(std::span<const DistrictPolygon> districts, std::size_t total_n,
                                          std::uint64_t seed) {
  const auto counts = allocate_counts(districts, total_n, seed);
  std::vector<const DistrictPolygon*> ordered;
  for (const auto& d : districts) ordered.push_back(&d);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->district_id < b->district_id; });
  std::vector<SampledOrigin> out;
  out.reserve(total_n);
  for (const auto* d : ordered) {
    for (const auto& p : sample_in_polygon(*d, counts.at(d->district_id), district_seed(seed, d->district_id))) {
      out.push_back(SampledOrigin{std::to_string(out.size()), p, d->district_id});
    }
  }
  return out;
}

void write_origins_csv(std::span<const SampledOrigin> origins, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "id,lat,lon,district_id\n";
  for (const auto& o : origins) {
    out << csv_field(o.id) << ',' << format_double(o.location.lat()) << ',' << format_double(o.location.lon())
        << ',' << csv_field(o.district_id) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace reach
