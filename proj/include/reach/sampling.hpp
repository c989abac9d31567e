#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reach/geodesy.hpp"

namespace reach {

/// Closed ring: first vertex repeated as the last.
using Ring = std::vector<GeoPoint>;

struct PolygonPart {
  Ring outer;               // counterclockwise
  std::vector<Ring> holes;  // clockwise
};

struct DistrictPolygon {
  std::string district_id;
  std::vector<PolygonPart> parts;  // a multipolygon is the union of its parts
  std::uint64_t population = 0;
};

/// Throws ArgumentError for open rings, rings with fewer than four vertices
/// or self-intersecting rings. Fixes ring orientation in place.
void normalize_district(DistrictPolygon& district);

/// Ray-casting test on lon/lat; points on any edge count as outside.
bool strictly_inside(const Ring& ring, const GeoPoint& p);
bool strictly_inside(const DistrictPolygon& district, const GeoPoint& p);

/// GeoJSON FeatureCollection of Polygon/MultiPolygon features with
/// `district_id` and `population` properties.
std::vector<DistrictPolygon> load_districts_geojson(const std::filesystem::path& path);

/// Largest-remainder apportionment of total_n by population. Equal
/// remainders are ordered by a hash of (seed, district_id).
std::map<std::string, std::size_t> allocate_counts(std::span<const DistrictPolygon> districts,
                                                   std::size_t total_n, std::uint64_t seed);

/// Sub-seed for one district, independent of processing order.
std::uint64_t district_seed(std::uint64_t seed, std::string_view district_id);

/// Uniform rejection sampling over the bounding box. Throws ArgumentError
/// after 10,000 × count rejections (degenerate polygon).
std::vector<GeoPoint> sample_in_polygon(const DistrictPolygon& district, std::size_t count, std::uint64_t seed);

struct SampledOrigin {
  std::string id;
  GeoPoint location;
  std::string district_id;
};

/// Allocation then per-district sampling; ids run 0..total_n-1 in
/// district_id order.
std::vector<SampledOrigin> sample_origins(std::span<const DistrictPolygon> districts, std::size_t total_n,
                                          std::uint64_t seed);

/// Columns: id,lat,lon,district_id.
void write_origins_csv(std::span<const SampledOrigin> origins, const std::filesystem::path& path);

}  // namespace reach
