#include <gtest/gtest.h>

#include <numeric>

#include "fixtures.hpp"
#include "reach/csv.hpp"
#include "reach/errors.hpp"
#include "reach/sampling.hpp"

using namespace reach;
using namespace reach::testing;

namespace {

Ring square(double lat0, double lon0, double size) {
  return {GeoPoint(lat0, lon0), GeoPoint(lat0, lon0 + size), GeoPoint(lat0 + size, lon0 + size),
          GeoPoint(lat0 + size, lon0), GeoPoint(lat0, lon0)};
}

DistrictPolygon district(std::string id, Ring outer, std::uint64_t population, std::vector<Ring> holes = {}) {
  DistrictPolygon d{std::move(id), {PolygonPart{std::move(outer), std::move(holes)}}, population};
  normalize_district(d);
  return d;
}

// Unit-ish L: the 2x2 square minus its upper-right quadrant.
Ring l_shape() {
  return {GeoPoint(0, 0), GeoPoint(0, 0.02), GeoPoint(0.01, 0.02), GeoPoint(0.01, 0.01),
          GeoPoint(0.02, 0.01), GeoPoint(0.02, 0), GeoPoint(0, 0)};
}

}  // namespace

TEST(Allocate, SymmetricAndLargestRemainder) {
  const std::vector<DistrictPolygon> even{district("a", square(0, 0, 0.01), 100),
                                          district("b", square(1, 1, 0.01), 100)};
  auto c = allocate_counts(even, 10, 1);
  EXPECT_EQ(c.at("a"), 5u);
  EXPECT_EQ(c.at("b"), 5u);
  const std::vector<DistrictPolygon> skewed{district("a", square(0, 0, 0.01), 999),
                                            district("b", square(1, 1, 0.01), 1)};
  c = allocate_counts(skewed, 10, 1);
  EXPECT_EQ(c.at("a"), 10u);
  EXPECT_EQ(c.at("b"), 0u);
  const std::vector<DistrictPolygon> none{district("a", square(0, 0, 0.01), 0)};
  EXPECT_THROW(allocate_counts(none, 10, 1), ArgumentError);
}

TEST(Allocate, SumsExactlyAndStaysWithinOne) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint64_t> pop(0, 250000);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<DistrictPolygon> ds;
    for (int i = 0; i < 15; ++i) ds.push_back(district("d" + std::to_string(i), square(i, 0, 0.01), pop(rng)));
    ds[0].population += 1;
    const std::uint64_t total_pop = std::accumulate(ds.begin(), ds.end(), std::uint64_t{0},
                                                    [](auto s, const auto& d) { return s + d.population; });
    const std::size_t n = 1 + rng() % 10000;
    const auto c = allocate_counts(ds, n, rng());
    std::size_t sum = 0;
    for (const auto& d : ds) {
      const double quota = static_cast<double>(n) * d.population / total_pop;
      EXPECT_LE(std::abs(static_cast<double>(c.at(d.district_id)) - quota), 1.0);
      sum += c.at(d.district_id);
    }
    ASSERT_EQ(sum, n);
  }
}

TEST(Allocate, TieBreaksDependOnlyOnSeed) {
  std::vector<DistrictPolygon> ds;
  for (int i = 0; i < 6; ++i) ds.push_back(district("d" + std::to_string(i), square(i, 0, 0.01), 10));
  const auto a = allocate_counts(ds, 3, 42);
  std::reverse(ds.begin(), ds.end());
  EXPECT_EQ(allocate_counts(ds, 3, 42), a);
}

TEST(Polygon, ValidationAndOrientation) {
  DistrictPolygon open{"x", {PolygonPart{{GeoPoint(0, 0), GeoPoint(0, 1), GeoPoint(1, 1), GeoPoint(1, 0)}, {}}}, 1};
  EXPECT_THROW(normalize_district(open), ArgumentError);
  DistrictPolygon tiny{"x", {PolygonPart{{GeoPoint(0, 0), GeoPoint(0, 1), GeoPoint(0, 0)}, {}}}, 1};
  EXPECT_THROW(normalize_district(tiny), ArgumentError);
  DistrictPolygon bowtie{
      "x", {PolygonPart{{GeoPoint(0, 0), GeoPoint(1, 1), GeoPoint(1, 0), GeoPoint(0, 1), GeoPoint(0, 0)}, {}}}, 1};
  EXPECT_THROW(normalize_district(bowtie), ArgumentError);
  auto cw = square(0, 0, 1);
  std::reverse(cw.begin(), cw.end());
  const auto d = district("x", cw, 1);
  EXPECT_TRUE(strictly_inside(d, GeoPoint(0.5, 0.5)));
}

TEST(Polygon, BoundaryIsOutside) {
  const auto d = district("x", square(0, 0, 1), 1, {square(0.25, 0.25, 0.5)});
  EXPECT_FALSE(strictly_inside(d, GeoPoint(0, 0.5)));
  EXPECT_FALSE(strictly_inside(d, GeoPoint(1, 1)));
  EXPECT_FALSE(strictly_inside(d, GeoPoint(0.5, 0.5)));   // in the hole
  EXPECT_FALSE(strictly_inside(d, GeoPoint(0.25, 0.5)));  // on the hole edge
  EXPECT_TRUE(strictly_inside(d, GeoPoint(0.1, 0.1)));
  EXPECT_FALSE(strictly_inside(d, GeoPoint(2, 2)));
}

TEST(Sample, ContainmentSquareAndLShape) {
  const auto sq = district("sq", square(-34.6, -58.4, 0.01), 1);
  for (const auto& p : sample_in_polygon(sq, 100, 9)) EXPECT_TRUE(strictly_inside(sq, p));
  const auto l = district("l", l_shape(), 1);
  const auto pts = sample_in_polygon(l, 2000, 10);
  ASSERT_EQ(pts.size(), 2000u);
  for (const auto& p : pts) {
    EXPECT_TRUE(strictly_inside(l, p));
    EXPECT_FALSE(p.lat() > 0.01 && p.lon() > 0.01) << "point in the notch";
  }
}

TEST(Sample, DegeneratePolygonFails) {
  DistrictPolygon flat{"flat", {PolygonPart{{GeoPoint(0, 0), GeoPoint(0, 1), GeoPoint(0, 2), GeoPoint(0, 0)}, {}}}, 1};
  EXPECT_THROW(sample_in_polygon(flat, 3, 1), ArgumentError);
}

TEST(Sample, UniformChiSquare) {
  const auto sq = district("sq", square(-34.6, -58.4, 0.04), 1);
  const auto pts = sample_in_polygon(sq, 10000, 2024);
  std::array<int, 16> cells{};
  for (const auto& p : pts) {
    const int r = std::min(3, static_cast<int>((p.lat() + 34.6) / 0.01));
    const int c = std::min(3, static_cast<int>((p.lon() + 58.4) / 0.01));
    ++cells[r * 4 + c];
  }
  double chi2 = 0.0;
  for (int n : cells) chi2 += (n - 625.0) * (n - 625.0) / 625.0;
  EXPECT_LT(chi2, 30.578);  // chi-square(15) at alpha = 0.01
}

TEST(Sample, OriginsDeterministicAndIdsSequential) {
  std::vector<DistrictPolygon> ds{district("b", square(0, 0, 0.01), 30), district("a", l_shape(), 70)};
  const auto one = sample_origins(ds, 100, 77);
  const auto two = sample_origins(ds, 100, 77);
  ASSERT_EQ(one.size(), 100u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].id, std::to_string(i));
    EXPECT_EQ(one[i].location, two[i].location);
  }
  EXPECT_EQ(one.front().district_id, "a");
  EXPECT_EQ(one.back().district_id, "b");
  EXPECT_NE(sample_origins(ds, 100, 78)[0].location, one[0].location);
  EXPECT_NE(district_seed(1, "a"), district_seed(1, "b"));
}

TEST(Districts, LoadGeoJsonAndWriteOrigins) {
  TempDir dir;
  write_file(dir / "d.geojson", R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"district_id":"C2","population":50},
     "geometry":{"type":"MultiPolygon","coordinates":[[[[0,0],[0.01,0],[0.01,0.01],[0,0.01],[0,0]]],
                                                      [[[1,1],[1.01,1],[1.01,1.01],[1,1.01],[1,1]]]]}},
    {"type":"Feature","properties":{"district_id":"C1","population":150},
     "geometry":{"type":"Polygon","coordinates":[[[2,2],[2.01,2],[2.01,2.01],[2,2.01],[2,2]],
                                                 [[2.004,2.004],[2.006,2.004],[2.006,2.006],[2.004,2.006],[2.004,2.004]]]}}
  ]})");
  const auto ds = load_districts_geojson(dir / "d.geojson");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].district_id, "C1");
  EXPECT_EQ(ds[0].parts[0].holes.size(), 1u);
  EXPECT_EQ(ds[1].parts.size(), 2u);
  // GeoJSON is lon,lat.
  EXPECT_EQ(ds[0].parts[0].outer[0].lat(), 2.0);
  const auto origins = sample_origins(ds, 40, 3);
  write_origins_csv(origins, dir / "o.csv");
  CsvReader csv(dir / "o.csv");
  EXPECT_EQ(csv.header(), (std::vector<std::string>{"id", "lat", "lon", "district_id"}));
  std::vector<std::string> row;
  std::size_t n = 0;
  while (csv.next(row)) ++n;
  EXPECT_EQ(n, 40u);
  write_file(dir / "bad.geojson", R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"district_id":"X","population":-5},
     "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]})");
  EXPECT_THROW(load_districts_geojson(dir / "bad.geojson"), ArgumentError);
}
