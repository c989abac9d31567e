#pragma once

#include <compare>
#include <numbers>

namespace reach {

/// Mean Earth radius used by every geodesic computation in the library.
inline constexpr double kEarthRadiusM = 6'371'000.0;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// WGS84 coordinate in degrees. Construction rejects out-of-range or
/// non-finite values, so every GeoPoint in the system is valid.
class GeoPoint {
 public:
  GeoPoint() = default;
  GeoPoint(double lat, double lon);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

/// Great-circle distance on a sphere of the given radius (meters).
/// Uses the arcsine form, which stays accurate for near-coincident points.
/// Exactly symmetric in its arguments.
double haversine_m(const GeoPoint& a, const GeoPoint& b, double radius_m = kEarthRadiusM);

}  // namespace reach
