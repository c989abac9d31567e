#include "reach/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "reach/errors.hpp"

namespace reach {

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 || lon < -180.0 ||
      lon > 180.0) {
    throw ArgumentError("coordinate out of range: lat=" + std::to_string(lat) +
                        " lon=" + std::to_string(lon));
  }
}

double haversine_m(const GeoPoint& a, const GeoPoint& b, double radius_m) {
  // Canonical argument order makes the result bit-identical under swapping.
  const bool swap = std::pair(b.lat(), b.lon()) < std::pair(a.lat(), a.lon());
  const GeoPoint& p = swap ? b : a;
  const GeoPoint& q = swap ? a : b;

  const double phi1 = deg_to_rad(p.lat());
  const double phi2 = deg_to_rad(q.lat());
  const double sin_dphi = std::sin((phi2 - phi1) / 2.0);
  const double sin_dlambda = std::sin(deg_to_rad(q.lon() - p.lon()) / 2.0);
  const double h = sin_dphi * sin_dphi + std::cos(phi1) * std::cos(phi2) * sin_dlambda * sin_dlambda;
  return 2.0 * radius_m * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace reach
