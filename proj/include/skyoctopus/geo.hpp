#pragma once

#include <string>

namespace skyoct {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kSpeedOfLightKmPerS = 299792.458;
inline constexpr double kEarthRotationRadPerS = 7.2921159e-5;
inline constexpr double kEarthMuKm3PerS2 = 398600.4418;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Earth-centered Earth-fixed coordinates, kilometers.
struct EcefPosition {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  double dot(const EcefPosition& o) const { return x * o.x + y * o.y + z * o.z; }
  EcefPosition operator-(const EcefPosition& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

double distance_km(const EcefPosition& a, const EcefPosition& b);

// A named point on the Earth's surface (ground station, user or server).
struct GroundSite {
  std::string id;
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;

  void validate() const;
};

EcefPosition surface_position(double latitude_deg, double longitude_deg);
inline EcefPosition surface_position(const GroundSite& site) {
  return surface_position(site.latitude_deg, site.longitude_deg);
}

// Haversine distance on the spherical Earth.
double great_circle_distance_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg);
inline double great_circle_distance_km(const GroundSite& a, const GroundSite& b) {
  return great_circle_distance_km(a.latitude_deg, a.longitude_deg, b.latitude_deg, b.longitude_deg);
}

// Wraps a longitude into [-180, 180).
double normalize_longitude(double lon_deg);

}  // namespace skyoct
