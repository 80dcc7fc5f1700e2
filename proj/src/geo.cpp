#include "skyoctopus/geo.hpp"

#include <algorithm>
#include <cmath>

#include "skyoctopus/error.hpp"

namespace skyoct {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kLoad: return "load error";
    case ErrorKind::kCoverageGap: return "coverage gap";
    case ErrorKind::kRuleTable: return "rule-table error";
    case ErrorKind::kIncompleteMeasurement: return "incomplete measurement";
    case ErrorKind::kEstablishmentTimeout: return "establishment timeout";
    case ErrorKind::kTeidMismatch: return "TEID mismatch";
    case ErrorKind::kInstanceTooLarge: return "instance too large";
    case ErrorKind::kIo: return "I/O error";
  }
  return "unknown error";
}

double EcefPosition::norm() const { return std::sqrt(x * x + y * y + z * z); }

double distance_km(const EcefPosition& a, const EcefPosition& b) { return (a - b).norm(); }

void GroundSite::validate() const {
  if (!(latitude_deg >= -90.0 && latitude_deg <= 90.0)) {
    fail(ErrorKind::kInput, "site '" + id + "': latitude out of [-90, 90]");
  }
  if (!(longitude_deg >= -180.0 && longitude_deg < 180.0)) {
    fail(ErrorKind::kInput, "site '" + id + "': longitude out of [-180, 180)");
  }
}

EcefPosition surface_position(double latitude_deg, double longitude_deg) {
  const double lat = deg_to_rad(latitude_deg);
  const double lon = deg_to_rad(longitude_deg);
  return {kEarthRadiusKm * std::cos(lat) * std::cos(lon),
          kEarthRadiusKm * std::cos(lat) * std::sin(lon),
          kEarthRadiusKm * std::sin(lat)};
}

double great_circle_distance_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg) {
  const double phi1 = deg_to_rad(lat1_deg);
  const double phi2 = deg_to_rad(lat2_deg);
  const double dphi = phi2 - phi1;
  const double dlambda = deg_to_rad(lon2_deg - lon1_deg);
  const double s = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(s)));
}

double normalize_longitude(double lon_deg) {
  double wrapped = std::fmod(lon_deg + 180.0, 360.0);
  if (wrapped < 0) wrapped += 360.0;
  return wrapped - 180.0;
}

}  // namespace skyoct
