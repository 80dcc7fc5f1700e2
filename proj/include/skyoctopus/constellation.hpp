#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "skyoctopus/geo.hpp"

namespace skyoct {

using SatIndex = int;

// One Walker-delta shell of circular orbits.
struct OrbitalShell {
  std::string name = "shell";
  int plane_count = 1;
  int sats_per_plane = 1;
  double altitude_km = 550.0;
  double inclination_deg = 53.0;
  // Fraction of the in-plane spacing by which each plane is shifted
  // relative to its predecessor.
  double phase_offset = 0.5;

  int size() const { return plane_count * sats_per_plane; }
  double orbit_radius_km() const { return kEarthRadiusKm + altitude_km; }
  SatIndex index_of(int plane, int slot) const { return plane * sats_per_plane + slot; }
  int plane_of(SatIndex sat) const { return sat / sats_per_plane; }
  int slot_of(SatIndex sat) const { return sat % sats_per_plane; }

  void validate() const;
};

OrbitalShell starlink_shell();
OrbitalShell kuiper_shell();
OrbitalShell oneweb_shell();

// Parses a shell list: [{"name", "plane_count", "sats_per_plane",
// "altitude_km", "inclination_deg", "phase_offset"?}, ...] or an object
// holding such a list under "shells".
std::vector<OrbitalShell> parse_shells(const nlohmann::json& doc);
std::vector<OrbitalShell> load_shells(const std::string& path);

// Ground station CSV: id,lat_deg,lon_deg (header optional).
std::vector<GroundSite> load_ground_stations_csv(const std::string& path);

struct VisibilityPolicy {
  double min_elevation_deg = 25.0;

  void validate() const;
};

EcefPosition satellite_position(const OrbitalShell& shell, int plane, int slot, double epoch_s);

// Positions of every satellite of a shell at one epoch.
class ConstellationSnapshot {
 public:
  ConstellationSnapshot(OrbitalShell shell, double epoch_s);

  const OrbitalShell& shell() const { return shell_; }
  double epoch() const { return epoch_; }
  int size() const { return static_cast<int>(positions_.size()); }
  const EcefPosition& position(SatIndex sat) const { return positions_.at(static_cast<std::size_t>(sat)); }
  std::span<const EcefPosition> positions() const { return positions_; }

 private:
  OrbitalShell shell_;
  double epoch_;
  std::vector<EcefPosition> positions_;
};

struct VisibleSatellite {
  SatIndex sat;
  double elevation_deg;
};

double elevation_deg(const EcefPosition& site, const EcefPosition& sat);

// Sorted by descending elevation, ties by ascending index.
std::vector<VisibleSatellite> visible_satellites(const GroundSite& site, const ConstellationSnapshot& snap,
                                                 const VisibilityPolicy& policy);
std::vector<VisibleSatellite> visible_satellites(const GroundSite& site, const OrbitalShell& shell,
                                                 double epoch_s, const VisibilityPolicy& policy);

// Throws ErrorKind::kCoverageGap when nothing is above the mask.
SatIndex access_satellite(const GroundSite& site, const ConstellationSnapshot& snap,
                          const VisibilityPolicy& policy);
SatIndex access_satellite(const GroundSite& site, const OrbitalShell& shell, double epoch_s,
                          const VisibilityPolicy& policy);

// One-way propagation delay at the speed of light, milliseconds.
double link_delay_ms(const EcefPosition& a, const EcefPosition& b);

enum class IslRole : std::uint8_t {
  kIntraPlaneFront,
  kIntraPlaneRear,
  kInterPlaneLeft,
  kInterPlaneRight,
};

const char* to_string(IslRole role);

struct IslEdge {
  SatIndex a;
  SatIndex b;
  // Role of b as seen from a (front or right); the reverse direction holds
  // the mirrored role.
  IslRole role;
};

struct IslNeighbor {
  SatIndex sat;
  IslRole role;
};

// Static +Grid torus: front/rear in-plane, left/right in adjacent planes.
class IslGraph {
 public:
  explicit IslGraph(const OrbitalShell& shell);

  int node_count() const { return static_cast<int>(adjacency_.size()); }
  std::span<const IslEdge> edges() const { return edges_; }
  const std::array<IslNeighbor, 4>& neighbors(SatIndex sat) const { return adjacency_.at(static_cast<std::size_t>(sat)); }
  bool is_connected() const;

 private:
  std::vector<IslEdge> edges_;
  std::vector<std::array<IslNeighbor, 4>> adjacency_;
};

IslGraph build_isl_topology(const OrbitalShell& shell);

}  // namespace skyoct
