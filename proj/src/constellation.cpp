#include "skyoctopus/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skyoctopus/csv.hpp"
#include "skyoctopus/error.hpp"

namespace skyoct {

void OrbitalShell::validate() const {
  if (plane_count < 1 || sats_per_plane < 1) {
    fail(ErrorKind::kInput, "shell '" + name + "': plane_count and sats_per_plane must be >= 1");
  }
  if (!(altitude_km > 0.0) || !std::isfinite(altitude_km)) {
    fail(ErrorKind::kInput, "shell '" + name + "': altitude must be positive");
  }
  if (!(inclination_deg >= 0.0 && inclination_deg <= 180.0)) {
    fail(ErrorKind::kInput, "shell '" + name + "': inclination out of [0, 180]");
  }
  if (!(phase_offset >= 0.0 && phase_offset < 1.0)) {
    fail(ErrorKind::kInput, "shell '" + name + "': phase_offset out of [0, 1)");
  }
}

OrbitalShell starlink_shell() { return {"starlink", 72, 22, 550.0, 53.0, 0.5}; }
OrbitalShell kuiper_shell() { return {"kuiper", 36, 36, 630.0, 51.9, 0.5}; }
OrbitalShell oneweb_shell() { return {"oneweb", 12, 53, 1200.0, 87.9, 0.5}; }

std::vector<OrbitalShell> parse_shells(const nlohmann::json& doc) {
  const nlohmann::json& list = doc.is_object() && doc.contains("shells") ? doc.at("shells") : doc;
  if (!list.is_array()) fail(ErrorKind::kLoad, "shells: expected a list");
  std::vector<OrbitalShell> shells;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& item = list[i];
    const std::string where = "shells[" + std::to_string(i) + "]";
    try {
      OrbitalShell shell;
      shell.name = item.value("name", "shell" + std::to_string(i));
      shell.plane_count = item.at("plane_count").get<int>();
      shell.sats_per_plane = item.at("sats_per_plane").get<int>();
      shell.altitude_km = item.at("altitude_km").get<double>();
      shell.inclination_deg = item.at("inclination_deg").get<double>();
      shell.phase_offset = item.value("phase_offset", 0.5);
      shell.validate();
      shells.push_back(shell);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kLoad, where + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorKind::kLoad, where + ": " + e.what());
    }
  }
  return shells;
}

std::vector<OrbitalShell> load_shells(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kLoad, "cannot open shell file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kLoad, path + ": " + e.what());
  }
  return parse_shells(doc);
}

std::vector<GroundSite> load_ground_stations_csv(const std::string& path) {
  std::vector<GroundSite> sites;
  for (const auto& rec : read_csv_file(path)) {
    if (rec.fields.size() != 3) {
      fail(ErrorKind::kLoad, path + ":" + std::to_string(rec.line) + ": expected id,lat_deg,lon_deg");
    }
    if (rec.fields[0] == "id") continue;
    GroundSite site;
    site.id = rec.fields[0];
    try {
      site.latitude_deg = parse_double(rec.fields[1]);
      site.longitude_deg = parse_double(rec.fields[2]);
      site.validate();
    } catch (const Error& e) {
      fail(ErrorKind::kLoad, path + ":" + std::to_string(rec.line) + ": " + e.what());
    }
    for (const auto& other : sites) {
      if (other.id == site.id) fail(ErrorKind::kLoad, path + ": duplicate station id '" + site.id + "'");
    }
    sites.push_back(std::move(site));
  }
  return sites;
}

void VisibilityPolicy::validate() const {
  if (!(min_elevation_deg >= 0.0 && min_elevation_deg < 90.0)) {
    fail(ErrorKind::kInput, "min_elevation must be in [0, 90)");
  }
}

EcefPosition satellite_position(const OrbitalShell& shell, int plane, int slot, double epoch_s) {
  if (plane < 0 || plane >= shell.plane_count || slot < 0 || slot >= shell.sats_per_plane) {
    fail(ErrorKind::kInput, "satellite (" + std::to_string(plane) + ", " + std::to_string(slot) +
                                ") out of range for shell '" + shell.name + "'");
  }
  const double r = shell.orbit_radius_km();
  const double mean_motion = std::sqrt(kEarthMuKm3PerS2 / (r * r * r));
  const double raan = 2.0 * kPi * plane / shell.plane_count;
  const double arg = 2.0 * kPi * (slot + shell.phase_offset * plane) / shell.sats_per_plane +
                     mean_motion * epoch_s;
  const double inc = deg_to_rad(shell.inclination_deg);

  const double cu = std::cos(arg), su = std::sin(arg);
  const double co = std::cos(raan), so = std::sin(raan);
  const double ci = std::cos(inc), si = std::sin(inc);
  const double xi = r * (cu * co - su * ci * so);
  const double yi = r * (cu * so + su * ci * co);
  const double zi = r * (su * si);

  // Inertial to Earth-fixed: rotate by the Earth's spin since epoch 0.
  const double theta = kEarthRotationRadPerS * epoch_s;
  const double ct = std::cos(theta), st = std::sin(theta);
  return {xi * ct + yi * st, -xi * st + yi * ct, zi};
}

ConstellationSnapshot::ConstellationSnapshot(OrbitalShell shell, double epoch_s)
    : shell_(std::move(shell)), epoch_(epoch_s) {
  shell_.validate();
  positions_.reserve(static_cast<std::size_t>(shell_.size()));
  for (int p = 0; p < shell_.plane_count; ++p) {
    for (int s = 0; s < shell_.sats_per_plane; ++s) {
      positions_.push_back(satellite_position(shell_, p, s, epoch_));
    }
  }
}

double elevation_deg(const EcefPosition& site, const EcefPosition& sat) {
  const EcefPosition d = sat - site;
  const double range = d.norm();
  if (range == 0.0) return 90.0;
  const double s = d.dot(site) / (range * site.norm());
  return rad_to_deg(std::asin(std::clamp(s, -1.0, 1.0)));
}

std::vector<VisibleSatellite> visible_satellites(const GroundSite& site, const ConstellationSnapshot& snap,
                                                 const VisibilityPolicy& policy) {
  const EcefPosition ground = surface_position(site);
  std::vector<VisibleSatellite> out;
  for (SatIndex sat = 0; sat < snap.size(); ++sat) {
    const double el = elevation_deg(ground, snap.position(sat));
    if (el >= policy.min_elevation_deg) out.push_back({sat, el});
  }
  std::sort(out.begin(), out.end(), [](const VisibleSatellite& a, const VisibleSatellite& b) {
    if (a.elevation_deg != b.elevation_deg) return a.elevation_deg > b.elevation_deg;
    return a.sat < b.sat;
  });
  return out;
}

std::vector<VisibleSatellite> visible_satellites(const GroundSite& site, const OrbitalShell& shell,
                                                 double epoch_s, const VisibilityPolicy& policy) {
  return visible_satellites(site, ConstellationSnapshot(shell, epoch_s), policy);
}

SatIndex access_satellite(const GroundSite& site, const ConstellationSnapshot& snap,
                          const VisibilityPolicy& policy) {
  const EcefPosition ground = surface_position(site);
  SatIndex best = -1;
  double best_el = -std::numeric_limits<double>::infinity();
  for (SatIndex sat = 0; sat < snap.size(); ++sat) {
    const double el = elevation_deg(ground, snap.position(sat));
    if (el >= policy.min_elevation_deg && el > best_el) {
      best = sat;
      best_el = el;
    }
  }
  if (best < 0) {
    fail(ErrorKind::kCoverageGap, "no satellite visible from '" + site.id + "'");
  }
  return best;
}

SatIndex access_satellite(const GroundSite& site, const OrbitalShell& shell, double epoch_s,
                          const VisibilityPolicy& policy) {
  return access_satellite(site, ConstellationSnapshot(shell, epoch_s), policy);
}

double link_delay_ms(const EcefPosition& a, const EcefPosition& b) {
  return distance_km(a, b) / kSpeedOfLightKmPerS * 1000.0;
}

const char* to_string(IslRole role) {
  switch (role) {
    case IslRole::kIntraPlaneFront: return "intra-plane-front";
    case IslRole::kIntraPlaneRear: return "intra-plane-rear";
    case IslRole::kInterPlaneLeft: return "inter-plane-left";
    case IslRole::kInterPlaneRight: return "inter-plane-right";
  }
  return "?";
}

IslGraph::IslGraph(const OrbitalShell& shell) {
  shell.validate();
  if (shell.plane_count < 3 || shell.sats_per_plane < 3) {
    fail(ErrorKind::kInput, "shell '" + shell.name + "' is too small for a +Grid torus (need >= 3x3)");
  }
  const int planes = shell.plane_count;
  const int slots = shell.sats_per_plane;
  adjacency_.resize(static_cast<std::size_t>(shell.size()));
  edges_.reserve(static_cast<std::size_t>(shell.size()) * 2);
  for (int p = 0; p < planes; ++p) {
    for (int s = 0; s < slots; ++s) {
      const SatIndex self = shell.index_of(p, s);
      const SatIndex front = shell.index_of(p, (s + 1) % slots);
      const SatIndex rear = shell.index_of(p, (s + slots - 1) % slots);
      const SatIndex right = shell.index_of((p + 1) % planes, s);
      const SatIndex left = shell.index_of((p + planes - 1) % planes, s);
      adjacency_[static_cast<std::size_t>(self)] = {{{front, IslRole::kIntraPlaneFront},
                                                     {rear, IslRole::kIntraPlaneRear},
                                                     {left, IslRole::kInterPlaneLeft},
                                                     {right, IslRole::kInterPlaneRight}}};
      edges_.push_back({self, front, IslRole::kIntraPlaneFront});
      edges_.push_back({self, right, IslRole::kInterPlaneRight});
    }
  }
}

bool IslGraph::is_connected() const {
  if (adjacency_.empty()) return true;
  std::vector<char> seen(adjacency_.size(), 0);
  std::queue<SatIndex> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const SatIndex u = frontier.front();
    frontier.pop();
    for (const auto& n : neighbors(u)) {
      auto& flag = seen[static_cast<std::size_t>(n.sat)];
      if (!flag) {
        flag = 1;
        ++reached;
        frontier.push(n.sat);
      }
    }
  }
  return reached == adjacency_.size();
}

IslGraph build_isl_topology(const OrbitalShell& shell) { return IslGraph(shell); }

}  // namespace skyoct
