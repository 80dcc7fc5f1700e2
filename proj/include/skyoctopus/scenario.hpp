#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skyoctopus/classifier.hpp"
#include "skyoctopus/constellation.hpp"
#include "skyoctopus/ipv4.hpp"
#include "skyoctopus/latency.hpp"
#include "skyoctopus/signaling.hpp"

namespace skyoct {

struct Waypoint {
  double time_s = 0.0;
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
};

// A user moving along piecewise-linear waypoints (a single waypoint means a
// static user).
struct UserSpec {
  std::string id;
  std::vector<Waypoint> waypoints;
  GroundSite registered;  // registered area, used by the standard scheme
  double session_start_s = 0.0;

  GroundSite position_at(double time_s) const;
};

struct ServerSpec {
  GroundSite site;
  Ipv4Address address;
};

struct EpochGrid {
  double start_s = 0.0;
  double step_s = 60.0;
  int count = 1;

  double at(int index) const { return start_s + step_s * index; }
};

struct AnchorPolicy {
  std::vector<std::string> ids;  // explicit anchors
  std::size_t solve_h = 0;       // > 0: pick h stations with `algorithm`
  std::string algorithm = "greedy";

  bool solved() const { return solve_h > 0; }
};

struct SessionBenchSettings {
  std::vector<int> h_values;
  int repetitions = 50;
  double jitter = 0.1;
};

struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> epoch_count;
  std::optional<std::string> constellation;
  std::optional<double> medium_speed_km_s;
  std::optional<double> inflation;
  std::optional<double> fixed_overhead_ms;
};

struct Scenario {
  std::string name;
  std::string source_path;
  std::uint64_t seed = 1;

  std::vector<OrbitalShell> shells;
  std::string constellation;

  std::vector<GroundSite> stations;
  AnchorPolicy anchors;
  std::string ip_anchor;

  std::vector<UserSpec> users;
  std::vector<ServerSpec> servers;
  GeoPrefixMap geo;

  TerrestrialModel terrestrial;
  TimingModel timing = TimingModel::defaults();
  EpochGrid epochs;
  VisibilityPolicy visibility;
  ProbeModel probe;
  double geoip_error_fraction = 0.0;
  bool path_update_enabled = false;
  double path_update_period_s = 10.0;
  std::size_t distribution_h = 0;
  int kmeans_restarts = 10;
  SessionBenchSettings session_bench;
  double max_coverage_gap_fraction = 0.05;

  const OrbitalShell& shell() const;
  const GroundSite& station(const std::string& id) const;
};

// Reads and fully validates a scenario file. Every problem is reported as
// ErrorKind::kLoad with the offending field path.
Scenario load_scenario(const std::string& path, const ScenarioOverrides& overrides = {});

// Seeded stream for one purpose of a scenario (user generation, probes, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace skyoct
