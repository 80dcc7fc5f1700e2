#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skyoctopus/constellation.hpp"

namespace skyoct {

// Geometric model of the terrestrial leg from an anchor to a server.
struct TerrestrialModel {
  double medium_speed_km_s = 2.0 / 3.0 * kSpeedOfLightKmPerS;
  double inflation = 1.4;
  double fixed_overhead_ms = 1.5;

  void validate() const;
};

double terrestrial_latency_ms(const GroundSite& anchor, const GroundSite& server, const TerrestrialModel& model);

struct IntraRoute {
  double latency_ms = 0.0;
  std::vector<SatIndex> hops;  // access satellite first, exit satellite last
};

struct PathResult {
  double total_ms = 0.0;
  double intra_ms = 0.0;
  double inter_ms = 0.0;
  std::string anchor;
  std::vector<SatIndex> hops;
};

// Everything needed to route over one constellation epoch.
struct NetworkContext {
  const ConstellationSnapshot& snapshot;
  const IslGraph& isl;
  VisibilityPolicy visibility;
  TerrestrialModel terrestrial;
};

// Single-source shortest-delay tree over the ISL graph for one snapshot.
class SatelliteRouter {
 public:
  SatelliteRouter(const ConstellationSnapshot& snap, const IslGraph& isl, SatIndex source);

  SatIndex source() const { return source_; }
  double distance_ms(SatIndex sat) const { return dist_.at(static_cast<std::size_t>(sat)); }
  std::vector<SatIndex> path_to(SatIndex sat) const;

 private:
  SatIndex source_;
  std::vector<double> dist_;
  std::vector<SatIndex> pred_;
};

// Routing state of one user at one epoch: access satellite, uplink and the
// delay tree rooted at the access satellite. Reused across anchors.
class UserRouting {
 public:
  UserRouting(const GroundSite& user, const NetworkContext& ctx);

  const GroundSite& user() const { return user_; }
  SatIndex access() const { return router_.source(); }
  double uplink_ms() const { return uplink_ms_; }
  const SatelliteRouter& router() const { return router_; }

  // L_in to a ground site; nullopt when no satellite sees the site.
  std::optional<IntraRoute> to_site(const GroundSite& site) const;
  // Same, with the site's visible satellites already known.
  std::optional<IntraRoute> to_site(const GroundSite& site, std::span<const VisibleSatellite> exits) const;

 private:
  GroundSite user_;
  const NetworkContext& ctx_;
  double uplink_ms_;
  SatelliteRouter router_;
};

// L_in via a multi-target search: shortest path from the user's access
// satellite to the cheapest exit satellite (ISL delay + downlink), plus the
// uplink.
IntraRoute intra_network_latency(const GroundSite& user, const GroundSite& anchor, const NetworkContext& ctx);

PathResult end_to_end_latency(const GroundSite& user, const GroundSite& anchor, const GroundSite& server,
                              const NetworkContext& ctx);
PathResult end_to_end_latency(const UserRouting& routing, const GroundSite& anchor, const GroundSite& server,
                              const TerrestrialModel& model);

// Inner minimum over anchors whose L_in is already known (entries aligned
// with `anchors`, nullopt for unreachable ones); ties broken by anchor id.
PathResult best_of(std::span<const GroundSite> anchors, std::span<const std::optional<IntraRoute>> intra,
                   const GroundSite& server, const TerrestrialModel& model);

// Inner minimum over anchors; ties broken by anchor id.
PathResult best_anchor(const GroundSite& user, const GroundSite& server, std::span<const GroundSite> anchors,
                       const NetworkContext& ctx);
PathResult best_anchor(const UserRouting& routing, const GroundSite& server, std::span<const GroundSite> anchors,
                       const TerrestrialModel& model);

// Index of the site nearest (great circle) to `where`; ties by id.
std::size_t nearest_site(const GroundSite& where, std::span<const GroundSite> sites);

enum class Scheme { kStandard, kStandardGs, kStandardSat, kSkyOctopus };

inline constexpr Scheme kAllSchemes[] = {Scheme::kStandard, Scheme::kStandardGs, Scheme::kStandardSat,
                                         Scheme::kSkyOctopus};

const char* to_string(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);

// Planes split into contiguous blocks, one anchor satellite per block at the
// middle slot of the block's middle plane.
class SatelliteClusters {
 public:
  SatelliteClusters(const OrbitalShell& shell, int clusters);

  int cluster_count() const { return static_cast<int>(anchor_sats_.size()); }
  int cluster_of(SatIndex sat) const;
  SatIndex anchor_satellite(int cluster) const { return anchor_sats_.at(static_cast<std::size_t>(cluster)); }

 private:
  int sats_per_plane_;
  std::vector<int> plane_cluster_;
  std::vector<SatIndex> anchor_sats_;
};

struct SchemeInputs {
  std::span<const GroundSite> anchors;   // deployed anchor set
  std::span<const GroundSite> stations;  // every ground station (standard-sat downlinks)
  const SatelliteClusters* clusters = nullptr;
  std::string standard_anchor;     // fixed from the registered area
  std::string standard_gs_anchor;  // fixed at session establishment
  // Optional precomputed L_in per deployed anchor, aligned with `anchors`.
  std::span<const std::optional<IntraRoute>> anchor_intra;
  // Optional per-epoch cache of delay trees rooted at standard-sat anchor satellites.
  std::map<SatIndex, SatelliteRouter>* anchor_routers = nullptr;
};

PathResult scheme_latency(Scheme scheme, const SchemeInputs& inputs, const UserRouting& routing,
                          const GroundSite& server, const NetworkContext& ctx);
PathResult scheme_latency(Scheme scheme, const SchemeInputs& inputs, const GroundSite& user,
                          const GroundSite& server, const NetworkContext& ctx);

}  // namespace skyoct
