#include "skyoctopus/latency.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "skyoctopus/error.hpp"

namespace skyoct {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using QueueEntry = std::pair<double, SatIndex>;
using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

GroundSite subpoint(const EcefPosition& p) {
  const double r = p.norm();
  GroundSite site;
  site.latitude_deg = rad_to_deg(std::asin(p.z / r));
  site.longitude_deg = normalize_longitude(rad_to_deg(std::atan2(p.y, p.x)));
  return site;
}

PathResult compose(const IntraRoute& intra, double inter_ms, const std::string& anchor) {
  PathResult r;
  r.intra_ms = intra.latency_ms;
  r.inter_ms = inter_ms;
  r.total_ms = r.intra_ms + r.inter_ms;
  r.anchor = anchor;
  r.hops = intra.hops;
  return r;
}

bool better(const PathResult& a, const PathResult& b) {
  if (a.total_ms != b.total_ms) return a.total_ms < b.total_ms;
  return a.anchor < b.anchor;
}

}  // namespace

void TerrestrialModel::validate() const {
  if (!(medium_speed_km_s > 0.0)) fail(ErrorKind::kInput, "terrestrial medium_speed must be > 0");
  if (!(inflation >= 1.0)) fail(ErrorKind::kInput, "terrestrial inflation must be >= 1");
  if (!(fixed_overhead_ms >= 0.0)) fail(ErrorKind::kInput, "terrestrial fixed_overhead must be >= 0");
}

double terrestrial_latency_ms(const GroundSite& anchor, const GroundSite& server, const TerrestrialModel& model) {
  return great_circle_distance_km(anchor, server) / model.medium_speed_km_s * model.inflation * 1000.0 +
         model.fixed_overhead_ms;
}

SatelliteRouter::SatelliteRouter(const ConstellationSnapshot& snap, const IslGraph& isl, SatIndex source)
    : source_(source),
      dist_(static_cast<std::size_t>(snap.size()), kInf),
      pred_(static_cast<std::size_t>(snap.size()), -1) {
  if (isl.node_count() != snap.size()) fail(ErrorKind::kInput, "ISL graph does not match the snapshot");
  if (source < 0 || source >= snap.size()) fail(ErrorKind::kInput, "router source out of range");
  MinQueue queue;
  dist_[static_cast<std::size_t>(source)] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist_[static_cast<std::size_t>(u)]) continue;
    for (const auto& n : isl.neighbors(u)) {
      const double nd = d + link_delay_ms(snap.position(u), snap.position(n.sat));
      auto& slot = dist_[static_cast<std::size_t>(n.sat)];
      if (nd < slot) {
        slot = nd;
        pred_[static_cast<std::size_t>(n.sat)] = u;
        queue.emplace(nd, n.sat);
      }
    }
  }
}

std::vector<SatIndex> SatelliteRouter::path_to(SatIndex sat) const {
  std::vector<SatIndex> path;
  for (SatIndex at = sat; at != -1; at = pred_.at(static_cast<std::size_t>(at))) path.push_back(at);
  std::reverse(path.begin(), path.end());
  return path;
}

UserRouting::UserRouting(const GroundSite& user, const NetworkContext& ctx)
    : user_(user),
      ctx_(ctx),
      uplink_ms_(0.0),
      router_(ctx.snapshot, ctx.isl, access_satellite(user, ctx.snapshot, ctx.visibility)) {
  uplink_ms_ = link_delay_ms(surface_position(user), ctx.snapshot.position(router_.source()));
}

std::optional<IntraRoute> UserRouting::to_site(const GroundSite& site) const {
  return to_site(site, visible_satellites(site, ctx_.snapshot, ctx_.visibility));
}

std::optional<IntraRoute> UserRouting::to_site(const GroundSite& site, std::span<const VisibleSatellite> exits) const {
  const EcefPosition ground = surface_position(site);
  double best = kInf;
  SatIndex exit = -1;
  for (const auto& v : exits) {
    const double cost = router_.distance_ms(v.sat) + link_delay_ms(ctx_.snapshot.position(v.sat), ground);
    if (cost < best || (cost == best && v.sat < exit)) {
      best = cost;
      exit = v.sat;
    }
  }
  if (exit < 0) return std::nullopt;
  return IntraRoute{uplink_ms_ + best, router_.path_to(exit)};
}

IntraRoute intra_network_latency(const GroundSite& user, const GroundSite& anchor, const NetworkContext& ctx) {
  const auto& snap = ctx.snapshot;
  const SatIndex access = access_satellite(user, snap, ctx.visibility);
  const auto exits = visible_satellites(anchor, snap, ctx.visibility);
  if (exits.empty()) fail(ErrorKind::kCoverageGap, "no satellite visible from anchor '" + anchor.id + "'");

  // Exit satellites feed a virtual sink node; the search stops once the
  // sink is settled.
  const SatIndex sink = snap.size();
  std::vector<double> downlink(static_cast<std::size_t>(snap.size()), kInf);
  const EcefPosition ground = surface_position(anchor);
  for (const auto& v : exits) downlink[static_cast<std::size_t>(v.sat)] = link_delay_ms(snap.position(v.sat), ground);

  std::vector<double> dist(static_cast<std::size_t>(sink) + 1, kInf);
  std::vector<SatIndex> pred(static_cast<std::size_t>(sink) + 1, -1);
  MinQueue queue;
  dist[static_cast<std::size_t>(access)] = 0.0;
  queue.emplace(0.0, access);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    if (u == sink) break;
    const double down = downlink[static_cast<std::size_t>(u)];
    if (std::isfinite(down)) {
      const double nd = d + down;
      auto& slot = dist[static_cast<std::size_t>(sink)];
      if (nd < slot || (nd == slot && u < pred[static_cast<std::size_t>(sink)])) {
        slot = nd;
        pred[static_cast<std::size_t>(sink)] = u;
        queue.emplace(nd, sink);
      }
    }
    for (const auto& n : ctx.isl.neighbors(u)) {
      const double nd = d + link_delay_ms(snap.position(u), snap.position(n.sat));
      auto& slot = dist[static_cast<std::size_t>(n.sat)];
      if (nd < slot) {
        slot = nd;
        pred[static_cast<std::size_t>(n.sat)] = u;
        queue.emplace(nd, n.sat);
      }
    }
  }

  IntraRoute route;
  const double uplink = link_delay_ms(surface_position(user), snap.position(access));
  route.latency_ms = uplink + dist[static_cast<std::size_t>(sink)];
  for (SatIndex at = pred[static_cast<std::size_t>(sink)]; at != -1; at = pred[static_cast<std::size_t>(at)]) {
    route.hops.push_back(at);
  }
  std::reverse(route.hops.begin(), route.hops.end());
  return route;
}

PathResult end_to_end_latency(const UserRouting& routing, const GroundSite& anchor, const GroundSite& server,
                              const TerrestrialModel& model) {
  const auto intra = routing.to_site(anchor);
  if (!intra) fail(ErrorKind::kCoverageGap, "no satellite visible from anchor '" + anchor.id + "'");
  return compose(*intra, terrestrial_latency_ms(anchor, server, model), anchor.id);
}

PathResult end_to_end_latency(const GroundSite& user, const GroundSite& anchor, const GroundSite& server,
                              const NetworkContext& ctx) {
  return compose(intra_network_latency(user, anchor, ctx), terrestrial_latency_ms(anchor, server, ctx.terrestrial),
                 anchor.id);
}

PathResult best_of(std::span<const GroundSite> anchors, std::span<const std::optional<IntraRoute>> intra,
                   const GroundSite& server, const TerrestrialModel& model) {
  if (anchors.empty()) fail(ErrorKind::kInput, "best_anchor: empty anchor list");
  if (intra.size() != anchors.size()) fail(ErrorKind::kInput, "best_anchor: intra list does not match anchors");
  std::optional<PathResult> best;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (!intra[i]) continue;
    PathResult candidate = compose(*intra[i], terrestrial_latency_ms(anchors[i], server, model), anchors[i].id);
    if (!best || better(candidate, *best)) best = std::move(candidate);
  }
  if (!best) fail(ErrorKind::kCoverageGap, "no anchor reachable");
  return *best;
}

PathResult best_anchor(const UserRouting& routing, const GroundSite& server, std::span<const GroundSite> anchors,
                       const TerrestrialModel& model) {
  if (anchors.empty()) fail(ErrorKind::kInput, "best_anchor: empty anchor list");
  std::vector<std::optional<IntraRoute>> intra;
  intra.reserve(anchors.size());
  for (const auto& anchor : anchors) intra.push_back(routing.to_site(anchor));
  return best_of(anchors, intra, server, model);
}

PathResult best_anchor(const GroundSite& user, const GroundSite& server, std::span<const GroundSite> anchors,
                       const NetworkContext& ctx) {
  if (anchors.empty()) fail(ErrorKind::kInput, "best_anchor: empty anchor list");
  const UserRouting routing(user, ctx);
  return best_anchor(routing, server, anchors, ctx.terrestrial);
}

std::size_t nearest_site(const GroundSite& where, std::span<const GroundSite> sites) {
  if (sites.empty()) fail(ErrorKind::kInput, "nearest_site: empty site list");
  std::size_t best = 0;
  double best_d = great_circle_distance_km(where, sites[0]);
  for (std::size_t i = 1; i < sites.size(); ++i) {
    const double d = great_circle_distance_km(where, sites[i]);
    if (d < best_d || (d == best_d && sites[i].id < sites[best].id)) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kStandard: return "standard";
    case Scheme::kStandardGs: return "standard-gs";
    case Scheme::kStandardSat: return "standard-sat";
    case Scheme::kSkyOctopus: return "skyoctopus";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : kAllSchemes) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

SatelliteClusters::SatelliteClusters(const OrbitalShell& shell, int clusters) : sats_per_plane_(shell.sats_per_plane) {
  shell.validate();
  if (clusters < 1) fail(ErrorKind::kInput, "satellite clusters: need at least one cluster");
  clusters = std::min(clusters, shell.plane_count);
  plane_cluster_.resize(static_cast<std::size_t>(shell.plane_count));
  for (int c = 0; c < clusters; ++c) {
    const int first = c * shell.plane_count / clusters;
    const int last = (c + 1) * shell.plane_count / clusters;  // exclusive
    for (int p = first; p < last; ++p) plane_cluster_[static_cast<std::size_t>(p)] = c;
    anchor_sats_.push_back(shell.index_of((first + last - 1) / 2, shell.sats_per_plane / 2));
  }
}

int SatelliteClusters::cluster_of(SatIndex sat) const {
  return plane_cluster_.at(static_cast<std::size_t>(sat / sats_per_plane_));
}

PathResult scheme_latency(Scheme scheme, const SchemeInputs& inputs, const UserRouting& routing,
                          const GroundSite& server, const NetworkContext& ctx) {
  const bool cached = !inputs.anchor_intra.empty();
  if (cached && inputs.anchor_intra.size() != inputs.anchors.size()) {
    fail(ErrorKind::kInput, "scheme inputs: anchor_intra does not match anchors");
  }
  auto fixed_anchor = [&](const std::string& id) {
    for (std::size_t i = 0; i < inputs.anchors.size(); ++i) {
      if (inputs.anchors[i].id != id) continue;
      if (!cached) return end_to_end_latency(routing, inputs.anchors[i], server, ctx.terrestrial);
      if (!inputs.anchor_intra[i]) fail(ErrorKind::kCoverageGap, "no satellite visible from anchor '" + id + "'");
      return compose(*inputs.anchor_intra[i], terrestrial_latency_ms(inputs.anchors[i], server, ctx.terrestrial), id);
    }
    fail(ErrorKind::kInput, "scheme anchor '" + id + "' is not deployed");
  };

  switch (scheme) {
    case Scheme::kStandard:
      return fixed_anchor(inputs.standard_anchor);
    case Scheme::kStandardGs:
      return fixed_anchor(inputs.standard_gs_anchor);
    case Scheme::kSkyOctopus:
      if (cached) return best_of(inputs.anchors, inputs.anchor_intra, server, ctx.terrestrial);
      return best_anchor(routing, server, inputs.anchors, ctx.terrestrial);
    case Scheme::kStandardSat: {
      if (inputs.clusters == nullptr) fail(ErrorKind::kInput, "standard-sat requires satellite clusters");
      if (inputs.stations.empty()) fail(ErrorKind::kInput, "standard-sat requires ground stations");
      const SatIndex anchor_sat = inputs.clusters->anchor_satellite(inputs.clusters->cluster_of(routing.access()));
      const EcefPosition& sat_pos = ctx.snapshot.position(anchor_sat);
      const GroundSite below = subpoint(sat_pos);

      // Traffic leaves the satellite anchor towards the station nearest its
      // subpoint, over ISLs when the anchor satellite cannot see it.
      const GroundSite& gs = inputs.stations[nearest_site(below, inputs.stations)];
      const auto exits = visible_satellites(gs, ctx.snapshot, ctx.visibility);
      if (exits.empty()) fail(ErrorKind::kCoverageGap, "no satellite visible from ground station '" + gs.id + "'");
      const SatelliteRouter* from_anchor = nullptr;
      std::optional<SatelliteRouter> local;
      if (inputs.anchor_routers != nullptr) {
        auto it = inputs.anchor_routers->find(anchor_sat);
        if (it == inputs.anchor_routers->end()) {
          it = inputs.anchor_routers->emplace(anchor_sat, SatelliteRouter(ctx.snapshot, ctx.isl, anchor_sat)).first;
        }
        from_anchor = &it->second;
      } else {
        from_anchor = &local.emplace(ctx.snapshot, ctx.isl, anchor_sat);
      }
      const EcefPosition ground = surface_position(gs);
      double tail = kInf;
      SatIndex exit = -1;
      for (const auto& v : exits) {
        const double d = from_anchor->distance_ms(v.sat) + link_delay_ms(ctx.snapshot.position(v.sat), ground);
        if (d < tail || (d == tail && v.sat < exit)) {
          tail = d;
          exit = v.sat;
        }
      }
      IntraRoute intra;
      intra.latency_ms = routing.uplink_ms() + routing.router().distance_ms(anchor_sat) + tail;
      intra.hops = routing.router().path_to(anchor_sat);
      const auto onward = from_anchor->path_to(exit);
      intra.hops.insert(intra.hops.end(), onward.begin() + 1, onward.end());
      return compose(intra, terrestrial_latency_ms(gs, server, ctx.terrestrial), gs.id);
    }
  }
  fail(ErrorKind::kInput, "unknown scheme");
}

PathResult scheme_latency(Scheme scheme, const SchemeInputs& inputs, const GroundSite& user,
                          const GroundSite& server, const NetworkContext& ctx) {
  const UserRouting routing(user, ctx);
  return scheme_latency(scheme, inputs, routing, server, ctx);
}

}  // namespace skyoct
