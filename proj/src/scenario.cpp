#include "skyoctopus/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "skyoctopus/error.hpp"

namespace skyoct {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kUserStream = 1;
constexpr std::uint64_t kServerStream = 2;
constexpr std::uint64_t kGeoStream = 3;
constexpr double kKmPerDegree = kPi * kEarthRadiusKm / 180.0;

[[noreturn]] void load_error(const std::string& field, const std::string& what) {
  fail(ErrorKind::kLoad, field + ": " + what);
}

template <typename T>
T get(const json& node, const std::string& key, const std::string& path) {
  if (!node.contains(key)) load_error(path + "." + key, "missing");
  try {
    return node.at(key).get<T>();
  } catch (const json::exception&) {
    load_error(path + "." + key, "wrong type");
  }
}

template <typename T>
T get_or(const json& node, const std::string& key, const std::string& path, T fallback) {
  if (!node.is_object() || !node.contains(key)) return fallback;
  return get<T>(node, key, path);
}

GroundSite parse_site(const json& node, const std::string& path) {
  GroundSite site{get<std::string>(node, "id", path), get<double>(node, "lat", path), get<double>(node, "lon", path)};
  try {
    site.validate();
  } catch (const Error& e) {
    load_error(path, e.what());
  }
  return site;
}

fs::path resolve(const fs::path& base, const std::string& file) {
  const fs::path p(file);
  return p.is_absolute() ? p : base / p;
}

double reflect(double x, double lo, double hi) {
  const double width = hi - lo;
  if (width <= 0.0) return lo;
  double y = std::fmod(x - lo, 2.0 * width);
  if (y < 0.0) y += 2.0 * width;
  if (y > width) y = 2.0 * width - y;
  return lo + y;
}

std::vector<UserSpec> generate_users(const json& gen, const Scenario& sc, const std::string& path) {
  const int count = get<int>(gen, "count", path);
  if (count < 1) load_error(path + ".count", "must be >= 1");
  const double lat_min = get<double>(gen, "lat_min", path), lat_max = get<double>(gen, "lat_max", path);
  const double lon_min = get<double>(gen, "lon_min", path), lon_max = get<double>(gen, "lon_max", path);
  const double v_min = get_or<double>(gen, "speed_kmh_min", path, 0.0);
  const double v_max = get_or<double>(gen, "speed_kmh_max", path, 0.0);
  if (!(lat_min <= lat_max && lat_min >= -90.0 && lat_max <= 90.0)) load_error(path, "bad latitude range");
  if (!(lon_min <= lon_max && lon_min >= -180.0 && lon_max < 180.0)) load_error(path, "bad longitude range");
  if (!(v_min >= 0.0 && v_min <= v_max)) load_error(path, "bad speed range");
  std::vector<GroundSite> homes;
  if (gen.contains("registration_sites")) {
    const auto& list = gen.at("registration_sites");
    for (std::size_t i = 0; i < list.size(); ++i) {
      homes.push_back(parse_site(list[i], path + ".registration_sites[" + std::to_string(i) + "]"));
    }
  }

  std::mt19937_64 rng(derive_seed(sc.seed, kUserStream));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<UserSpec> users;
  for (int u = 0; u < count; ++u) {
    UserSpec user;
    user.id = "u" + std::to_string(u);
    const double lat0 = lat_min + (lat_max - lat_min) * unit(rng);
    const double lon0 = lon_min + (lon_max - lon_min) * unit(rng);
    const double heading = 2.0 * kPi * unit(rng);
    const double speed_km_s = (v_min + (v_max - v_min) * unit(rng)) / 3600.0;
    const double home_pick = unit(rng);
    const double cos_lat = std::max(0.1, std::cos(deg_to_rad(lat0)));
    for (int e = 0; e < sc.epochs.count; ++e) {
      const double t = sc.epochs.at(e);
      const double travelled = speed_km_s * (t - sc.epochs.start_s);
      const double lat = reflect(lat0 + travelled * std::cos(heading) / kKmPerDegree, lat_min, lat_max);
      const double lon = reflect(lon0 + travelled * std::sin(heading) / (kKmPerDegree * cos_lat), lon_min, lon_max);
      user.waypoints.push_back({t, lat, lon});
    }
    if (homes.empty()) {
      user.registered = {user.id + "-home", lat0, lon0};
    } else {
      const auto idx = std::min(homes.size() - 1, static_cast<std::size_t>(home_pick * static_cast<double>(homes.size())));
      user.registered = homes[idx];
    }
    user.session_start_s = sc.epochs.start_s;
    users.push_back(std::move(user));
  }
  return users;
}

UserSpec parse_user(const json& node, const Scenario& sc, const std::string& path) {
  UserSpec user;
  user.id = get<std::string>(node, "id", path);
  if (node.contains("waypoints")) {
    const auto& list = node.at("waypoints");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string wp = path + ".waypoints[" + std::to_string(i) + "]";
      Waypoint w{get<double>(list[i], "t", wp), get<double>(list[i], "lat", wp), get<double>(list[i], "lon", wp)};
      if (!user.waypoints.empty() && w.time_s <= user.waypoints.back().time_s) load_error(wp, "times must increase");
      GroundSite check{user.id, w.latitude_deg, w.longitude_deg};
      try {
        check.validate();
      } catch (const Error& e) {
        load_error(wp, e.what());
      }
      user.waypoints.push_back(w);
    }
    if (user.waypoints.empty()) load_error(path + ".waypoints", "empty");
  } else {
    const GroundSite at = parse_site(node, path);
    user.waypoints.push_back({sc.epochs.start_s, at.latitude_deg, at.longitude_deg});
  }
  const auto& first = user.waypoints.front();
  user.registered = node.contains("registered")
                        ? GroundSite{user.id + "-home", get<double>(node.at("registered"), "lat", path + ".registered"),
                                     get<double>(node.at("registered"), "lon", path + ".registered")}
                        : GroundSite{user.id + "-home", first.latitude_deg, first.longitude_deg};
  user.session_start_s = get_or<double>(node, "session_start_s", path, sc.epochs.start_s);
  return user;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

GroundSite UserSpec::position_at(double time_s) const {
  if (waypoints.empty()) fail(ErrorKind::kInput, "user '" + id + "' has no waypoints");
  const Waypoint* a = &waypoints.front();
  const Waypoint* b = a;
  if (time_s <= waypoints.front().time_s) {
    b = a;
  } else if (time_s >= waypoints.back().time_s) {
    a = b = &waypoints.back();
  } else {
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      if (waypoints[i].time_s >= time_s) {
        a = &waypoints[i - 1];
        b = &waypoints[i];
        break;
      }
    }
  }
  const double span = b->time_s - a->time_s;
  const double f = span > 0.0 ? (time_s - a->time_s) / span : 0.0;
  return {id, a->latitude_deg + f * (b->latitude_deg - a->latitude_deg),
          a->longitude_deg + f * (b->longitude_deg - a->longitude_deg)};
}

const OrbitalShell& Scenario::shell() const {
  for (const auto& s : shells) {
    if (s.name == constellation) return s;
  }
  fail(ErrorKind::kInput, "unknown constellation '" + constellation + "'");
}

const GroundSite& Scenario::station(const std::string& id) const {
  for (const auto& s : stations) {
    if (s.id == id) return s;
  }
  fail(ErrorKind::kInput, "unknown ground station '" + id + "'");
}

Scenario load_scenario(const std::string& path, const ScenarioOverrides& overrides) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kLoad, "cannot open scenario '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorKind::kLoad, path + ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::kLoad, path + ": top level must be an object");
  const fs::path base = fs::path(path).parent_path();

  Scenario sc;
  sc.source_path = path;
  sc.name = get_or<std::string>(doc, "name", "scenario", fs::path(path).stem().string());
  sc.seed = overrides.seed.value_or(get_or<std::uint64_t>(doc, "seed", "scenario", 1));

  // Constellation shells.
  try {
    if (doc.contains("constellations")) {
      sc.shells = parse_shells(doc.at("constellations"));
    } else if (doc.contains("shells_file")) {
      sc.shells = load_shells(resolve(base, get<std::string>(doc, "shells_file", "scenario")).string());
    } else {
      sc.shells = {starlink_shell(), kuiper_shell(), oneweb_shell()};
    }
  } catch (const Error& e) {
    load_error("scenario.constellations", e.what());
  }
  if (sc.shells.empty()) load_error("scenario.constellations", "no shells");
  sc.constellation = overrides.constellation.value_or(get_or<std::string>(doc, "constellation", "scenario", sc.shells.front().name));
  if (std::none_of(sc.shells.begin(), sc.shells.end(), [&](const OrbitalShell& s) { return s.name == sc.constellation; })) {
    load_error("scenario.constellation", "unknown constellation '" + sc.constellation + "'");
  }

  // Epochs come first: generated users are sampled on the epoch grid.
  if (doc.contains("epochs")) {
    const auto& e = doc.at("epochs");
    sc.epochs.start_s = get_or<double>(e, "start_s", "scenario.epochs", 0.0);
    sc.epochs.step_s = get_or<double>(e, "step_s", "scenario.epochs", 60.0);
    sc.epochs.count = get_or<int>(e, "count", "scenario.epochs", 1);
  }
  if (overrides.epoch_count) sc.epochs.count = *overrides.epoch_count;
  if (sc.epochs.count < 1) load_error("scenario.epochs.count", "must be >= 1");
  if (!(sc.epochs.step_s > 0.0)) load_error("scenario.epochs.step_s", "must be > 0");

  // Ground stations.
  if (!doc.contains("ground_stations")) load_error("scenario.ground_stations", "missing");
  const auto& gs = doc.at("ground_stations");
  if (gs.is_string()) {
    try {
      sc.stations = load_ground_stations_csv(resolve(base, gs.get<std::string>()).string());
    } catch (const Error& e) {
      load_error("scenario.ground_stations", e.what());
    }
  } else if (gs.is_array()) {
    for (std::size_t i = 0; i < gs.size(); ++i) {
      auto site = parse_site(gs[i], "scenario.ground_stations[" + std::to_string(i) + "]");
      for (const auto& other : sc.stations) {
        if (other.id == site.id) load_error("scenario.ground_stations[" + std::to_string(i) + "]", "duplicate id '" + site.id + "'");
      }
      sc.stations.push_back(std::move(site));
    }
  } else {
    load_error("scenario.ground_stations", "expected a CSV path or a list");
  }
  if (sc.stations.empty()) load_error("scenario.ground_stations", "no stations");

  // Anchors.
  if (doc.contains("anchors")) {
    const auto& a = doc.at("anchors");
    if (a.is_array()) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string field = "scenario.anchors[" + std::to_string(i) + "]";
        if (!a[i].is_string()) load_error(field, "expected a station id");
        const auto id = a[i].get<std::string>();
        if (std::none_of(sc.stations.begin(), sc.stations.end(), [&](const GroundSite& s) { return s.id == id; })) {
          load_error(field, "anchor '" + id + "' is not a ground station");
        }
        if (std::find(sc.anchors.ids.begin(), sc.anchors.ids.end(), id) != sc.anchors.ids.end()) {
          load_error(field, "duplicate anchor '" + id + "'");
        }
        sc.anchors.ids.push_back(id);
      }
      if (sc.anchors.ids.empty()) load_error("scenario.anchors", "empty");
    } else if (a.is_object()) {
      const auto h = get<long long>(a, "solve", "scenario.anchors");
      if (h < 1 || static_cast<std::size_t>(h) > sc.stations.size()) {
        load_error("scenario.anchors.solve", "h must be in [1, station count]");
      }
      sc.anchors.solve_h = static_cast<std::size_t>(h);
      sc.anchors.algorithm = get_or<std::string>(a, "algorithm", "scenario.anchors", "greedy");
      if (sc.anchors.algorithm != "greedy" && sc.anchors.algorithm != "kmeans" && sc.anchors.algorithm != "random") {
        load_error("scenario.anchors.algorithm", "unknown algorithm '" + sc.anchors.algorithm + "'");
      }
    } else {
      load_error("scenario.anchors", "expected a list of ids or {\"solve\": h}");
    }
  } else {
    for (const auto& s : sc.stations) sc.anchors.ids.push_back(s.id);
  }
  sc.ip_anchor = get_or<std::string>(doc, "ip_anchor", "scenario", "");
  if (!sc.ip_anchor.empty() && !sc.anchors.solved() &&
      std::find(sc.anchors.ids.begin(), sc.anchors.ids.end(), sc.ip_anchor) == sc.anchors.ids.end()) {
    load_error("scenario.ip_anchor", "anchor '" + sc.ip_anchor + "' is not deployed");
  }

  // Users.
  if (doc.contains("users")) {
    const auto& list = doc.at("users");
    for (std::size_t i = 0; i < list.size(); ++i) {
      sc.users.push_back(parse_user(list[i], sc, "scenario.users[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("user_generation")) {
    auto generated = generate_users(doc.at("user_generation"), sc, "scenario.user_generation");
    sc.users.insert(sc.users.end(), generated.begin(), generated.end());
  }
  if (sc.users.empty()) load_error("scenario.users", "no users");

  // Servers, optionally sampled from a larger pool.
  if (!doc.contains("servers")) load_error("scenario.servers", "missing");
  const auto& servers = doc.at("servers");
  for (std::size_t i = 0; i < servers.size(); ++i) {
    const std::string field = "scenario.servers[" + std::to_string(i) + "]";
    ServerSpec server{parse_site(servers[i], field), Ipv4Address{0x64400000u + static_cast<std::uint32_t>(i) * 256u + 10u}};
    if (servers[i].contains("address")) {
      try {
        server.address = Ipv4Address::parse(get<std::string>(servers[i], "address", field));
      } catch (const Error& e) {
        load_error(field + ".address", e.what());
      }
    }
    sc.servers.push_back(std::move(server));
  }
  if (sc.servers.empty()) load_error("scenario.servers", "no servers");
  if (doc.contains("server_sample")) {
    const auto k = get<long long>(doc, "server_sample", "scenario");
    if (k < 1 || static_cast<std::size_t>(k) > sc.servers.size()) load_error("scenario.server_sample", "out of range");
    std::vector<std::size_t> order(sc.servers.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(sc.seed, kServerStream));
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    order.resize(static_cast<std::size_t>(k));
    std::sort(order.begin(), order.end());
    std::vector<ServerSpec> sampled;
    for (std::size_t i : order) sampled.push_back(sc.servers[i]);
    sc.servers = std::move(sampled);
  }

  // Models.
  if (doc.contains("terrestrial")) {
    const auto& t = doc.at("terrestrial");
    sc.terrestrial.medium_speed_km_s = get_or<double>(t, "medium_speed_km_s", "scenario.terrestrial", sc.terrestrial.medium_speed_km_s);
    sc.terrestrial.inflation = get_or<double>(t, "inflation", "scenario.terrestrial", sc.terrestrial.inflation);
    sc.terrestrial.fixed_overhead_ms = get_or<double>(t, "fixed_overhead_ms", "scenario.terrestrial", sc.terrestrial.fixed_overhead_ms);
  }
  if (overrides.medium_speed_km_s) sc.terrestrial.medium_speed_km_s = *overrides.medium_speed_km_s;
  if (overrides.inflation) sc.terrestrial.inflation = *overrides.inflation;
  if (overrides.fixed_overhead_ms) sc.terrestrial.fixed_overhead_ms = *overrides.fixed_overhead_ms;
  try {
    sc.terrestrial.validate();
  } catch (const Error& e) {
    load_error("scenario.terrestrial", e.what());
  }
  try {
    sc.timing = doc.contains("timing") ? TimingModel::from_json(doc.at("timing")) : TimingModel::defaults();
  } catch (const Error& e) {
    load_error("scenario.timing", e.what());
  }
  if (doc.contains("visibility")) {
    sc.visibility.min_elevation_deg = get_or<double>(doc.at("visibility"), "min_elevation_deg", "scenario.visibility", 25.0);
  }
  try {
    sc.visibility.validate();
  } catch (const Error& e) {
    load_error("scenario.visibility", e.what());
  }
  if (doc.contains("probe")) {
    const auto& p = doc.at("probe");
    sc.probe.noise_sigma_ms = get_or<double>(p, "noise_sigma_ms", "scenario.probe", 0.5);
    sc.geoip_error_fraction = get_or<double>(p, "geoip_error_fraction", "scenario.probe", 0.0);
    if (!(sc.probe.noise_sigma_ms >= 0.0)) load_error("scenario.probe.noise_sigma_ms", "must be >= 0");
    if (!(sc.geoip_error_fraction >= 0.0 && sc.geoip_error_fraction <= 1.0)) {
      load_error("scenario.probe.geoip_error_fraction", "must be in [0, 1]");
    }
  }
  if (doc.contains("path_update")) {
    const auto& p = doc.at("path_update");
    sc.path_update_enabled = get_or<bool>(p, "enabled", "scenario.path_update", true);
    sc.path_update_period_s = get_or<double>(p, "period_s", "scenario.path_update", 10.0);
    if (!(sc.path_update_period_s > 0.0)) load_error("scenario.path_update.period_s", "must be > 0");
  }
  if (doc.contains("distribution")) {
    const auto& d = doc.at("distribution");
    const auto h = get_or<long long>(d, "h", "scenario.distribution", 0);
    if (h < 0 || static_cast<std::size_t>(h) > sc.stations.size()) load_error("scenario.distribution.h", "out of range");
    sc.distribution_h = static_cast<std::size_t>(h);
    sc.kmeans_restarts = get_or<int>(d, "kmeans_restarts", "scenario.distribution", 10);
    if (sc.kmeans_restarts < 1) load_error("scenario.distribution.kmeans_restarts", "must be >= 1");
  }
  if (sc.distribution_h == 0) sc.distribution_h = sc.anchors.solved() ? sc.anchors.solve_h : sc.anchors.ids.size();
  sc.session_bench.h_values.resize(20);
  std::iota(sc.session_bench.h_values.begin(), sc.session_bench.h_values.end(), 1);
  if (doc.contains("session_bench")) {
    const auto& s = doc.at("session_bench");
    sc.session_bench.h_values = get_or<std::vector<int>>(s, "h_values", "scenario.session_bench", sc.session_bench.h_values);
    sc.session_bench.repetitions = get_or<int>(s, "repetitions", "scenario.session_bench", 50);
    sc.session_bench.jitter = get_or<double>(s, "jitter", "scenario.session_bench", 0.1);
    if (sc.session_bench.h_values.empty()) load_error("scenario.session_bench.h_values", "empty");
    for (int h : sc.session_bench.h_values) {
      if (h < 1) load_error("scenario.session_bench.h_values", "entries must be >= 1");
    }
    if (sc.session_bench.repetitions < 1) load_error("scenario.session_bench.repetitions", "must be >= 1");
    if (!(sc.session_bench.jitter >= 0.0 && sc.session_bench.jitter < 1.0)) {
      load_error("scenario.session_bench.jitter", "must be in [0, 1)");
    }
  }
  sc.max_coverage_gap_fraction = get_or<double>(doc, "max_coverage_gap_fraction", "scenario", 0.05);

  // Geo-IP map: explicit file, else one /24 per server at its coordinates.
  try {
    if (doc.contains("geo_map")) {
      sc.geo = GeoPrefixMap::load_csv(resolve(base, get<std::string>(doc, "geo_map", "scenario")).string());
    } else {
      for (const auto& s : sc.servers) {
        const Cidr block(s.address, 24);
        if (sc.geo.lookup(s.address) && sc.geo.lookup(s.address)->prefix == block) continue;
        sc.geo.add({block, s.site.latitude_deg, s.site.longitude_deg});
      }
    }
    if (sc.geoip_error_fraction > 0.0) sc.geo = inject_geo_errors(sc.geo, sc.geoip_error_fraction, derive_seed(sc.seed, kGeoStream));
  } catch (const Error& e) {
    load_error("scenario.geo_map", e.what());
  }
  return sc;
}

}  // namespace skyoct
