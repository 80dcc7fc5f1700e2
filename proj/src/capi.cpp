#include "skyoctopus/skyoctopus.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skyoctopus/classifier.hpp"
#include "skyoctopus/distribution.hpp"
#include "skyoctopus/error.hpp"
#include "skyoctopus/harness.hpp"
#include "skyoctopus/scenario.hpp"
#include "skyoctopus/signaling.hpp"

struct sko_scenario {
  std::string path;
  skyoct::ScenarioOverrides overrides;
  skyoct::Scenario scenario;
};

struct sko_classifier {
  std::vector<skyoct::GroundSite> anchors;
  std::unique_ptr<skyoct::PfcpSessionContext> session;
};

struct sko_instance {
  skyoct::DistributionInstance instance;
};

namespace {

thread_local std::string g_last_error;

sko_status status_of(skyoct::ErrorKind kind) {
  using skyoct::ErrorKind;
  switch (kind) {
    case ErrorKind::kInput: return SKO_ERR_INPUT;
    case ErrorKind::kLoad: return SKO_ERR_LOAD;
    case ErrorKind::kCoverageGap: return SKO_ERR_COVERAGE_GAP;
    case ErrorKind::kRuleTable: return SKO_ERR_RULE_TABLE;
    case ErrorKind::kIncompleteMeasurement: return SKO_ERR_INCOMPLETE_MEASUREMENT;
    case ErrorKind::kEstablishmentTimeout: return SKO_ERR_TIMEOUT;
    case ErrorKind::kTeidMismatch: return SKO_ERR_TEID_MISMATCH;
    case ErrorKind::kInstanceTooLarge: return SKO_ERR_TOO_LARGE;
    case ErrorKind::kIo: return SKO_ERR_IO;
  }
  return SKO_ERR_INTERNAL;
}

template <typename F>
sko_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return SKO_OK;
  } catch (const skyoct::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SKO_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SKO_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SKO_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) skyoct::fail(skyoct::ErrorKind::kInput, what);
}

skyoct::OrbitalShell to_shell(const sko_shell* s) {
  require(s != nullptr, "shell is null");
  skyoct::OrbitalShell shell;
  shell.name = "custom";
  shell.plane_count = s->plane_count;
  shell.sats_per_plane = s->sats_per_plane;
  shell.altitude_km = s->altitude_km;
  shell.inclination_deg = s->inclination_deg;
  shell.phase_offset = s->phase_offset;
  shell.validate();
  return shell;
}

void fill_stats(sko_run_stats* stats, const skyoct::BenchOutcome& outcome) {
  if (stats == nullptr) return;
  stats->samples = outcome.samples;
  stats->coverage_gaps = outcome.coverage_gaps;
}

void reload(sko_scenario* sc) { sc->scenario = skyoct::load_scenario(sc->path, sc->overrides); }

template <typename F>
sko_status with_override(sko_scenario* sc, F&& apply) {
  return guarded([&] {
    require(sc != nullptr, "scenario is null");
    auto saved = sc->overrides;
    apply(sc->overrides);
    try {
      reload(sc);
    } catch (...) {
      sc->overrides = saved;
      throw;
    }
  });
}

}  // namespace

extern "C" {

const char* sko_last_error(void) { return g_last_error.c_str(); }

const char* sko_status_name(sko_status status) {
  switch (status) {
    case SKO_OK: return "ok";
    case SKO_ERR_INPUT: return "input error";
    case SKO_ERR_LOAD: return "load error";
    case SKO_ERR_COVERAGE_GAP: return "coverage gap";
    case SKO_ERR_RULE_TABLE: return "rule table error";
    case SKO_ERR_INCOMPLETE_MEASUREMENT: return "incomplete measurement";
    case SKO_ERR_TIMEOUT: return "establishment timeout";
    case SKO_ERR_TEID_MISMATCH: return "TEID mismatch";
    case SKO_ERR_TOO_LARGE: return "instance too large";
    case SKO_ERR_IO: return "I/O error";
    case SKO_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sko_version(void) { return "1.0.0"; }

sko_status sko_scenario_load(const char* path, sko_scenario** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto sc = std::make_unique<sko_scenario>();
    sc->path = path;
    reload(sc.get());
    *out = sc.release();
  });
}

void sko_scenario_destroy(sko_scenario* scenario) { delete scenario; }

sko_status sko_scenario_set_seed(sko_scenario* scenario, uint64_t seed) {
  return with_override(scenario, [&](skyoct::ScenarioOverrides& o) { o.seed = seed; });
}

sko_status sko_scenario_set_epoch_count(sko_scenario* scenario, int count) {
  return with_override(scenario, [&](skyoct::ScenarioOverrides& o) { o.epoch_count = count; });
}

sko_status sko_scenario_select_constellation(sko_scenario* scenario, const char* name) {
  return with_override(scenario, [&](skyoct::ScenarioOverrides& o) {
    require(name != nullptr, "constellation name is null");
    o.constellation = name;
  });
}

sko_status sko_scenario_set_terrestrial(sko_scenario* scenario, double medium_speed_km_s, double inflation,
                                        double fixed_overhead_ms) {
  return with_override(scenario, [&](skyoct::ScenarioOverrides& o) {
    if (medium_speed_km_s >= 0.0) o.medium_speed_km_s = medium_speed_km_s;
    if (inflation >= 0.0) o.inflation = inflation;
    if (fixed_overhead_ms >= 0.0) o.fixed_overhead_ms = fixed_overhead_ms;
  });
}

sko_status sko_scenario_user_count(const sko_scenario* scenario, size_t* out) {
  return guarded([&] {
    require(scenario != nullptr && out != nullptr, "null argument");
    *out = scenario->scenario.users.size();
  });
}

double sko_scenario_max_gap_fraction(const sko_scenario* scenario) {
  return scenario == nullptr ? 0.0 : scenario->scenario.max_coverage_gap_fraction;
}

sko_status sko_run_latency_bench(const sko_scenario* scenario, const char* out_path, sko_run_stats* stats) {
  return guarded([&] {
    require(scenario != nullptr && out_path != nullptr, "null argument");
    const auto outcome = skyoct::run_latency_bench(scenario->scenario);
    skyoct::write_rows_csv(std::string(out_path), outcome.rows);
    fill_stats(stats, outcome);
  });
}

sko_status sko_run_session_bench(const sko_scenario* scenario, const int* h_values, size_t h_count,
                                 const char* out_path, sko_run_stats* stats) {
  return guarded([&] {
    require(scenario != nullptr && out_path != nullptr, "null argument");
    std::vector<int> hs = h_values != nullptr ? std::vector<int>(h_values, h_values + h_count)
                                              : scenario->scenario.session_bench.h_values;
    for (int h : hs) require(h >= 1, "h values must be >= 1");
    const auto outcome = skyoct::run_session_bench(scenario->scenario, hs);
    skyoct::write_rows_csv(std::string(out_path), outcome.rows);
    fill_stats(stats, outcome);
  });
}

sko_status sko_run_distribution_bench(const sko_scenario* scenario, size_t h, const char* out_path,
                                      sko_run_stats* stats) {
  return guarded([&] {
    require(scenario != nullptr && out_path != nullptr, "null argument");
    const auto outcome = skyoct::run_distribution_bench(scenario->scenario, h == 0 ? scenario->scenario.distribution_h : h);
    skyoct::write_rows_csv(std::string(out_path), outcome.rows);
    fill_stats(stats, outcome);
  });
}

sko_status sko_reproduce_table1(const sko_scenario* scenario, const char* out_path, sko_run_stats* stats) {
  return guarded([&] {
    require(scenario != nullptr && out_path != nullptr, "null argument");
    const auto outcome = skyoct::reproduce_table1(scenario->scenario);
    skyoct::write_rows_csv(std::string(out_path), outcome.rows);
    fill_stats(stats, outcome);
  });
}

sko_status sko_satellite_position(const sko_shell* shell, int plane, int slot, double epoch_s, double out_xyz[3]) {
  return guarded([&] {
    require(out_xyz != nullptr, "output is null");
    const auto p = skyoct::satellite_position(to_shell(shell), plane, slot, epoch_s);
    out_xyz[0] = p.x;
    out_xyz[1] = p.y;
    out_xyz[2] = p.z;
  });
}

double sko_link_delay_ms(const double a_xyz[3], const double b_xyz[3]) {
  if (a_xyz == nullptr || b_xyz == nullptr) return -1.0;
  return skyoct::link_delay_ms({a_xyz[0], a_xyz[1], a_xyz[2]}, {b_xyz[0], b_xyz[1], b_xyz[2]});
}

sko_status sko_end_to_end_latency(const sko_shell* shell, double epoch_s, double user_lat, double user_lon,
                                  double anchor_lat, double anchor_lon, double server_lat, double server_lon,
                                  double* out_total_ms) {
  return guarded([&] {
    require(out_total_ms != nullptr, "output is null");
    const auto s = to_shell(shell);
    const skyoct::GroundSite user{"user", user_lat, user_lon}, anchor{"anchor", anchor_lat, anchor_lon},
        server{"server", server_lat, server_lon};
    user.validate();
    anchor.validate();
    server.validate();
    const skyoct::ConstellationSnapshot snap(s, epoch_s);
    const skyoct::IslGraph isl(s);
    const skyoct::NetworkContext ctx{snap, isl, {}, {}};
    *out_total_ms = skyoct::end_to_end_latency(user, anchor, server, ctx).total_ms;
  });
}

sko_status sko_classifier_create(const char* geo_csv_path, const sko_anchor_site* anchors, size_t anchor_count,
                                 sko_classifier** out) {
  return guarded([&] {
    require(geo_csv_path != nullptr && out != nullptr, "null argument");
    require(anchors != nullptr && anchor_count > 0, "at least one anchor is required");
    *out = nullptr;
    auto c = std::make_unique<sko_classifier>();
    for (size_t i = 0; i < anchor_count; ++i) {
      require(anchors[i].id != nullptr, "anchor id is null");
      skyoct::GroundSite site{anchors[i].id, anchors[i].latitude_deg, anchors[i].longitude_deg};
      site.validate();
      c->anchors.push_back(std::move(site));
    }
    const auto geo = skyoct::GeoPrefixMap::load_csv(geo_csv_path);
    c->session = std::make_unique<skyoct::PfcpSessionContext>(1, "user", skyoct::build_initial_pdrs(geo, c->anchors));
    *out = c.release();
  });
}

void sko_classifier_destroy(sko_classifier* classifier) { delete classifier; }

sko_status sko_classifier_match(const sko_classifier* classifier, const char* destination, char* buf,
                                size_t buf_len) {
  return guarded([&] {
    require(classifier != nullptr && destination != nullptr && buf != nullptr, "null argument");
    const auto& anchor = classifier->session->match_packet(skyoct::Ipv4Address::parse(destination)).target_anchor;
    require(anchor.size() < buf_len, "buffer too small");
    std::memcpy(buf, anchor.c_str(), anchor.size() + 1);
  });
}

sko_status sko_classifier_path_update(sko_classifier* classifier, const char* destination, double epoch_s,
                                      const double* probe_ms, const double* intra_ms) {
  return guarded([&] {
    require(classifier != nullptr && destination != nullptr && probe_ms != nullptr && intra_ms != nullptr,
            "null argument");
    const auto dest = skyoct::Ipv4Address::parse(destination);
    std::vector<skyoct::ProbeReport> probes;
    std::map<std::string, double> intra;
    for (size_t i = 0; i < classifier->anchors.size(); ++i) {
      // NaN marks a missing measurement.
      if (!std::isnan(probe_ms[i])) probes.push_back({classifier->anchors[i].id, dest, probe_ms[i], epoch_s});
      if (!std::isnan(intra_ms[i])) intra[classifier->anchors[i].id] = intra_ms[i];
    }
    classifier->session->trigger_path_update(dest, epoch_s, probes, intra);
  });
}

sko_status sko_classifier_dump_rules(const sko_classifier* classifier, const char* out_path) {
  return guarded([&] {
    require(classifier != nullptr && out_path != nullptr, "null argument");
    std::ofstream out(out_path, std::ios::binary);
    if (!out) skyoct::fail(skyoct::ErrorKind::kIo, std::string("cannot write '") + out_path + "'");
    classifier->session->write_rules_csv(out);
  });
}

sko_status sko_instance_load(const char* path, sko_instance** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    *out = new sko_instance{skyoct::DistributionInstance::load_json(path)};
  });
}

void sko_instance_destroy(sko_instance* instance) { delete instance; }

sko_status sko_instance_solve(const sko_instance* instance, sko_algorithm algorithm, size_t h, uint64_t seed,
                              size_t* chosen, double* out_cost) {
  return guarded([&] {
    require(instance != nullptr && chosen != nullptr, "null argument");
    const char* name = nullptr;
    switch (algorithm) {
      case SKO_ALG_GREEDY: name = "greedy"; break;
      case SKO_ALG_KMEANS: name = "kmeans"; break;
      case SKO_ALG_RANDOM: name = "random"; break;
      case SKO_ALG_BRUTE_FORCE: name = "brute-force"; break;
    }
    require(name != nullptr, "unknown algorithm");
    const auto sol = skyoct::solve_distribution(instance->instance, name, h, seed);
    for (size_t i = 0; i < sol.chosen.size(); ++i) chosen[i] = sol.chosen[i];
    if (out_cost != nullptr) *out_cost = sol.cost;
  });
}

sko_status sko_establishment_time(sko_establishment kind, int n_anchors, const char* timing_json_path,
                                  double* out_ms) {
  return guarded([&] {
    require(out_ms != nullptr, "output is null");
    auto timing = skyoct::TimingModel::defaults();
    if (timing_json_path != nullptr) {
      std::ifstream in(timing_json_path);
      if (!in) skyoct::fail(skyoct::ErrorKind::kLoad, std::string("cannot open '") + timing_json_path + "'");
      nlohmann::json doc;
      try {
        in >> doc;
      } catch (const nlohmann::json::exception& e) {
        skyoct::fail(skyoct::ErrorKind::kLoad, e.what());
      }
      timing = skyoct::TimingModel::from_json(doc);
    }
    const auto trace = kind == SKO_EST_PARALLEL ? skyoct::establish_parallel(n_anchors, timing)
                                                : skyoct::establish_insertion_based(n_anchors, timing);
    *out_ms = trace.total_duration_ms;
  });
}

}  // extern "C"
