#include "skyoctopus/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>

#include "skyoctopus/csv.hpp"
#include "skyoctopus/error.hpp"

namespace skyoct {
namespace {

constexpr std::uint64_t kKMeansStream = 4;
constexpr std::uint64_t kRandomStream = 5;
constexpr std::uint64_t kProbeStream = 6;
constexpr std::uint64_t kSessionStream = 7;
constexpr std::uint64_t kAnchorSolveStream = 8;

std::size_t scheme_slot(Scheme s) {
  for (std::size_t i = 0; i < std::size(kAllSchemes); ++i) {
    if (kAllSchemes[i] == s) return i;
  }
  return 0;
}

bool contains_id(std::span<const GroundSite> sites, const std::string& id) {
  return std::any_of(sites.begin(), sites.end(), [&](const GroundSite& s) { return s.id == id; });
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

ResultRow summary(const Scenario& sc, std::string experiment, std::string scheme, std::string metric, double value) {
  return {std::move(experiment), std::move(scheme), sc.constellation, std::nullopt, "", "", std::move(metric), value};
}

}  // namespace

void validate_row(const ResultRow& row) {
  if (row.experiment.empty() || row.scheme.empty() || row.metric.empty()) {
    fail(ErrorKind::kInput, "result row lacks experiment, scheme or metric");
  }
  if (!std::isfinite(row.value) || row.value < 0.0) {
    fail(ErrorKind::kInput, "result row '" + row.metric + "' has invalid value " + std::to_string(row.value));
  }
  if (row.epoch && *row.epoch < 0) fail(ErrorKind::kInput, "result row has a negative epoch");
}

void write_rows_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << "experiment,scheme,constellation,epoch,user,server,metric,value\n";
  for (const auto& row : rows) {
    validate_row(row);
    out << csv_field(row.experiment) << ',' << csv_field(row.scheme) << ',' << csv_field(row.constellation) << ','
        << (row.epoch ? std::to_string(*row.epoch) : std::string()) << ',' << csv_field(row.user) << ','
        << csv_field(row.server) << ',' << csv_field(row.metric) << ',' << format_value(row.value) << '\n';
  }
}

void write_rows_csv(const std::string& path, std::span<const ResultRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path + "'");
  write_rows_csv(out, rows);
  out.flush();
  if (!out) fail(ErrorKind::kIo, "write to '" + path + "' failed");
}

DistributionInstance build_distribution_instance(const Scenario& sc, double unreachable_ms) {
  const auto& stations = sc.stations;
  const std::size_t n = stations.size(), p = sc.users.size(), q = sc.servers.size();
  const OrbitalShell& shell = sc.shell();
  const IslGraph isl(shell);

  std::vector<double> intra_sum(n * p, 0.0);
  std::vector<int> intra_count(n * p, 0);
  for (int e = 0; e < sc.epochs.count; ++e) {
    const double t = sc.epochs.at(e);
    const ConstellationSnapshot snap(shell, t);
    const NetworkContext ctx{snap, isl, sc.visibility, sc.terrestrial};
    std::vector<std::vector<VisibleSatellite>> exits;
    for (const auto& gs : stations) exits.push_back(visible_satellites(gs, snap, sc.visibility));
    for (std::size_t j = 0; j < p; ++j) {
      std::optional<UserRouting> routing;
      try {
        routing.emplace(sc.users[j].position_at(t), ctx);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::kCoverageGap) throw;
        continue;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (const auto r = routing->to_site(stations[i], exits[i])) {
          intra_sum[i * p + j] += r->latency_ms;
          ++intra_count[i * p + j];
        }
      }
    }
  }

  std::vector<GroundSite> users, servers;
  for (const auto& u : sc.users) users.push_back(u.position_at(sc.epochs.start_s));
  for (const auto& s : sc.servers) servers.push_back(s.site);
  std::vector<double> latency(n * p * q);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const std::size_t c = i * p + j;
      const double intra = intra_count[c] > 0 ? intra_sum[c] / intra_count[c] : unreachable_ms;
      for (std::size_t k = 0; k < q; ++k) {
        latency[c * q + k] = intra + terrestrial_latency_ms(stations[i], servers[k], sc.terrestrial);
      }
    }
  }
  auto demand = DistributionInstance::uniform_demand(p, q);
  return DistributionInstance::from_latencies(stations, std::move(users), std::move(servers), std::move(demand),
                                              latency);
}

DistributionSolution solve_distribution(const DistributionInstance& instance, const std::string& algorithm,
                                        std::size_t h, std::uint64_t seed, int kmeans_restarts) {
  if (algorithm == "greedy") return greedy_distribution(instance, h);
  if (algorithm == "kmeans") {
    KMeansOptions opts;
    opts.restarts = kmeans_restarts;
    return kmeans_distribution(instance, h, derive_seed(seed, kKMeansStream), opts);
  }
  if (algorithm == "random") return random_distribution(instance, h, derive_seed(seed, kRandomStream));
  if (algorithm == "brute-force") return brute_force_distribution(instance, h);
  fail(ErrorKind::kInput, "unknown distribution algorithm '" + algorithm + "'");
}

std::vector<GroundSite> resolve_anchors(const Scenario& sc) {
  std::vector<GroundSite> anchors;
  if (!sc.anchors.solved()) {
    for (const auto& id : sc.anchors.ids) anchors.push_back(sc.station(id));
    return anchors;
  }
  const auto instance = build_distribution_instance(sc);
  const auto solution = solve_distribution(instance, sc.anchors.algorithm, sc.anchors.solve_h,
                                           derive_seed(sc.seed, kAnchorSolveStream), sc.kmeans_restarts);
  for (std::size_t i : solution.chosen) anchors.push_back(sc.stations[i]);
  return anchors;
}

BenchOutcome run_latency_bench(const Scenario& sc) {
  const auto anchors = resolve_anchors(sc);
  if (anchors.empty()) fail(ErrorKind::kInput, "latency bench needs at least one anchor");
  const OrbitalShell& shell = sc.shell();
  const IslGraph isl(shell);
  const SatelliteClusters clusters(shell, static_cast<int>(anchors.size()));

  struct UserState {
    std::string standard_anchor;
    std::string standard_gs_anchor;
    bool nearest_deployed = false;
    std::optional<PfcpSessionContext> session;
  };
  std::vector<UserState> users;
  std::optional<RuleTables> initial_rules;
  if (sc.path_update_enabled) {
    InitialRuleOptions opts;
    opts.ip_anchor = contains_id(anchors, sc.ip_anchor) ? sc.ip_anchor : "";
    initial_rules = build_initial_pdrs(sc.geo, anchors, opts);
  }
  for (std::size_t j = 0; j < sc.users.size(); ++j) {
    const auto& u = sc.users[j];
    const GroundSite start = u.position_at(u.session_start_s);
    UserState st;
    st.standard_anchor = anchors[nearest_site(u.registered, anchors)].id;
    st.standard_gs_anchor = anchors[nearest_site(start, anchors)].id;
    st.nearest_deployed = contains_id(anchors, sc.stations[nearest_site(start, sc.stations)].id);
    if (initial_rules) st.session.emplace(j + 1, u.id, *initial_rules);
    users.push_back(std::move(st));
  }

  BenchOutcome out;
  ConcordanceTally tally;
  std::mt19937_64 probe_rng(derive_seed(sc.seed, kProbeStream));
  std::array<double, 4> sum{}, max{};
  std::array<std::size_t, 4> valid{}, gaps{};

  for (int e = 0; e < sc.epochs.count; ++e) {
    const double t = sc.epochs.at(e);
    const ConstellationSnapshot snap(shell, t);
    const NetworkContext ctx{snap, isl, sc.visibility, sc.terrestrial};
    std::vector<std::vector<VisibleSatellite>> exits;
    for (const auto& a : anchors) exits.push_back(visible_satellites(a, snap, sc.visibility));
    std::map<SatIndex, SatelliteRouter> anchor_routers;

    for (std::size_t j = 0; j < sc.users.size(); ++j) {
      auto& st = users[j];
      std::optional<UserRouting> routing;
      try {
        routing.emplace(sc.users[j].position_at(t), ctx);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::kCoverageGap) throw;
      }
      std::vector<std::optional<IntraRoute>> intra(anchors.size());
      std::map<std::string, double> intra_ms;
      if (routing) {
        for (std::size_t i = 0; i < anchors.size(); ++i) {
          intra[i] = routing->to_site(anchors[i], exits[i]);
          if (intra[i]) intra_ms[anchors[i].id] = intra[i]->latency_ms;
        }
      }
      SchemeInputs inputs{anchors, sc.stations, &clusters, st.standard_anchor, st.standard_gs_anchor, intra,
                          &anchor_routers};

      for (std::size_t k = 0; k < sc.servers.size(); ++k) {
        const auto& server = sc.servers[k];
        LatencySample sample;
        sample.user = j;
        sample.server = k;
        sample.epoch = e;
        sample.standard_gs_anchor = st.standard_gs_anchor;
        sample.nearest_station_deployed = st.nearest_deployed;
        bool gap = !routing;
        for (Scheme scheme : kAllSchemes) {
          const std::size_t s = scheme_slot(scheme);
          if (!routing) {
            ++gaps[s];
            continue;
          }
          try {
            const PathResult r = scheme_latency(scheme, inputs, *routing, server.site, ctx);
            sample.latency_ms[s] = r.total_ms;
            if (scheme == Scheme::kSkyOctopus) sample.skyoctopus_anchor = r.anchor;
            sum[s] += r.total_ms;
            max[s] = std::max(max[s], r.total_ms);
            ++valid[s];
            out.rows.push_back({"latency", to_string(scheme), sc.constellation, e, sc.users[j].id, server.site.id,
                                "e2e_latency_ms", r.total_ms});
          } catch (const Error& err) {
            if (err.kind() != ErrorKind::kCoverageGap) throw;
            ++gaps[s];
            gap = true;
          }
        }

        if (st.session && routing) {
          const auto outcome = st.session->process_packet(server.address, t);
          for (const auto& ev : outcome.events) {
            const auto probes = probe_anchors(anchors, server.site, ev.destination, t, sc.terrestrial, sc.probe,
                                              probe_rng);
            try {
              const auto change = st.session->trigger_path_update(ev.destination, t, probes, intra_ms);
              tally.record(outcome.anchor, change.anchor);
            } catch (const Error& err) {
              if (err.kind() != ErrorKind::kIncompleteMeasurement) throw;
            }
          }
        }

        ++out.samples;
        if (gap) ++out.coverage_gaps;
        out.details.push_back(std::move(sample));
      }
    }
  }

  for (Scheme scheme : kAllSchemes) {
    const std::size_t s = scheme_slot(scheme);
    if (valid[s] > 0) {
      out.rows.push_back(summary(sc, "latency", to_string(scheme), "mean_ms", sum[s] / static_cast<double>(valid[s])));
      out.rows.push_back(summary(sc, "latency", to_string(scheme), "max_ms", max[s]));
    }
    out.rows.push_back(summary(sc, "latency", to_string(scheme), "samples", static_cast<double>(valid[s])));
    out.rows.push_back(summary(sc, "latency", to_string(scheme), "coverage_gaps", static_cast<double>(gaps[s])));
  }
  if (sc.path_update_enabled) {
    out.concordance_rate = tally.rate();
    out.rows.push_back(summary(sc, "latency", "skyoctopus", "concordance_rate", tally.rate()));
    out.rows.push_back(summary(sc, "latency", "skyoctopus", "path_updates", static_cast<double>(tally.total())));
  }
  return out;
}

BenchOutcome run_session_bench(const Scenario& sc, std::span<const int> h_values) {
  if (h_values.empty()) fail(ErrorKind::kInput, "session bench needs at least one h value");
  const auto sweep = session_establishment_sweep(h_values, sc.timing, sc.session_bench.repetitions,
                                                 derive_seed(sc.seed, kSessionStream), sc.session_bench.jitter);
  BenchOutcome out;
  std::map<int, std::pair<double, double>> by_h;  // h -> (parallel, insertion)
  for (const auto& row : sweep) {
    out.rows.push_back(summary(sc, "session", row.scheme, "mean_establishment_ms:h=" + std::to_string(row.h),
                               row.mean_ms));
    auto& slot = by_h[row.h];
    (row.scheme == "parallel" ? slot.first : slot.second) = row.mean_ms;
  }
  for (int h : h_values) {
    const auto [par, ins] = by_h.at(h);
    const double saving = ins > 0.0 ? std::max(0.0, 1.0 - par / ins) : 0.0;
    out.rows.push_back(summary(sc, "session", "parallel", "saving_fraction:h=" + std::to_string(h), saving));
  }
  out.samples = h_values.size();
  return out;
}

BenchOutcome run_distribution_bench(const Scenario& sc, std::size_t h) {
  if (h < 1 || h > sc.stations.size()) fail(ErrorKind::kInput, "h must be in [1, station count]");
  const auto instance = build_distribution_instance(sc);
  std::vector<std::string> algorithms{"greedy", "kmeans", "random"};
  if (binomial(instance.station_count(), h) <= kBruteForceGuard) algorithms.push_back("brute-force");

  BenchOutcome out;
  for (const auto& algo : algorithms) {
    const auto solution = solve_distribution(instance, algo, h, sc.seed, sc.kmeans_restarts);
    out.rows.push_back(summary(sc, "distribution", algo, "mean_latency_ms", solution.cost));
    for (std::size_t i : solution.chosen) {
      out.rows.push_back(summary(sc, "distribution", algo, "selected_station:" + sc.stations[i].id, 1.0));
    }
  }
  out.samples = instance.user_count() * instance.server_count();
  return out;
}

BenchOutcome reproduce_table1(const Scenario& sc) {
  const auto anchors = resolve_anchors(sc);
  if (anchors.empty()) fail(ErrorKind::kInput, "table1 needs at least one anchor");
  const OrbitalShell& shell = sc.shell();
  const IslGraph isl(shell);
  const double t = sc.epochs.at(0);
  const ConstellationSnapshot snap(shell, t);
  const NetworkContext ctx{snap, isl, sc.visibility, sc.terrestrial};
  const auto& user = sc.users.front();
  const auto& server = sc.servers.front().site;
  const UserRouting routing(user.position_at(t), ctx);

  std::vector<PathResult> results;
  for (const auto& a : anchors) results.push_back(end_to_end_latency(routing, a, server, sc.terrestrial));
  double worst = 0.0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    worst = std::max(worst, results[i].total_ms);
    const auto& b = results[best];
    if (results[i].total_ms < b.total_ms || (results[i].total_ms == b.total_ms && anchors[i].id < anchors[best].id)) {
      best = i;
    }
  }

  BenchOutcome out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    auto row = [&](std::string metric, double value) {
      out.rows.push_back({"table1", anchors[i].id, sc.constellation, 0, user.id, server.id, std::move(metric), value});
    };
    row("user_to_gs_ms", r.intra_ms);
    row("gs_to_server_ms", r.inter_ms);
    row("total_ms", r.total_ms);
    row("saved_percent", worst > 0.0 ? 100.0 * (worst - r.total_ms) / worst : 0.0);
  }
  out.rows.push_back({"table1", "skyoctopus", sc.constellation, 0, user.id, server.id,
                      "best_anchor:" + anchors[best].id, results[best].total_ms});
  out.samples = results.size();
  return out;
}

}  // namespace skyoct
