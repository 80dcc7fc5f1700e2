#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skyoctopus/distribution.hpp"
#include "skyoctopus/latency.hpp"
#include "skyoctopus/scenario.hpp"

namespace skyoct {

struct ResultRow {
  std::string experiment;
  std::string scheme;
  std::string constellation;
  std::optional<int> epoch;  // empty for summary rows
  std::string user;
  std::string server;
  std::string metric;
  double value = 0.0;
};

// Throws kInput unless the value is finite and >= 0 and the identifying
// fields are present.
void validate_row(const ResultRow& row);

// experiment,scheme,constellation,epoch,user,server,metric,value
void write_rows_csv(std::ostream& out, std::span<const ResultRow> rows);
void write_rows_csv(const std::string& path, std::span<const ResultRow> rows);

// One (user, server, epoch) triple of the latency bench.
struct LatencySample {
  std::size_t user = 0;
  std::size_t server = 0;
  int epoch = 0;
  std::array<std::optional<double>, 4> latency_ms;  // indexed like kAllSchemes; nullopt on a coverage gap
  std::string skyoctopus_anchor;
  std::string standard_gs_anchor;
  bool nearest_station_deployed = false;  // nearest ground station at session start is an anchor
};

struct BenchOutcome {
  std::vector<ResultRow> rows;
  std::size_t samples = 0;
  std::size_t coverage_gaps = 0;  // samples where at least one scheme had no path
  std::vector<LatencySample> details;
  std::optional<double> concordance_rate;

  double gap_fraction() const {
    return samples == 0 ? 0.0 : static_cast<double>(coverage_gaps) / static_cast<double>(samples);
  }
};

// Time-averaged best-anchor instance over every ground station, with uniform
// demand. Station/user pairs that never have a path get `unreachable_ms`.
DistributionInstance build_distribution_instance(const Scenario& scenario, double unreachable_ms = 1000.0);

DistributionSolution solve_distribution(const DistributionInstance& instance, const std::string& algorithm,
                                        std::size_t h, std::uint64_t seed, int kmeans_restarts = 10);

// Deployed anchors: the explicit list, or the solver's pick.
std::vector<GroundSite> resolve_anchors(const Scenario& scenario);

BenchOutcome run_latency_bench(const Scenario& scenario);
BenchOutcome run_session_bench(const Scenario& scenario, std::span<const int> h_values);
BenchOutcome run_distribution_bench(const Scenario& scenario, std::size_t h);
BenchOutcome reproduce_table1(const Scenario& scenario);

}  // namespace skyoct
