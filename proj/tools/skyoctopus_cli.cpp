#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skyoctopus/skyoctopus.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitLoad = 2;
constexpr int kExitCoverage = 3;

struct Options {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<std::string> constellation;
  std::optional<double> medium_speed;
  std::optional<double> inflation;
  std::optional<double> overhead;
  std::optional<double> max_gap_fraction;
  std::size_t h = 0;
  std::vector<int> h_values;
};

int report(sko_status status) {
  std::fprintf(stderr, "error: %s: %s\n", sko_status_name(status), sko_last_error());
  return status == SKO_ERR_LOAD ? kExitLoad : kExitFailure;
}

struct ScenarioHandle {
  sko_scenario* ptr = nullptr;
  ~ScenarioHandle() { sko_scenario_destroy(ptr); }
};

sko_status open_scenario(const Options& o, ScenarioHandle& h) {
  sko_status st = sko_scenario_load(o.scenario.c_str(), &h.ptr);
  if (st == SKO_OK && o.seed) st = sko_scenario_set_seed(h.ptr, *o.seed);
  if (st == SKO_OK && o.epochs) st = sko_scenario_set_epoch_count(h.ptr, *o.epochs);
  if (st == SKO_OK && o.constellation) st = sko_scenario_select_constellation(h.ptr, o.constellation->c_str());
  if (st == SKO_OK && (o.medium_speed || o.inflation || o.overhead)) {
    st = sko_scenario_set_terrestrial(h.ptr, o.medium_speed.value_or(-1.0), o.inflation.value_or(-1.0),
                                      o.overhead.value_or(-1.0));
  }
  // Overrides that fail validation are load errors from the user's point of view.
  return st == SKO_ERR_INPUT ? SKO_ERR_LOAD : st;
}

int finish(const Options& o, const sko_scenario* sc, const sko_run_stats& stats) {
  const double limit = o.max_gap_fraction.value_or(sko_scenario_max_gap_fraction(sc));
  const double fraction = stats.samples == 0 ? 0.0 : static_cast<double>(stats.coverage_gaps) / stats.samples;
  if (stats.coverage_gaps > 0) {
    std::fprintf(stderr, "coverage gaps: %llu of %llu samples\n", static_cast<unsigned long long>(stats.coverage_gaps),
                 static_cast<unsigned long long>(stats.samples));
  }
  if (fraction > limit) {
    std::fprintf(stderr, "error: coverage gap fraction %.4f exceeds %.4f\n", fraction, limit);
    return kExitCoverage;
  }
  return 0;
}

void add_common(CLI::App* cmd, Options& o, bool needs_out) {
  cmd->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
  auto* out = cmd->add_option("--out", o.out, "Output CSV path");
  if (needs_out) out->required();
  cmd->add_option("--seed", o.seed, "Override the scenario seed");
  cmd->add_option("--epochs", o.epochs, "Override the epoch count")->check(CLI::PositiveNumber);
  cmd->add_option("--constellation", o.constellation, "Shell name to use");
  cmd->add_option("--medium-speed", o.medium_speed, "Terrestrial medium speed, km/s");
  cmd->add_option("--inflation", o.inflation, "Terrestrial route inflation factor");
  cmd->add_option("--fixed-overhead", o.overhead, "Terrestrial fixed overhead, ms");
  cmd->add_option("--max-gap-fraction", o.max_gap_fraction, "Coverage gap fraction that fails the run");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LEO multi-anchor latency simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sko_version());
  Options o;

  auto* latency = app.add_subcommand("latency-bench", "End-to-end latency of every scheme");
  add_common(latency, o, true);
  auto* session = app.add_subcommand("session-bench", "PDU session establishment time sweep");
  add_common(session, o, true);
  session->add_option("--h-values", o.h_values, "Anchor counts to sweep")->delimiter(',');
  auto* distribute = app.add_subcommand("distribute", "Anchor distribution algorithms");
  add_common(distribute, o, true);
  distribute->add_option("--anchor-count", o.h, "Number of anchors (h)");
  auto* table1 = app.add_subcommand("table1", "Per-anchor latency breakdown for one user and server");
  add_common(table1, o, true);
  auto* validate = app.add_subcommand("validate", "Load and check a scenario");
  add_common(validate, o, false);

  CLI11_PARSE(app, argc, argv);

  ScenarioHandle sc;
  if (const sko_status st = open_scenario(o, sc); st != SKO_OK) return report(st);

  sko_run_stats stats{0, 0};
  sko_status st = SKO_OK;
  if (*latency) {
    st = sko_run_latency_bench(sc.ptr, o.out.c_str(), &stats);
  } else if (*session) {
    st = sko_run_session_bench(sc.ptr, o.h_values.empty() ? nullptr : o.h_values.data(), o.h_values.size(),
                               o.out.c_str(), &stats);
  } else if (*distribute) {
    st = sko_run_distribution_bench(sc.ptr, o.h, o.out.c_str(), &stats);
  } else if (*table1) {
    st = sko_reproduce_table1(sc.ptr, o.out.c_str(), &stats);
  } else if (*validate) {
    std::size_t users = 0;
    st = sko_scenario_user_count(sc.ptr, &users);
    if (st == SKO_OK) std::printf("%s: ok (%zu users)\n", o.scenario.c_str(), users);
    return st == SKO_OK ? 0 : report(st);
  }
  if (st == SKO_ERR_COVERAGE_GAP) {
    report(st);
    return kExitCoverage;
  }
  if (st != SKO_OK) return report(st);
  return finish(o, sc.ptr, stats);
}
