#include <doctest.h>

#include <set>
#include <sstream>

#include "skyoctopus/harness.hpp"
#include "skyoctopus/scenario.hpp"
#include "support.hpp"

using namespace skyoct;

namespace {

std::string load_message(const std::string& file) {
  try {
    load_scenario(testing::data_path(file));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kLoad);
    return e.what();
  }
  FAIL("expected a load error for " << file);
  return {};
}

std::string csv_of(const BenchOutcome& out) {
  std::ostringstream s;
  write_rows_csv(s, out.rows);
  return s.str();
}

const ResultRow* find_row(const BenchOutcome& out, const std::string& scheme, const std::string& metric) {
  for (const auto& r : out.rows) {
    if (r.scheme == scheme && r.metric == metric) return &r;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("minimal scenario takes defaults") {
  const auto sc = load_scenario(testing::data_path("minimal.json"));
  CHECK(sc.constellation == "starlink");
  CHECK(sc.shell().plane_count == 72);
  CHECK(sc.shell().sats_per_plane == 22);
  CHECK(sc.stations.size() == 1);
  CHECK(resolve_anchors(sc).size() == 1);
  CHECK(sc.epochs.count == 1);
  CHECK(sc.visibility.min_elevation_deg == 25.0);
  CHECK(sc.timing.leg("core", "anchor-0") == 30.0);
  CHECK(sc.users.size() == 1);
  CHECK(sc.servers.size() == 1);
  CHECK(sc.geo.entries().size() == 1);
}

TEST_CASE("load errors name the field") {
  CHECK(load_message("bad_anchor.json").find("gs-missing") != std::string::npos);
  CHECK(load_message("bad_altitude.json").find("altitude") != std::string::npos);
  CHECK(load_message("does_not_exist.json").find("does_not_exist") != std::string::npos);
}

TEST_CASE("overrides apply after loading") {
  ScenarioOverrides o;
  o.epoch_count = 2;
  o.constellation = "kuiper";
  o.seed = 99;
  o.inflation = 2.0;
  const auto sc = load_scenario(testing::data_path("small.json"), o);
  CHECK(sc.epochs.count == 2);
  CHECK(sc.constellation == "kuiper");
  CHECK(sc.seed == 99);
  CHECK(sc.terrestrial.inflation == 2.0);
  o.constellation = "nope";
  CHECK(testing::error_kind([&] { load_scenario(testing::data_path("small.json"), o); }) == ErrorKind::kLoad);
}

TEST_CASE("user motion interpolates between waypoints") {
  UserSpec u;
  u.id = "u";
  u.waypoints = {{0.0, 10.0, 20.0}, {100.0, 20.0, 40.0}};
  CHECK(u.position_at(50.0).latitude_deg == doctest::Approx(15.0));
  CHECK(u.position_at(50.0).longitude_deg == doctest::Approx(30.0));
  CHECK(u.position_at(-5.0).latitude_deg == 10.0);
  CHECK(u.position_at(500.0).longitude_deg == 40.0);
  CHECK(u.position_at(25.0).id == "u");
}

TEST_CASE("seed streams are stable and distinct") {
  CHECK(derive_seed(7, 1) == derive_seed(7, 1));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 8; ++s) seen.insert(derive_seed(7, s));
  CHECK(seen.size() == 8);
  CHECK(derive_seed(7, 1) != derive_seed(8, 1));
}

TEST_CASE("generated users are reproducible") {
  const auto a = load_scenario(testing::data_path("small.json"));
  const auto b = load_scenario(testing::data_path("small.json"));
  REQUIRE(a.users.size() == 6);
  for (std::size_t i = 0; i < a.users.size(); ++i) {
    CHECK(a.users[i].id == b.users[i].id);
    CHECK(a.users[i].position_at(600.0).latitude_deg == b.users[i].position_at(600.0).latitude_deg);
    const auto p = a.users[i].position_at(300.0);
    CHECK(p.latitude_deg >= 25.0);
    CHECK(p.latitude_deg <= 50.0);
  }
}

TEST_CASE("latency bench on the small scenario") {
  const auto sc = load_scenario(testing::data_path("small.json"));
  const auto out = run_latency_bench(sc);
  CHECK(out.samples == 6 * 4 * 3);
  CHECK(out.details.size() == out.samples);
  for (const auto& r : out.rows) CHECK_FALSE(testing::error_kind([&] { validate_row(r); }));
  for (Scheme s : kAllSchemes) CHECK(find_row(out, to_string(s), "mean_ms") != nullptr);
  REQUIRE(out.concordance_rate.has_value());
  CHECK(*out.concordance_rate >= 0.0);
  CHECK(*out.concordance_rate <= 1.0);

  const auto idx = [](Scheme s) { return static_cast<std::size_t>(s); };
  for (const auto& d : out.details) {
    const auto& sky = d.latency_ms[idx(Scheme::kSkyOctopus)];
    if (!sky) continue;
    for (Scheme s : {Scheme::kStandard, Scheme::kStandardGs}) {
      if (d.latency_ms[idx(s)]) CHECK(*sky <= *d.latency_ms[idx(s)] + 1e-9);
    }
  }
  CHECK(csv_of(out) == csv_of(run_latency_bench(load_scenario(testing::data_path("small.json")))));
}

TEST_CASE("coverage gaps are counted, not hidden") {
  const auto sc = load_scenario(testing::data_path("gappy.json"));
  const auto out = run_latency_bench(sc);
  CHECK(out.samples == 2 * 1 * 4);
  CHECK(out.coverage_gaps > 0);
  CHECK(out.gap_fraction() > 0.0);
}

TEST_CASE("session bench rows") {
  const auto sc = load_scenario(testing::data_path("small.json"));
  const int h[] = {4};
  const auto out = run_session_bench(sc, h);
  const auto* par = find_row(out, "parallel", "mean_establishment_ms:h=4");
  const auto* ins = find_row(out, "insertion", "mean_establishment_ms:h=4");
  REQUIRE(par != nullptr);
  REQUIRE(ins != nullptr);
  CHECK(par->value < ins->value);
  const auto* saving = find_row(out, "parallel", "saving_fraction:h=4");
  REQUIRE(saving != nullptr);
  CHECK(saving->value == doctest::Approx(1.0 - par->value / ins->value));
}

TEST_CASE("distribution bench with every station deployed") {
  auto sc = load_scenario(testing::data_path("minimal.json"));
  const auto out = run_distribution_bench(sc, 1);
  const auto* g = find_row(out, "greedy", "mean_latency_ms");
  const auto* b = find_row(out, "brute-force", "mean_latency_ms");
  REQUIRE(g != nullptr);
  REQUIRE(b != nullptr);
  CHECK(g->value == b->value);
  CHECK(find_row(out, "kmeans", "mean_latency_ms")->value == g->value);
  CHECK(find_row(out, "greedy", "selected_station:gs-a") != nullptr);
  CHECK(testing::error_kind([&] { run_distribution_bench(sc, 2); }) == ErrorKind::kInput);
}

TEST_CASE("distribution instance from the small scenario") {
  const auto sc = load_scenario(testing::data_path("small.json"));
  const auto inst = build_distribution_instance(sc);
  CHECK(inst.station_count() == 40);
  CHECK(inst.user_count() == 6);
  CHECK(inst.server_count() == 4);
  double demand = 0.0;
  for (std::size_t j = 0; j < 6; ++j) {
    for (std::size_t k = 0; k < 4; ++k) demand += inst.demand(j, k);
  }
  CHECK(demand == doctest::Approx(1.0));
  const auto greedy = solve_distribution(inst, "greedy", 3, 1);
  const auto random = solve_distribution(inst, "random", 3, 1);
  CHECK(greedy.cost <= random.cost);
  CHECK(testing::error_kind([&] { solve_distribution(inst, "annealing", 3, 1); }) == ErrorKind::kInput);
}

TEST_CASE("table reproduction prefers the London anchor") {
  const auto sc = load_scenario(std::string(SKO_TEST_DATA_DIR) + "/../../scenarios/table1.json");
  const auto out = reproduce_table1(sc);
  const auto* london = find_row(out, "london", "total_ms");
  const auto* ashburn = find_row(out, "ashburn", "total_ms");
  REQUIRE(london != nullptr);
  REQUIRE(ashburn != nullptr);
  CHECK(london->value < ashburn->value);
  CHECK(find_row(out, "skyoctopus", "best_anchor:london") != nullptr);
  CHECK(find_row(out, "london", "saved_percent")->value >= 30.0);
  CHECK(find_row(out, "ashburn", "saved_percent")->value == 0.0);
}

TEST_CASE("result rows are validated") {
  ResultRow ok{"latency", "standard", "starlink", 0, "u", "s", "e2e_latency_ms", 12.5};
  CHECK_FALSE(testing::error_kind([&] { validate_row(ok); }));
  auto neg = ok;
  neg.value = -1.0;
  CHECK(testing::error_kind([&] { validate_row(neg); }) == ErrorKind::kInput);
  auto nan = ok;
  nan.value = std::nan("");
  CHECK(testing::error_kind([&] { validate_row(nan); }) == ErrorKind::kInput);
  auto unnamed = ok;
  unnamed.metric.clear();
  CHECK(testing::error_kind([&] { validate_row(unnamed); }) == ErrorKind::kInput);
  std::ostringstream s;
  write_rows_csv(s, std::span<const ResultRow>(&ok, 1));
  CHECK(s.str() == "experiment,scheme,constellation,epoch,user,server,metric,value\n"
                   "latency,standard,starlink,0,u,s,e2e_latency_ms,12.500000\n");
}
