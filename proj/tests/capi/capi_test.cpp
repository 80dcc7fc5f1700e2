#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "skyoctopus/skyoctopus.h"

namespace {

std::string data(const char* name) { return std::string(SKO_TEST_DATA_DIR) + "/" + name; }

std::string temp(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(sko_status_name(SKO_OK)) == "ok");
  CHECK(std::string(sko_version()) == "1.0.0");
}

TEST_CASE("scenario handle lifecycle") {
  sko_scenario* sc = nullptr;
  REQUIRE(sko_scenario_load(data("small.json").c_str(), &sc) == SKO_OK);
  size_t users = 0;
  CHECK(sko_scenario_user_count(sc, &users) == SKO_OK);
  CHECK(users == 6);
  CHECK(sko_scenario_max_gap_fraction(sc) == doctest::Approx(0.05));
  CHECK(sko_scenario_set_epoch_count(sc, 1) == SKO_OK);
  CHECK(sko_scenario_select_constellation(sc, "oneweb") == SKO_OK);
  CHECK(sko_scenario_select_constellation(sc, "missing") != SKO_OK);
  CHECK(std::string(sko_last_error()).find("missing") != std::string::npos);

  const auto out = temp("sko_capi_latency.csv");
  sko_run_stats stats{};
  CHECK(sko_run_latency_bench(sc, out.c_str(), &stats) == SKO_OK);
  CHECK(stats.samples == 6 * 4);
  CHECK(slurp(out).rfind("experiment,scheme,constellation,epoch,user,server,metric,value\n", 0) == 0);
  CHECK(slurp(out).find(",oneweb,") != std::string::npos);

  const int h[] = {1, 3};
  CHECK(sko_run_session_bench(sc, h, 2, out.c_str(), &stats) == SKO_OK);
  CHECK(slurp(out).find("saving_fraction:h=3") != std::string::npos);
  CHECK(sko_run_session_bench(sc, nullptr, 0, out.c_str(), nullptr) == SKO_OK);
  CHECK(slurp(out).find("mean_establishment_ms:h=10") != std::string::npos);
  std::filesystem::remove(out);
  sko_scenario_destroy(sc);

  sko_scenario* bad = nullptr;
  CHECK(sko_scenario_load(data("bad_anchor.json").c_str(), &bad) == SKO_ERR_LOAD);
  CHECK(bad == nullptr);
  CHECK(std::string(sko_last_error()).find("gs-missing") != std::string::npos);
  CHECK(sko_scenario_load(nullptr, &bad) == SKO_ERR_INPUT);
}

TEST_CASE("coverage gaps are reported in the stats") {
  sko_scenario* sc = nullptr;
  REQUIRE(sko_scenario_load(data("gappy.json").c_str(), &sc) == SKO_OK);
  sko_run_stats stats{};
  const auto out = temp("sko_capi_gappy.csv");
  const sko_status st = sko_run_latency_bench(sc, out.c_str(), &stats);
  CHECK(stats.samples == 8);
  CHECK(stats.coverage_gaps > 0);
  CHECK(st == SKO_OK);
  std::filesystem::remove(out);
  sko_scenario_destroy(sc);
}

TEST_CASE("geometry helpers") {
  const sko_shell shell{72, 22, 550.0, 53.0, 0.0};
  double p[3];
  REQUIRE(sko_satellite_position(&shell, 0, 0, 0.0, p) == SKO_OK);
  CHECK(std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) == doctest::Approx(6921.0));
  CHECK(sko_satellite_position(&shell, 72, 0, 0.0, p) == SKO_ERR_INPUT);
  const double a[3] = {0, 0, 0}, b[3] = {299.792458, 0, 0};
  CHECK(sko_link_delay_ms(a, b) == doctest::Approx(1.0));
  double total = 0.0;
  CHECK(sko_end_to_end_latency(&shell, 60.0, 42.2, -60.0, 51.5074, -0.1278, 48.8566, 2.3522, &total) == SKO_OK);
  CHECK(total > 10.0);
  CHECK(total < 100.0);
  const sko_shell broken{0, 22, 550.0, 53.0, 0.0};
  CHECK(sko_satellite_position(&broken, 0, 0, 0.0, p) == SKO_ERR_INPUT);
}

TEST_CASE("classifier handle") {
  const sko_anchor_site anchors[] = {{"ashburn", 39.0438, -77.4874}, {"london", 51.5074, -0.1278}};
  sko_classifier* cl = nullptr;
  REQUIRE(sko_classifier_create(data("geo.csv").c_str(), anchors, 2, &cl) == SKO_OK);
  char buf[32];
  CHECK(sko_classifier_match(cl, "203.0.113.5", buf, sizeof buf) == SKO_OK);
  CHECK(std::string(buf) == "london");
  CHECK(sko_classifier_match(cl, "198.51.100.9", buf, sizeof buf) == SKO_OK);
  CHECK(std::string(buf) == "ashburn");
  CHECK(sko_classifier_match(cl, "not-an-ip", buf, sizeof buf) == SKO_ERR_INPUT);
  CHECK(sko_classifier_match(cl, "203.0.113.5", buf, 2) == SKO_ERR_INPUT);

  const double probe[] = {5.0, 50.0}, intra[] = {5.0, 50.0};
  CHECK(sko_classifier_path_update(cl, "203.0.113.5", 0.0, probe, intra) == SKO_OK);
  CHECK(sko_classifier_match(cl, "203.0.113.5", buf, sizeof buf) == SKO_OK);
  CHECK(std::string(buf) == "ashburn");
  CHECK(sko_classifier_match(cl, "203.0.113.6", buf, sizeof buf) == SKO_OK);
  CHECK(std::string(buf) == "london");
  const double missing[] = {5.0, NAN};
  CHECK(sko_classifier_path_update(cl, "203.0.113.5", 1.0, missing, intra) == SKO_ERR_INCOMPLETE_MEASUREMENT);

  const auto out = temp("sko_capi_rules.csv");
  CHECK(sko_classifier_dump_rules(cl, out.c_str()) == SKO_OK);
  CHECK(slurp(out).find("203.0.113.5/32,ashburn") != std::string::npos);
  std::filesystem::remove(out);
  sko_classifier_destroy(cl);
}

TEST_CASE("instance handle") {
  sko_instance* inst = nullptr;
  REQUIRE(sko_instance_load(data("instance.json").c_str(), &inst) == SKO_OK);
  size_t chosen[3];
  double cost = 0.0;
  CHECK(sko_instance_solve(inst, SKO_ALG_BRUTE_FORCE, 1, 0, chosen, &cost) == SKO_OK);
  CHECK(chosen[0] == 1);
  CHECK(cost == 8.0);
  CHECK(sko_instance_solve(inst, SKO_ALG_GREEDY, 2, 0, chosen, &cost) == SKO_OK);
  CHECK(chosen[0] == 0);
  CHECK(chosen[1] == 2);
  CHECK(cost == 2.0);
  CHECK(sko_instance_solve(inst, SKO_ALG_GREEDY, 4, 0, chosen, &cost) == SKO_ERR_INPUT);
  sko_instance_destroy(inst);
}

TEST_CASE("establishment time") {
  double ms = 0.0;
  CHECK(sko_establishment_time(SKO_EST_PARALLEL, 20, nullptr, &ms) == SKO_OK);
  CHECK(ms == doctest::Approx(144.0));
  CHECK(sko_establishment_time(SKO_EST_INSERTION, 20, nullptr, &ms) == SKO_OK);
  CHECK(ms == doctest::Approx(1878.0));
  CHECK(sko_establishment_time(SKO_EST_PARALLEL, 3, data("timing_dead_anchor.json").c_str(), &ms) == SKO_ERR_TIMEOUT);
  CHECK(sko_establishment_time(SKO_EST_PARALLEL, 0, nullptr, &ms) == SKO_ERR_INPUT);
}
