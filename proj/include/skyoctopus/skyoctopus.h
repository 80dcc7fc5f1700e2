#ifndef SKYOCTOPUS_H
#define SKYOCTOPUS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SKO_BUILDING_LIBRARY)
#define SKO_API __declspec(dllexport)
#else
#define SKO_API __declspec(dllimport)
#endif
#else
#define SKO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sko_status {
  SKO_OK = 0,
  SKO_ERR_INPUT = 1,
  SKO_ERR_LOAD = 2,
  SKO_ERR_COVERAGE_GAP = 3,
  SKO_ERR_RULE_TABLE = 4,
  SKO_ERR_INCOMPLETE_MEASUREMENT = 5,
  SKO_ERR_TIMEOUT = 6,
  SKO_ERR_TEID_MISMATCH = 7,
  SKO_ERR_TOO_LARGE = 8,
  SKO_ERR_IO = 9,
  SKO_ERR_INTERNAL = 10
} sko_status;

/* Message of the last failed call on this thread; empty after success. */
SKO_API const char* sko_last_error(void);
SKO_API const char* sko_status_name(sko_status status);
SKO_API const char* sko_version(void);

typedef struct sko_scenario sko_scenario;

typedef struct sko_run_stats {
  uint64_t samples;
  uint64_t coverage_gaps;
} sko_run_stats;

SKO_API sko_status sko_scenario_load(const char* path, sko_scenario** out);
SKO_API void sko_scenario_destroy(sko_scenario* scenario);
/* Setters reload the scenario file with the override applied. */
SKO_API sko_status sko_scenario_set_seed(sko_scenario* scenario, uint64_t seed);
SKO_API sko_status sko_scenario_set_epoch_count(sko_scenario* scenario, int count);
SKO_API sko_status sko_scenario_select_constellation(sko_scenario* scenario, const char* name);
/* Negative arguments leave the corresponding parameter unchanged. */
SKO_API sko_status sko_scenario_set_terrestrial(sko_scenario* scenario, double medium_speed_km_s, double inflation,
                                                double fixed_overhead_ms);
SKO_API sko_status sko_scenario_user_count(const sko_scenario* scenario, size_t* out);
SKO_API double sko_scenario_max_gap_fraction(const sko_scenario* scenario);

/* Each run writes a CSV to out_path; stats may be NULL. */
SKO_API sko_status sko_run_latency_bench(const sko_scenario* scenario, const char* out_path, sko_run_stats* stats);
/* h_values may be NULL to use the scenario's list. */
SKO_API sko_status sko_run_session_bench(const sko_scenario* scenario, const int* h_values, size_t h_count,
                                         const char* out_path, sko_run_stats* stats);
/* h == 0 uses the scenario's value. */
SKO_API sko_status sko_run_distribution_bench(const sko_scenario* scenario, size_t h, const char* out_path,
                                              sko_run_stats* stats);
SKO_API sko_status sko_reproduce_table1(const sko_scenario* scenario, const char* out_path, sko_run_stats* stats);

/* Constellation geometry. Positions are ECEF kilometres. */
typedef struct sko_shell {
  int plane_count;
  int sats_per_plane;
  double altitude_km;
  double inclination_deg;
  double phase_offset;
} sko_shell;

SKO_API sko_status sko_satellite_position(const sko_shell* shell, int plane, int slot, double epoch_s,
                                          double out_xyz[3]);
SKO_API double sko_link_delay_ms(const double a_xyz[3], const double b_xyz[3]);
/* End-to-end latency of one anchor for a user/server pair. */
SKO_API sko_status sko_end_to_end_latency(const sko_shell* shell, double epoch_s, double user_lat, double user_lon,
                                          double anchor_lat, double anchor_lon, double server_lat, double server_lon,
                                          double* out_total_ms);

/* Traffic classifier session. */
typedef struct sko_classifier sko_classifier;

typedef struct sko_anchor_site {
  const char* id;
  double latitude_deg;
  double longitude_deg;
} sko_anchor_site;

SKO_API sko_status sko_classifier_create(const char* geo_csv_path, const sko_anchor_site* anchors,
                                         size_t anchor_count, sko_classifier** out);
SKO_API void sko_classifier_destroy(sko_classifier* classifier);
/* Writes the anchor id matched for a dotted-quad destination into buf. */
SKO_API sko_status sko_classifier_match(const sko_classifier* classifier, const char* destination, char* buf,
                                        size_t buf_len);
/* probe_ms and intra_ms are aligned with the anchors given at creation; NaN marks a missing measurement. */
SKO_API sko_status sko_classifier_path_update(sko_classifier* classifier, const char* destination, double epoch_s,
                                              const double* probe_ms, const double* intra_ms);
SKO_API sko_status sko_classifier_dump_rules(const sko_classifier* classifier, const char* out_path);

/* Distribution problem instance (JSON). */
typedef struct sko_instance sko_instance;

typedef enum sko_algorithm {
  SKO_ALG_GREEDY = 0,
  SKO_ALG_KMEANS = 1,
  SKO_ALG_RANDOM = 2,
  SKO_ALG_BRUTE_FORCE = 3
} sko_algorithm;

SKO_API sko_status sko_instance_load(const char* path, sko_instance** out);
SKO_API void sko_instance_destroy(sko_instance* instance);
/* chosen receives h sorted station indices. */
SKO_API sko_status sko_instance_solve(const sko_instance* instance, sko_algorithm algorithm, size_t h, uint64_t seed,
                                      size_t* chosen, double* out_cost);

typedef enum sko_establishment {
  SKO_EST_PARALLEL = 0,
  SKO_EST_INSERTION = 1
} sko_establishment;

/* Establishment time with the default timing model, or the one in timing_json_path when non-NULL. */
SKO_API sko_status sko_establishment_time(sko_establishment kind, int n_anchors, const char* timing_json_path,
                                          double* out_ms);

#ifdef __cplusplus
}
#endif

#endif
