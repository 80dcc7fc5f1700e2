#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace skyoct {

// Node names used in traces: "UE", "gNB", "S-UPF", "core", "UDM", "PCF",
// "I-UPF", and "anchor-<i>" for the i-th anchor.
std::string anchor_node(int index);

// "anchor-3" -> "anchor", "S-UPF-2" -> "S-UPF"; other names are returned as is.
std::string node_role(std::string_view node);

struct TimingModel {
  double nf_processing_ms = 2.0;

  // Symmetric one-way delays. A lookup for a specific node falls back to its
  // role, so "core"/"anchor" covers every anchor without an override.
  void set_leg(const std::string& a, const std::string& b, double ms);
  double leg(const std::string& a, const std::string& b) const;
  bool has_leg(const std::string& a, const std::string& b) const;
  const std::map<std::pair<std::string, std::string>, double>& legs() const { return legs_; }

  // Negative or NaN delays are rejected; +inf marks an unresponsive node.
  void validate() const;

  static TimingModel defaults();

  // {"nf_processing_ms": 2, "legs": [{"a": "UE", "b": "gNB", "ms": 3}, ...]}
  // Entries override the defaults; "ms": null marks an unresponsive leg.
  static TimingModel from_json(const nlohmann::json& doc);

 private:
  std::map<std::pair<std::string, std::string>, double> legs_;
};

struct TraceEvent {
  double time_ms = 0.0;  // when the receiver finished handling the message
  std::string sender;
  std::string receiver;
  std::string message;
  std::string step;
  int cause = -1;  // index of the triggering event, -1 for the initial message
};

struct EstablishmentTrace {
  std::vector<TraceEvent> events;
  double total_duration_ms = 0.0;
  std::string assigned_ip_anchor;
  std::uint32_t ip_token = 0;
  std::vector<std::uint32_t> anchor_teids;

  // time_ms,sender,receiver,message
  void write_csv(std::ostream& out) const;
};

struct EstablishmentOptions {
  int ip_anchor = 0;
  std::uint32_t first_teid = 0x1000;
  std::uint32_t ip_token = 0x0A2D0002;  // 10.45.0.2
  // Makes the S-UPF report a TEID list that disagrees with the anchors.
  bool corrupt_supf_teid = false;
};

// Multi-anchor procedure: PFCP establishment fans out to every anchor at
// once; radio setup and the S-UPF modification run concurrently.
EstablishmentTrace establish_parallel(int n_anchors, const TimingModel& timing, const EstablishmentOptions& options = {});

// Single-anchor establishment followed by one sequential insertion round
// (anchor establishment + I-UPF modification) per additional anchor.
EstablishmentTrace establish_insertion_based(int n_anchors, const TimingModel& timing,
                                             const EstablishmentOptions& options = {});

struct PduSession {
  std::uint64_t session_id = 0;
  std::string user;
  std::uint32_t ip_token = 0;
  std::vector<std::string> anchors;
  std::string serving_supf;
};

PduSession make_pdu_session(const EstablishmentTrace& trace, std::uint64_t session_id, std::string user,
                            std::string serving_supf, int n_anchors);

struct HandoverResult {
  PduSession session;
  double interruption_ms = 0.0;
};

// Swaps the serving S-UPF with one PFCP modification exchange; anchors and
// the IP token are untouched.
HandoverResult supf_handover(const PduSession& session, const std::string& new_supf, const TimingModel& timing,
                             std::span<const std::string> known_supfs);

struct SweepRow {
  int h = 0;
  std::string scheme;  // "parallel" or "insertion"
  double mean_ms = 0.0;
};

// Mean establishment time per (h, scheme). With repetitions > 1 every leg
// delay is scaled by an independent factor in [1 - jitter, 1 + jitter].
std::vector<SweepRow> session_establishment_sweep(std::span<const int> h_values, const TimingModel& timing,
                                                  int repetitions, std::uint64_t seed, double jitter = 0.1);

}  // namespace skyoct
