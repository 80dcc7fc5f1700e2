#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "skyoctopus/geo.hpp"
#include "skyoctopus/ipv4.hpp"
#include "skyoctopus/latency.hpp"

namespace skyoct {

using SessionId = std::uint64_t;

enum class RuleOrigin { kInitial, kUpdated };
const char* to_string(RuleOrigin origin);

// Lower precedence value = higher priority.
struct PacketDetectionRule {
  int id = 0;
  int precedence = 0;
  SessionId session = 0;
  Cidr prefix;
  int far_id = 0;
  RuleOrigin origin = RuleOrigin::kInitial;
};

struct ForwardingActionRule {
  int id = 0;
  std::string target_anchor;
  std::uint32_t teid = 0;
};

struct RuleTables {
  std::vector<PacketDetectionRule> pdrs;
  std::vector<ForwardingActionRule> fars;
};

// BAR/QER/URR associations are carried with the session but never enforced.
struct AuxiliaryRuleSlots {
  std::vector<int> bar_ids;
  std::vector<int> qer_ids;
  std::vector<int> urr_ids;
};

struct GeoPrefixEntry {
  Cidr prefix;
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
};

class GeoPrefixMap {
 public:
  void add(const GeoPrefixEntry& entry);
  std::span<const GeoPrefixEntry> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  // Longest-prefix match.
  std::optional<GeoPrefixEntry> lookup(Ipv4Address addr) const;

  // CSV: cidr,lat_deg,lon_deg
  static GeoPrefixMap load_csv(const std::string& path);

 private:
  std::vector<GeoPrefixEntry> entries_;
};

// Replaces the coordinates of round(fraction * size) entries, picked by a
// seeded generator, with uniformly random surface points.
GeoPrefixMap inject_geo_errors(const GeoPrefixMap& map, double fraction, std::uint64_t seed);

struct PrefixAssignment {
  Cidr prefix;
  std::string anchor;

  bool operator==(const PrefixAssignment&) const = default;
};

// Collapses sibling prefixes mapped to the same anchor into their parent
// until no such pair remains. Longest-match semantics are preserved for
// every address. Output is sorted by (network, length).
std::vector<PrefixAssignment> merge_prefixes(std::vector<PrefixAssignment> assignments);

// Anchor of an address under longest-prefix match over `assignments`.
std::optional<std::string> resolve_assignment(std::span<const PrefixAssignment> assignments, Ipv4Address addr);

struct InitialRuleOptions {
  SessionId session = 1;
  int base_precedence = 1000;
  int default_precedence = 65535;
  std::string ip_anchor;  // empty: first anchor
  std::uint32_t first_teid = 1;
};

RuleTables build_initial_pdrs(const GeoPrefixMap& geo, std::span<const GroundSite> anchors,
                              const InitialRuleOptions& options = {});

struct ProbeReport {
  std::string anchor;
  Ipv4Address destination;
  double latency_ms = 0.0;
  double epoch_s = 0.0;
};

struct ProbeModel {
  double noise_sigma_ms = 0.5;
};

// Terrestrial latency from every anchor to the server plus Gaussian noise,
// clamped at zero.
std::vector<ProbeReport> probe_anchors(std::span<const GroundSite> anchors, const GroundSite& server,
                                       Ipv4Address destination, double epoch_s, const TerrestrialModel& terrestrial,
                                       const ProbeModel& probe, std::mt19937_64& rng);

enum class PdrChangeKind { kCreated, kModified, kUnchanged };
const char* to_string(PdrChangeKind kind);

struct PdrChange {
  PdrChangeKind kind = PdrChangeKind::kUnchanged;
  int pdr_id = 0;
  std::string anchor;
  std::string previous_anchor;  // empty when created
};

struct PathUpdateRequest {
  SessionId session = 0;
  Ipv4Address destination;
  double epoch_s = 0.0;
};

struct PacketOutcome {
  std::string anchor;
  std::vector<PathUpdateRequest> events;
};

// Rule engine state of one S-UPF session. Single writer.
class PfcpSessionContext {
 public:
  static constexpr int kUpdatedPrecedenceOffset = 900;

  PfcpSessionContext(SessionId session, std::string user, RuleTables tables, int base_precedence = 1000);

  SessionId session() const { return session_; }
  const std::string& user() const { return user_; }
  std::span<const PacketDetectionRule> pdrs() const { return pdrs_; }
  std::span<const ForwardingActionRule> fars() const { return fars_; }
  const std::set<Ipv4Address>& seen() const { return seen_; }
  AuxiliaryRuleSlots& auxiliary() { return aux_; }
  const AuxiliaryRuleSlots& auxiliary() const { return aux_; }

  const ForwardingActionRule& far(int id) const;
  const PacketDetectionRule& match_pdr(Ipv4Address dest) const;
  const ForwardingActionRule& match_packet(Ipv4Address dest) const { return far(match_pdr(dest).far_id); }

  // Distinct anchors reachable through the FAR table, sorted.
  std::vector<std::string> anchors() const;

  void insert_pdr(PacketDetectionRule pdr);

  // Applies a completed measurement round for `dest`. Throws
  // kIncompleteMeasurement (leaving the context untouched) when any anchor
  // lacks a probe or an intra-network estimate.
  PdrChange trigger_path_update(Ipv4Address dest, double epoch_s, std::span<const ProbeReport> probes,
                                const std::map<std::string, double>& intra_ms);

  // Forwards by the current rules; the first packet to an unseen
  // destination also requests a path update.
  PacketOutcome process_packet(Ipv4Address dest, double epoch_s);

  // session,precedence,prefix,anchor,origin
  void write_rules_csv(std::ostream& out, bool header = true) const;

 private:
  void sort_rules();
  int far_for_anchor(const std::string& anchor) const;

  SessionId session_;
  std::string user_;
  int base_precedence_;
  std::vector<PacketDetectionRule> pdrs_;
  std::vector<ForwardingActionRule> fars_;
  AuxiliaryRuleSlots aux_;
  std::set<Ipv4Address> seen_;
  int next_pdr_id_ = 1;
};

// Fraction of destinations whose first updated anchor equals the initial one.
class ConcordanceTally {
 public:
  void record(const std::string& initial_anchor, const std::string& updated_anchor) {
    ++total_;
    if (initial_anchor == updated_anchor) ++concordant_;
  }
  std::size_t total() const { return total_; }
  std::size_t concordant() const { return concordant_; }
  double rate() const { return total_ == 0 ? 0.0 : static_cast<double>(concordant_) / static_cast<double>(total_); }

 private:
  std::size_t total_ = 0;
  std::size_t concordant_ = 0;
};

}  // namespace skyoct
