#include "skyoctopus/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "skyoctopus/csv.hpp"
#include "skyoctopus/error.hpp"

namespace skyoct {

const char* to_string(RuleOrigin origin) { return origin == RuleOrigin::kInitial ? "initial" : "updated"; }

const char* to_string(PdrChangeKind kind) {
  switch (kind) {
    case PdrChangeKind::kCreated: return "created";
    case PdrChangeKind::kModified: return "modified";
    case PdrChangeKind::kUnchanged: return "unchanged";
  }
  return "?";
}

void GeoPrefixMap::add(const GeoPrefixEntry& entry) {
  if (!(entry.latitude_deg >= -90.0 && entry.latitude_deg <= 90.0) ||
      !(entry.longitude_deg >= -180.0 && entry.longitude_deg <= 180.0)) {
    fail(ErrorKind::kInput, "geo prefix " + entry.prefix.to_string() + ": coordinates out of range");
  }
  for (const auto& e : entries_) {
    if (e.prefix == entry.prefix) fail(ErrorKind::kInput, "duplicate geo prefix " + entry.prefix.to_string());
  }
  entries_.push_back(entry);
}

std::optional<GeoPrefixEntry> GeoPrefixMap::lookup(Ipv4Address addr) const {
  std::optional<GeoPrefixEntry> best;
  for (const auto& e : entries_) {
    if (e.prefix.contains(addr) && (!best || e.prefix.length() > best->prefix.length())) best = e;
  }
  return best;
}

GeoPrefixMap GeoPrefixMap::load_csv(const std::string& path) {
  GeoPrefixMap map;
  for (const auto& rec : read_csv_file(path)) {
    if (rec.fields.size() != 3) {
      fail(ErrorKind::kLoad, path + ":" + std::to_string(rec.line) + ": expected cidr,lat_deg,lon_deg");
    }
    if (rec.fields[0] == "cidr") continue;
    try {
      map.add({Cidr::parse(rec.fields[0]), parse_double(rec.fields[1]), parse_double(rec.fields[2])});
    } catch (const Error& e) {
      fail(ErrorKind::kLoad, path + ":" + std::to_string(rec.line) + ": " + e.what());
    }
  }
  return map;
}

GeoPrefixMap inject_geo_errors(const GeoPrefixMap& map, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) fail(ErrorKind::kInput, "geo error fraction out of [0, 1]");
  std::vector<GeoPrefixEntry> entries(map.entries().begin(), map.entries().end());
  const auto wrong = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(entries.size())));
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> lon(-180.0, 180.0);
  for (std::size_t i = 0; i < wrong; ++i) {
    auto& e = entries[order[i]];
    e.latitude_deg = rad_to_deg(std::asin(unit(rng)));
    e.longitude_deg = lon(rng);
  }
  GeoPrefixMap out;
  for (const auto& e : entries) out.add(e);
  return out;
}

std::vector<PrefixAssignment> merge_prefixes(std::vector<PrefixAssignment> assignments) {
  std::map<Cidr, std::string> table;
  for (auto& a : assignments) {
    auto [it, inserted] = table.emplace(a.prefix, a.anchor);
    if (!inserted && it->second != a.anchor) {
      fail(ErrorKind::kInput, "prefix " + a.prefix.to_string() + " assigned to two anchors");
    }
  }
  for (int len = 32; len >= 1; --len) {
    std::vector<Cidr> level;
    for (const auto& [prefix, anchor] : table) {
      if (prefix.length() == len) level.push_back(prefix);
    }
    for (const Cidr& prefix : level) {
      const auto self = table.find(prefix);
      if (self == table.end()) continue;
      const auto sib = table.find(prefix.sibling());
      if (sib == table.end() || sib->second != self->second) continue;
      const std::string anchor = self->second;
      table.erase(self);
      table.erase(sib);
      // Any existing entry at the parent was fully shadowed by the two halves.
      table[prefix.parent()] = anchor;
    }
  }
  std::vector<PrefixAssignment> out;
  out.reserve(table.size());
  for (auto& [prefix, anchor] : table) out.push_back({prefix, anchor});
  return out;
}

std::optional<std::string> resolve_assignment(std::span<const PrefixAssignment> assignments, Ipv4Address addr) {
  const PrefixAssignment* best = nullptr;
  for (const auto& a : assignments) {
    if (a.prefix.contains(addr) && (best == nullptr || a.prefix.length() > best->prefix.length())) best = &a;
  }
  if (best == nullptr) return std::nullopt;
  return best->anchor;
}

RuleTables build_initial_pdrs(const GeoPrefixMap& geo, std::span<const GroundSite> anchors,
                              const InitialRuleOptions& options) {
  if (anchors.empty()) fail(ErrorKind::kInput, "build_initial_pdrs: no anchors");
  RuleTables tables;
  std::map<std::string, int> far_of;
  std::uint32_t teid = options.first_teid;
  for (const auto& anchor : anchors) {
    if (far_of.count(anchor.id)) continue;
    const int id = static_cast<int>(tables.fars.size()) + 1;
    tables.fars.push_back({id, anchor.id, teid++});
    far_of[anchor.id] = id;
  }

  std::vector<PrefixAssignment> assignments;
  assignments.reserve(geo.size());
  for (const auto& entry : geo.entries()) {
    GroundSite where{entry.prefix.to_string(), entry.latitude_deg, entry.longitude_deg};
    assignments.push_back({entry.prefix, anchors[nearest_site(where, anchors)].id});
  }

  int next_id = 1;
  for (const auto& a : merge_prefixes(std::move(assignments))) {
    tables.pdrs.push_back({next_id++, options.base_precedence, options.session, a.prefix, far_of.at(a.anchor),
                           RuleOrigin::kInitial});
  }
  const std::string& ip_anchor = options.ip_anchor.empty() ? anchors.front().id : options.ip_anchor;
  const auto ip_far = far_of.find(ip_anchor);
  if (ip_far == far_of.end()) fail(ErrorKind::kInput, "IP-allocating anchor '" + ip_anchor + "' is not deployed");
  tables.pdrs.push_back({next_id, options.default_precedence, options.session, Cidr(Ipv4Address{0}, 0),
                         ip_far->second, RuleOrigin::kInitial});
  return tables;
}

std::vector<ProbeReport> probe_anchors(std::span<const GroundSite> anchors, const GroundSite& server,
                                       Ipv4Address destination, double epoch_s, const TerrestrialModel& terrestrial,
                                       const ProbeModel& probe, std::mt19937_64& rng) {
  std::vector<ProbeReport> out;
  out.reserve(anchors.size());
  std::normal_distribution<double> noise(0.0, probe.noise_sigma_ms);
  for (const auto& anchor : anchors) {
    double latency = terrestrial_latency_ms(anchor, server, terrestrial);
    if (probe.noise_sigma_ms > 0.0) latency += noise(rng);
    out.push_back({anchor.id, destination, std::max(0.0, latency), epoch_s});
  }
  return out;
}

PfcpSessionContext::PfcpSessionContext(SessionId session, std::string user, RuleTables tables, int base_precedence)
    : session_(session), user_(std::move(user)), base_precedence_(base_precedence), fars_(std::move(tables.fars)) {
  if (base_precedence_ <= kUpdatedPrecedenceOffset) {
    fail(ErrorKind::kInput, "base precedence must exceed the updated-rule offset");
  }
  for (std::size_t i = 0; i < fars_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (fars_[i].id == fars_[j].id) fail(ErrorKind::kRuleTable, "duplicate FAR id " + std::to_string(fars_[i].id));
    }
  }
  for (auto& pdr : tables.pdrs) {
    next_pdr_id_ = std::max(next_pdr_id_, pdr.id + 1);
    insert_pdr(pdr);
  }
}

const ForwardingActionRule& PfcpSessionContext::far(int id) const {
  for (const auto& f : fars_) {
    if (f.id == id) return f;
  }
  fail(ErrorKind::kRuleTable, "unknown FAR id " + std::to_string(id));
}

int PfcpSessionContext::far_for_anchor(const std::string& anchor) const {
  for (const auto& f : fars_) {
    if (f.target_anchor == anchor) return f.id;
  }
  fail(ErrorKind::kRuleTable, "no FAR for anchor '" + anchor + "'");
}

std::vector<std::string> PfcpSessionContext::anchors() const {
  std::vector<std::string> out;
  for (const auto& f : fars_) out.push_back(f.target_anchor);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void PfcpSessionContext::sort_rules() {
  std::sort(pdrs_.begin(), pdrs_.end(), [](const PacketDetectionRule& a, const PacketDetectionRule& b) {
    if (a.precedence != b.precedence) return a.precedence < b.precedence;
    if (a.prefix.length() != b.prefix.length()) return a.prefix.length() > b.prefix.length();
    return a.id < b.id;
  });
}

void PfcpSessionContext::insert_pdr(PacketDetectionRule pdr) {
  pdr.session = session_;
  (void)far(pdr.far_id);
  for (const auto& existing : pdrs_) {
    if (existing.id == pdr.id) fail(ErrorKind::kRuleTable, "duplicate PDR id " + std::to_string(pdr.id));
    if (existing.precedence == pdr.precedence && existing.prefix == pdr.prefix) {
      fail(ErrorKind::kRuleTable, "PDR " + pdr.prefix.to_string() + " already exists at precedence " +
                                      std::to_string(pdr.precedence));
    }
  }
  next_pdr_id_ = std::max(next_pdr_id_, pdr.id + 1);
  pdrs_.push_back(pdr);
  sort_rules();
}

const PacketDetectionRule& PfcpSessionContext::match_pdr(Ipv4Address dest) const {
  for (const auto& pdr : pdrs_) {
    if (pdr.prefix.contains(dest)) return pdr;
  }
  fail(ErrorKind::kRuleTable, "no PDR matches " + dest.to_string());
}

PdrChange PfcpSessionContext::trigger_path_update(Ipv4Address dest, double epoch_s,
                                                  std::span<const ProbeReport> probes,
                                                  const std::map<std::string, double>& intra_ms) {
  std::optional<std::pair<double, std::string>> best;
  for (const auto& anchor : anchors()) {
    const ProbeReport* probe = nullptr;
    for (const auto& p : probes) {
      if (p.anchor == anchor && p.destination == dest) {
        probe = &p;
        break;
      }
    }
    const auto intra = intra_ms.find(anchor);
    if (probe == nullptr || intra == intra_ms.end()) {
      fail(ErrorKind::kIncompleteMeasurement,
           "path update for " + dest.to_string() + " at t=" + format_value(epoch_s) + ": no measurement for anchor '" +
               anchor + "'");
    }
    if (!(probe->latency_ms >= 0.0)) fail(ErrorKind::kInput, "negative probe latency for anchor '" + anchor + "'");
    const double total = intra->second + probe->latency_ms;
    // anchors() is sorted, so strict comparison keeps the lowest id on ties.
    if (!best || total < best->first) best = std::make_pair(total, anchor);
  }
  if (!best) fail(ErrorKind::kRuleTable, "session has no anchors");

  seen_.insert(dest);
  const Cidr host = Cidr::host(dest);
  const int precedence = base_precedence_ - kUpdatedPrecedenceOffset;
  const int target_far = far_for_anchor(best->second);
  for (auto& pdr : pdrs_) {
    if (pdr.origin == RuleOrigin::kUpdated && pdr.prefix == host) {
      PdrChange change{PdrChangeKind::kUnchanged, pdr.id, best->second, far(pdr.far_id).target_anchor};
      if (pdr.far_id != target_far) {
        pdr.far_id = target_far;
        change.kind = PdrChangeKind::kModified;
      }
      return change;
    }
  }
  PacketDetectionRule pdr{next_pdr_id_, precedence, session_, host, target_far, RuleOrigin::kUpdated};
  insert_pdr(pdr);
  return {PdrChangeKind::kCreated, pdr.id, best->second, ""};
}

PacketOutcome PfcpSessionContext::process_packet(Ipv4Address dest, double epoch_s) {
  PacketOutcome outcome;
  outcome.anchor = match_packet(dest).target_anchor;
  if (seen_.insert(dest).second) outcome.events.push_back({session_, dest, epoch_s});
  return outcome;
}

void PfcpSessionContext::write_rules_csv(std::ostream& out, bool header) const {
  if (header) out << "session,precedence,prefix,anchor,origin\n";
  for (const auto& pdr : pdrs_) {
    out << session_ << ',' << pdr.precedence << ',' << pdr.prefix.to_string() << ','
        << far(pdr.far_id).target_anchor << ',' << to_string(pdr.origin) << '\n';
  }
}

}  // namespace skyoct
