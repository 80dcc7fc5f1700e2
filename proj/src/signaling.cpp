#include "skyoctopus/signaling.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <random>

#include <nlohmann/json.hpp>

#include "skyoctopus/csv.hpp"
#include "skyoctopus/error.hpp"

namespace skyoct {
namespace {

std::pair<std::string, std::string> leg_key(const std::string& a, const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

// Minimal discrete-event engine: a message sent at t from A to B is handled
// at t + leg(A, B) + processing, after which B's handler may send more.
class Simulator {
 public:
  using Handler = std::function<void(int event_index, double now)>;

  explicit Simulator(const TimingModel& timing) : timing_(timing) {}

  void on(const std::string& receiver, const std::string& message, Handler handler) {
    handlers_[{receiver, message}] = std::move(handler);
  }

  void send(const std::string& from, const std::string& to, const std::string& message, const std::string& step,
            double now, int cause) {
    const double delay = from == to ? 0.0 : timing_.leg(from, to);
    if (!std::isfinite(delay)) {
      fail(ErrorKind::kEstablishmentTimeout, "'" + to + "' did not answer " + message);
    }
    pending_.push({now + delay + timing_.nf_processing_ms, seq_++, TraceEvent{0.0, from, to, message, step, cause}});
  }

  void run() {
    while (!pending_.empty()) {
      Pending next = pending_.top();
      pending_.pop();
      next.event.time_ms = next.time;
      trace_.push_back(next.event);
      const int index = static_cast<int>(trace_.size()) - 1;
      const auto handler = handlers_.find({next.event.receiver, next.event.message});
      if (handler != handlers_.end()) handler->second(index, next.time);
    }
  }

  std::vector<TraceEvent>& trace() { return trace_; }

 private:
  struct Pending {
    double time;
    long seq;
    TraceEvent event;
    bool operator>(const Pending& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };

  const TimingModel& timing_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> pending_;
  std::map<std::pair<std::string, std::string>, Handler> handlers_;
  std::vector<TraceEvent> trace_;
  long seq_ = 0;
};

void check_anchor_count(int n_anchors) {
  if (n_anchors < 1) fail(ErrorKind::kInput, "establishment needs at least one anchor");
}

// Steps 1-3: request relay and subscription/policy retrieval; `then` runs
// once the policy answer has been handled at the core.
void wire_request_phase(Simulator& sim, const std::function<void(int, double)>& then) {
  sim.on("gNB", "PDUSessionEstablishmentRequest", [&sim](int idx, double now) {
    sim.send("gNB", "core", "PDUSessionEstablishmentRequest", "1", now, idx);
  });
  sim.on("core", "PDUSessionEstablishmentRequest", [&sim](int idx, double now) {
    sim.send("core", "UDM", "SubscriptionDataRequest", "2", now, idx);
  });
  sim.on("UDM", "SubscriptionDataRequest", [&sim](int idx, double now) {
    sim.send("UDM", "core", "SubscriptionDataResponse", "2", now, idx);
  });
  sim.on("core", "SubscriptionDataResponse", [&sim](int idx, double now) {
    sim.send("core", "PCF", "PolicyRequest", "3", now, idx);
  });
  sim.on("PCF", "PolicyRequest", [&sim](int idx, double now) {
    sim.send("PCF", "core", "PolicyResponse", "3", now, idx);
  });
  sim.on("core", "PolicyResponse", then);
}

// Radio resource setup through the gNB (5.a.1 - 5.a.3).
void wire_radio_setup(Simulator& sim, const std::function<void(int, double)>& then) {
  sim.on("gNB", "N2ResourceSetupRequest", [&sim](int idx, double now) {
    sim.send("gNB", "UE", "RRCReconfiguration", "5a", now, idx);
  });
  sim.on("UE", "RRCReconfiguration", [&sim](int idx, double now) {
    sim.send("UE", "gNB", "RRCReconfigurationComplete", "5a", now, idx);
  });
  sim.on("gNB", "RRCReconfigurationComplete", [&sim](int idx, double now) {
    sim.send("gNB", "core", "N2ResourceSetupResponse", "5a", now, idx);
  });
  sim.on("core", "N2ResourceSetupResponse", then);
}

void answer_pfcp(Simulator& sim, const std::string& node, const std::string& request, const std::string& response,
                 const std::string& step) {
  sim.on(node, request, [&sim, node, response, step](int idx, double now) {
    sim.send(node, "core", response, step, now, idx);
  });
}

EstablishmentTrace finish(std::vector<TraceEvent> events, int n_anchors, const EstablishmentOptions& options) {
  EstablishmentTrace trace;
  trace.events = std::move(events);
  for (const auto& e : trace.events) trace.total_duration_ms = std::max(trace.total_duration_ms, e.time_ms);
  trace.assigned_ip_anchor = anchor_node(options.ip_anchor);
  trace.ip_token = options.ip_token;
  for (int i = 0; i < n_anchors; ++i) trace.anchor_teids.push_back(options.first_teid + static_cast<std::uint32_t>(i));
  return trace;
}

}  // namespace

std::string anchor_node(int index) { return "anchor-" + std::to_string(index); }

std::string node_role(std::string_view node) {
  const auto dash = node.rfind('-');
  if (dash == std::string_view::npos || dash + 1 == node.size()) return std::string(node);
  for (std::size_t i = dash + 1; i < node.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(node[i]))) return std::string(node);
  }
  return std::string(node.substr(0, dash));
}

void TimingModel::set_leg(const std::string& a, const std::string& b, double ms) {
  if (std::isnan(ms) || ms < 0.0) fail(ErrorKind::kInput, "leg " + a + "<->" + b + ": delay must be >= 0");
  legs_[leg_key(a, b)] = ms;
}

bool TimingModel::has_leg(const std::string& a, const std::string& b) const {
  const std::string ra = node_role(a), rb = node_role(b);
  return legs_.count(leg_key(a, b)) || legs_.count(leg_key(ra, b)) || legs_.count(leg_key(a, rb)) ||
         legs_.count(leg_key(ra, rb));
}

double TimingModel::leg(const std::string& a, const std::string& b) const {
  const std::string ra = node_role(a), rb = node_role(b);
  for (const auto& key : {leg_key(a, b), leg_key(ra, b), leg_key(a, rb), leg_key(ra, rb)}) {
    const auto it = legs_.find(key);
    if (it != legs_.end()) return it->second;
  }
  fail(ErrorKind::kInput, "no leg delay configured between '" + a + "' and '" + b + "'");
}

void TimingModel::validate() const {
  if (!(nf_processing_ms >= 0.0) || !std::isfinite(nf_processing_ms)) {
    fail(ErrorKind::kInput, "nf_processing must be a finite value >= 0");
  }
  for (const auto& [key, ms] : legs_) {
    if (std::isnan(ms) || ms < 0.0) fail(ErrorKind::kInput, "leg " + key.first + "<->" + key.second + " is negative");
  }
}

TimingModel TimingModel::defaults() {
  TimingModel t;
  t.nf_processing_ms = 2.0;
  t.set_leg("UE", "gNB", 3.0);
  t.set_leg("gNB", "core", 15.0);
  t.set_leg("S-UPF", "core", 15.0);
  t.set_leg("gNB", "S-UPF", 0.1);
  t.set_leg("core", "UDM", 1.0);
  t.set_leg("core", "PCF", 1.0);
  t.set_leg("core", "anchor", 30.0);
  t.set_leg("core", "I-UPF", 10.0);
  return t;
}

TimingModel TimingModel::from_json(const nlohmann::json& doc) {
  TimingModel t = defaults();
  try {
    if (doc.contains("nf_processing_ms")) t.nf_processing_ms = doc.at("nf_processing_ms").get<double>();
    if (doc.contains("legs")) {
      for (const auto& leg : doc.at("legs")) {
        const double ms = leg.at("ms").is_null() ? std::numeric_limits<double>::infinity() : leg.at("ms").get<double>();
        t.set_leg(leg.at("a").get<std::string>(), leg.at("b").get<std::string>(), ms);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kLoad, std::string("timing: ") + e.what());
  }
  t.validate();
  return t;
}

void EstablishmentTrace::write_csv(std::ostream& out) const {
  out << "time_ms,sender,receiver,message\n";
  for (const auto& e : events) {
    out << format_value(e.time_ms) << ',' << e.sender << ',' << e.receiver << ',' << e.message << '\n';
  }
}

EstablishmentTrace establish_parallel(int n_anchors, const TimingModel& timing, const EstablishmentOptions& options) {
  check_anchor_count(n_anchors);
  if (options.ip_anchor < 0 || options.ip_anchor >= n_anchors) fail(ErrorKind::kInput, "IP anchor out of range");
  timing.validate();
  Simulator sim(timing);

  int pfcp_answers = 0;
  int step5_done = 0;
  std::vector<std::uint32_t> anchor_teids;
  for (int i = 0; i < n_anchors; ++i) anchor_teids.push_back(options.first_teid + static_cast<std::uint32_t>(i));
  std::vector<std::uint32_t> supf_teids = anchor_teids;
  if (options.corrupt_supf_teid) supf_teids.back() ^= 0xffffu;

  // Step 4: PFCP establishment towards every anchor at once.
  wire_request_phase(sim, [&](int idx, double now) {
    for (int i = 0; i < n_anchors; ++i) {
      sim.send("core", anchor_node(i), "PFCPSessionEstablishmentRequest", "4", now, idx);
    }
  });
  for (int i = 0; i < n_anchors; ++i) {
    answer_pfcp(sim, anchor_node(i), "PFCPSessionEstablishmentRequest", "PFCPSessionEstablishmentResponse", "4");
  }

  // Step 5: 5.a radio setup and 5.b S-UPF modification in parallel; step 6
  // once both have answered.
  auto step6 = [&](int idx, double now) {
    if (++step5_done < 2) return;
    sim.send("core", "core", "TEIDVerification", "6", now, idx);
  };
  sim.on("core", "PFCPSessionEstablishmentResponse", [&](int idx, double now) {
    if (++pfcp_answers < n_anchors) return;
    sim.send("core", "gNB", "N2ResourceSetupRequest", "5a", now, idx);
    sim.send("core", "S-UPF", "PFCPSessionModificationRequest", "5b", now, idx);
  });
  wire_radio_setup(sim, step6);
  answer_pfcp(sim, "S-UPF", "PFCPSessionModificationRequest", "PFCPSessionModificationResponse", "5b");
  sim.on("core", "PFCPSessionModificationResponse", step6);
  sim.on("core", "TEIDVerification", [&](int, double) {
    if (supf_teids != anchor_teids) fail(ErrorKind::kTeidMismatch, "S-UPF TEID list does not match the anchors");
  });

  sim.send("UE", "gNB", "PDUSessionEstablishmentRequest", "1", 0.0, -1);
  sim.run();
  return finish(std::move(sim.trace()), n_anchors, options);
}

EstablishmentTrace establish_insertion_based(int n_anchors, const TimingModel& timing,
                                             const EstablishmentOptions& options) {
  check_anchor_count(n_anchors);
  if (options.ip_anchor != 0) fail(ErrorKind::kInput, "insertion-based establishment allocates the IP at anchor 0");
  timing.validate();
  Simulator sim(timing);

  int next_anchor = 1;
  auto insert_next = [&](int idx, double now) {
    if (next_anchor >= n_anchors) return;
    sim.send("core", anchor_node(next_anchor), "PFCPSessionEstablishmentRequest", "insert", now, idx);
  };

  wire_request_phase(sim, [&](int idx, double now) {
    sim.send("core", anchor_node(0), "PFCPSessionEstablishmentRequest", "4", now, idx);
  });
  for (int i = 0; i < n_anchors; ++i) {
    answer_pfcp(sim, anchor_node(i), "PFCPSessionEstablishmentRequest", "PFCPSessionEstablishmentResponse",
                i == 0 ? "4" : "insert");
  }
  answer_pfcp(sim, anchor_node(0), "PFCPSessionModificationRequest", "PFCPSessionModificationResponse", "5b");
  answer_pfcp(sim, "I-UPF", "PFCPSessionModificationRequest", "PFCPSessionModificationResponse", "insert");

  bool base_done = false;
  sim.on("core", "PFCPSessionEstablishmentResponse", [&](int idx, double now) {
    if (!base_done) {
      sim.send("core", "gNB", "N2ResourceSetupRequest", "5a", now, idx);
      return;
    }
    sim.send("core", "I-UPF", "PFCPSessionModificationRequest", "insert", now, idx);
  });
  // Radio setup done: hand the gNB tunnel to the anchor.
  wire_radio_setup(sim, [&](int idx, double now) {
    sim.send("core", anchor_node(0), "PFCPSessionModificationRequest", "5b", now, idx);
  });
  sim.on("core", "PFCPSessionModificationResponse", [&](int idx, double now) {
    if (!base_done) {
      base_done = true;
    } else {
      ++next_anchor;
    }
    insert_next(idx, now);
  });

  sim.send("UE", "gNB", "PDUSessionEstablishmentRequest", "1", 0.0, -1);
  sim.run();
  return finish(std::move(sim.trace()), n_anchors, options);
}

PduSession make_pdu_session(const EstablishmentTrace& trace, std::uint64_t session_id, std::string user,
                            std::string serving_supf, int n_anchors) {
  PduSession s;
  s.session_id = session_id;
  s.user = std::move(user);
  s.ip_token = trace.ip_token;
  for (int i = 0; i < n_anchors; ++i) s.anchors.push_back(anchor_node(i));
  if (s.anchors.empty()) fail(ErrorKind::kInput, "session needs at least one anchor");
  s.serving_supf = std::move(serving_supf);
  return s;
}

HandoverResult supf_handover(const PduSession& session, const std::string& new_supf, const TimingModel& timing,
                             std::span<const std::string> known_supfs) {
  if (std::find(known_supfs.begin(), known_supfs.end(), new_supf) == known_supfs.end()) {
    fail(ErrorKind::kInput, "unknown S-UPF '" + new_supf + "'");
  }
  const double leg = timing.leg("core", new_supf);
  if (!std::isfinite(leg)) fail(ErrorKind::kEstablishmentTimeout, "S-UPF '" + new_supf + "' unreachable");
  HandoverResult result{session, 2.0 * (leg + timing.nf_processing_ms)};
  result.session.serving_supf = new_supf;
  return result;
}

std::vector<SweepRow> session_establishment_sweep(std::span<const int> h_values, const TimingModel& timing,
                                                  int repetitions, std::uint64_t seed, double jitter) {
  if (h_values.empty()) fail(ErrorKind::kInput, "sweep needs at least one h value");
  if (repetitions < 1) fail(ErrorKind::kInput, "sweep needs at least one repetition");
  if (!(jitter >= 0.0 && jitter < 1.0)) fail(ErrorKind::kInput, "jitter must be in [0, 1)");
  const int max_h = *std::max_element(h_values.begin(), h_values.end());
  check_anchor_count(*std::min_element(h_values.begin(), h_values.end()));

  std::vector<double> parallel_sum(h_values.size(), 0.0);
  std::vector<double> insertion_sum(h_values.size(), 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> factor(1.0 - jitter, 1.0 + jitter);
  for (int rep = 0; rep < repetitions; ++rep) {
    TimingModel model = timing;
    if (repetitions > 1) {
      // Give every anchor its own leg so each one is jittered independently.
      for (int i = 0; i < max_h; ++i) model.set_leg("core", anchor_node(i), timing.leg("core", anchor_node(i)));
      TimingModel jittered;
      jittered.nf_processing_ms = model.nf_processing_ms;
      for (const auto& [key, ms] : model.legs()) jittered.set_leg(key.first, key.second, ms * factor(rng));
      model = std::move(jittered);
    }
    for (std::size_t i = 0; i < h_values.size(); ++i) {
      parallel_sum[i] += establish_parallel(h_values[i], model).total_duration_ms;
      insertion_sum[i] += establish_insertion_based(h_values[i], model).total_duration_ms;
    }
  }
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < h_values.size(); ++i) {
    rows.push_back({h_values[i], "parallel", parallel_sum[i] / repetitions});
    rows.push_back({h_values[i], "insertion", insertion_sum[i] / repetitions});
  }
  return rows;
}

}  // namespace skyoct
