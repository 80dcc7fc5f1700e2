#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "skyoctopus/geo.hpp"

namespace skyoct {

// The h-anchor distribution problem: n stations, p users, q servers, demand
// p(u,s) and the demand-weighted path latency PL for every (station, user,
// server) triple.
class DistributionInstance {
 public:
  // `weighted_pl` is row-major n x p x q and already includes the demand weight.
  DistributionInstance(std::vector<GroundSite> stations, std::vector<GroundSite> users,
                       std::vector<GroundSite> servers, std::vector<double> demand, std::vector<double> weighted_pl);

  // Builds PL = demand * latency from an unweighted latency tensor (ms).
  static DistributionInstance from_latencies(std::vector<GroundSite> stations, std::vector<GroundSite> users,
                                             std::vector<GroundSite> servers, std::vector<double> demand,
                                             std::span<const double> latency_ms);

  static std::vector<double> uniform_demand(std::size_t users, std::size_t servers);

  std::size_t station_count() const { return stations_.size(); }
  std::size_t user_count() const { return users_.size(); }
  std::size_t server_count() const { return servers_.size(); }
  std::span<const GroundSite> stations() const { return stations_; }
  std::span<const GroundSite> users() const { return users_; }
  std::span<const GroundSite> servers() const { return servers_; }
  double demand(std::size_t user, std::size_t server) const { return demand_[user * servers_.size() + server]; }
  std::span<const double> weighted_pl() const { return pl_; }

  // Weighted path latency of station i for (user j, server k).
  double path_cost(std::size_t i, std::size_t j, std::size_t k) const;

  // Same instance with every PL entry multiplied by `factor`.
  DistributionInstance scaled(double factor) const;

  // JSON with stations/users/servers as [id, lat, lon] triples, "demand" as
  // a p x q nested list and "pl" as an n x p x q nested list.
  void save_json(const std::string& path) const;
  static DistributionInstance load_json(const std::string& path);

 private:
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * users_.size() + j) * servers_.size() + k;
  }

  std::vector<GroundSite> stations_;
  std::vector<GroundSite> users_;
  std::vector<GroundSite> servers_;
  std::vector<double> demand_;
  std::vector<double> pl_;
};

double weighted_path_latency(double demand, double intra_ms, double inter_ms);

struct DistributionSolution {
  std::vector<std::size_t> chosen;      // sorted station indices
  double cost = 0.0;
  std::vector<std::size_t> assignment;  // p x q chosen station per (user, server)
};

double objective_cost(std::span<const std::size_t> chosen, const DistributionInstance& instance);

// Cost-minimal assignment for a fixed anchor set (ties to the lowest index).
DistributionSolution solve_for(std::vector<std::size_t> chosen, const DistributionInstance& instance);

struct GreedyStep {
  std::size_t removed;
  double cost_after;
};

// Repeatedly drops the station whose removal leaves the cheapest set.
// `trace`, when given, receives one entry per removal.
DistributionSolution greedy_distribution(const DistributionInstance& instance, std::size_t h,
                                         std::vector<GreedyStep>* trace = nullptr);

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 100;
};

DistributionSolution kmeans_distribution(const DistributionInstance& instance, std::size_t h, std::uint64_t seed,
                                         const KMeansOptions& options = {});

DistributionSolution random_distribution(const DistributionInstance& instance, std::size_t h, std::uint64_t seed);

inline constexpr double kBruteForceGuard = 1e6;

double binomial(std::size_t n, std::size_t k);

// Exact optimum by enumeration; ties to the lexicographically smallest set.
DistributionSolution brute_force_distribution(const DistributionInstance& instance, std::size_t h);

}  // namespace skyoct
