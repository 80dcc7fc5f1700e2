#include "skyoctopus/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "skyoctopus/error.hpp"

namespace skyoct {
namespace {

void check_h(const DistributionInstance& instance, std::size_t h) {
  if (h < 1 || h > instance.station_count()) {
    fail(ErrorKind::kInput, "h = " + std::to_string(h) + " out of [1, " + std::to_string(instance.station_count()) + "]");
  }
}

nlohmann::json sites_to_json(std::span<const GroundSite> sites) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : sites) out.push_back({s.id, s.latitude_deg, s.longitude_deg});
  return out;
}

std::vector<GroundSite> sites_from_json(const nlohmann::json& doc) {
  std::vector<GroundSite> out;
  for (const auto& s : doc) {
    GroundSite site{s.at(0).get<std::string>(), s.at(1).get<double>(), s.at(2).get<double>()};
    site.validate();
    out.push_back(std::move(site));
  }
  return out;
}

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

double squared_chord(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

DistributionInstance::DistributionInstance(std::vector<GroundSite> stations, std::vector<GroundSite> users,
                                           std::vector<GroundSite> servers, std::vector<double> demand,
                                           std::vector<double> weighted_pl)
    : stations_(std::move(stations)),
      users_(std::move(users)),
      servers_(std::move(servers)),
      demand_(std::move(demand)),
      pl_(std::move(weighted_pl)) {
  if (stations_.empty() || users_.empty() || servers_.empty()) {
    fail(ErrorKind::kInput, "distribution instance needs stations, users and servers");
  }
  if (demand_.size() != users_.size() * servers_.size()) fail(ErrorKind::kInput, "demand matrix has the wrong size");
  if (pl_.size() != stations_.size() * users_.size() * servers_.size()) {
    fail(ErrorKind::kInput, "PL tensor has the wrong size");
  }
  double total = 0.0;
  for (double d : demand_) {
    if (!(d >= 0.0) || !std::isfinite(d)) fail(ErrorKind::kInput, "demand entries must be finite and >= 0");
    total += d;
  }
  if (std::abs(total - 1.0) > 1e-9) fail(ErrorKind::kInput, "demand must sum to 1");
  for (double v : pl_) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorKind::kInput, "PL entries must be finite and >= 0");
  }
}

DistributionInstance DistributionInstance::from_latencies(std::vector<GroundSite> stations,
                                                          std::vector<GroundSite> users,
                                                          std::vector<GroundSite> servers, std::vector<double> demand,
                                                          std::span<const double> latency_ms) {
  const std::size_t n = stations.size(), p = users.size(), q = servers.size();
  if (latency_ms.size() != n * p * q) fail(ErrorKind::kInput, "latency tensor has the wrong size");
  if (demand.size() != p * q) fail(ErrorKind::kInput, "demand matrix has the wrong size");
  std::vector<double> pl(latency_ms.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t jk = 0; jk < p * q; ++jk) pl[i * p * q + jk] = demand[jk] * latency_ms[i * p * q + jk];
  }
  return DistributionInstance(std::move(stations), std::move(users), std::move(servers), std::move(demand),
                              std::move(pl));
}

std::vector<double> DistributionInstance::uniform_demand(std::size_t users, std::size_t servers) {
  return std::vector<double>(users * servers, 1.0 / static_cast<double>(users * servers));
}

double DistributionInstance::path_cost(std::size_t i, std::size_t j, std::size_t k) const {
  if (i >= stations_.size() || j >= users_.size() || k >= servers_.size()) {
    fail(ErrorKind::kInput, "path_cost: index out of range");
  }
  return pl_[index(i, j, k)];
}

DistributionInstance DistributionInstance::scaled(double factor) const {
  if (!(factor > 0.0)) fail(ErrorKind::kInput, "scale factor must be positive");
  std::vector<double> pl = pl_;
  for (double& v : pl) v *= factor;
  return DistributionInstance(stations_, users_, servers_, demand_, std::move(pl));
}

void DistributionInstance::save_json(const std::string& path) const {
  nlohmann::json doc;
  doc["stations"] = sites_to_json(stations_);
  doc["users"] = sites_to_json(users_);
  doc["servers"] = sites_to_json(servers_);
  const std::size_t p = users_.size(), q = servers_.size();
  nlohmann::json demand = nlohmann::json::array();
  for (std::size_t j = 0; j < p; ++j) {
    demand.push_back(std::vector<double>(demand_.begin() + static_cast<long>(j * q),
                                         demand_.begin() + static_cast<long>((j + 1) * q)));
  }
  doc["demand"] = demand;
  nlohmann::json pl = nlohmann::json::array();
  for (std::size_t i = 0; i < stations_.size(); ++i) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t j = 0; j < p; ++j) {
      const auto begin = pl_.begin() + static_cast<long>(index(i, j, 0));
      rows.push_back(std::vector<double>(begin, begin + static_cast<long>(q)));
    }
    pl.push_back(rows);
  }
  doc["pl"] = pl;
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path + "'");
  out << doc.dump(1) << '\n';
}

DistributionInstance DistributionInstance::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kLoad, "cannot open instance '" + path + "'");
  try {
    nlohmann::json doc;
    in >> doc;
    auto stations = sites_from_json(doc.at("stations"));
    auto users = sites_from_json(doc.at("users"));
    auto servers = sites_from_json(doc.at("servers"));
    std::vector<double> demand;
    for (const auto& row : doc.at("demand")) {
      if (row.size() != servers.size()) fail(ErrorKind::kLoad, path + ": demand row has the wrong width");
      for (const auto& v : row) demand.push_back(v.get<double>());
    }
    std::vector<double> pl;
    for (const auto& plane : doc.at("pl")) {
      if (plane.size() != users.size()) fail(ErrorKind::kLoad, path + ": pl has the wrong user dimension");
      for (const auto& row : plane) {
        if (row.size() != servers.size()) fail(ErrorKind::kLoad, path + ": pl has the wrong server dimension");
        for (const auto& v : row) pl.push_back(v.get<double>());
      }
    }
    return DistributionInstance(std::move(stations), std::move(users), std::move(servers), std::move(demand),
                                std::move(pl));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kLoad, path + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kLoad) throw;
    fail(ErrorKind::kLoad, path + ": " + e.what());
  }
}

double weighted_path_latency(double demand, double intra_ms, double inter_ms) { return demand * (intra_ms + inter_ms); }

double objective_cost(std::span<const std::size_t> chosen, const DistributionInstance& instance) {
  if (chosen.empty()) fail(ErrorKind::kInput, "objective_cost: empty anchor set");
  for (std::size_t i : chosen) {
    if (i >= instance.station_count()) fail(ErrorKind::kInput, "objective_cost: station index out of range");
  }
  const std::size_t p = instance.user_count(), q = instance.server_count();
  const auto pl = instance.weighted_pl();
  double cost = 0.0;
  for (std::size_t jk = 0; jk < p * q; ++jk) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i : chosen) best = std::min(best, pl[i * p * q + jk]);
    cost += best;
  }
  return cost;
}

DistributionSolution solve_for(std::vector<std::size_t> chosen, const DistributionInstance& instance) {
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  DistributionSolution sol;
  sol.cost = objective_cost(chosen, instance);
  const std::size_t p = instance.user_count(), q = instance.server_count();
  const auto pl = instance.weighted_pl();
  sol.assignment.resize(p * q);
  for (std::size_t jk = 0; jk < p * q; ++jk) {
    std::size_t best = chosen.front();
    for (std::size_t i : chosen) {
      if (pl[i * p * q + jk] < pl[best * p * q + jk]) best = i;
    }
    sol.assignment[jk] = best;
  }
  sol.chosen = std::move(chosen);
  return sol;
}

DistributionSolution greedy_distribution(const DistributionInstance& instance, std::size_t h,
                                         std::vector<GreedyStep>* trace) {
  check_h(instance, h);
  std::vector<std::size_t> current(instance.station_count());
  std::iota(current.begin(), current.end(), 0);
  std::vector<std::size_t> candidate;
  while (current.size() > h) {
    std::size_t best_pos = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t pos = 0; pos < current.size(); ++pos) {
      candidate = current;
      candidate.erase(candidate.begin() + static_cast<long>(pos));
      const double cost = objective_cost(candidate, instance);
      if (cost < best_cost) {  // ascending scan keeps the lowest index on ties
        best_cost = cost;
        best_pos = pos;
      }
    }
    const std::size_t removed = current[best_pos];
    current.erase(current.begin() + static_cast<long>(best_pos));
    if (trace != nullptr) trace->push_back({removed, best_cost});
  }
  return solve_for(std::move(current), instance);
}

DistributionSolution kmeans_distribution(const DistributionInstance& instance, std::size_t h, std::uint64_t seed,
                                         const KMeansOptions& options) {
  check_h(instance, h);
  if (options.restarts < 1 || options.max_iterations < 1) fail(ErrorKind::kInput, "k-means options must be positive");
  const std::size_t n = instance.station_count();
  std::vector<Vec3> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pos = surface_position(instance.stations()[i]);
    points[i] = {pos.x / kEarthRadiusKm, pos.y / kEarthRadiusKm, pos.z / kEarthRadiusKm};
  }

  std::mt19937_64 rng(seed);
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_reps;

  for (int restart = 0; restart < options.restarts; ++restart) {
    // Forgy initialization: h distinct stations as the first centroids.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < h; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    std::vector<Vec3> centroids(h);
    for (std::size_t c = 0; c < h; ++c) centroids[c] = points[order[c]];

    std::vector<std::size_t> label(n, h);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_d = squared_chord(points[i], centroids[0]);
        for (std::size_t c = 1; c < h; ++c) {
          const double d = squared_chord(points[i], centroids[c]);
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
        if (label[i] != best) {
          label[i] = best;
          changed = true;
        }
      }
      // An empty cluster takes the point farthest from its own centroid
      // among clusters that can spare one.
      std::vector<std::size_t> sizes(h, 0);
      for (std::size_t i = 0; i < n; ++i) ++sizes[label[i]];
      for (std::size_t c = 0; c < h; ++c) {
        if (sizes[c] != 0) continue;
        std::size_t far = n;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (sizes[label[i]] < 2) continue;
          const double d = squared_chord(points[i], centroids[label[i]]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        --sizes[label[far]];
        label[far] = c;
        sizes[c] = 1;
        changed = true;
      }
      for (std::size_t c = 0; c < h; ++c) centroids[c] = Vec3{};
      for (std::size_t i = 0; i < n; ++i) {
        auto& ct = centroids[label[i]];
        ct.x += points[i].x;
        ct.y += points[i].y;
        ct.z += points[i].z;
      }
      for (std::size_t c = 0; c < h; ++c) {
        const double k = static_cast<double>(sizes[c]);
        centroids[c] = {centroids[c].x / k, centroids[c].y / k, centroids[c].z / k};
      }
      if (!changed) break;
    }

    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) sse += squared_chord(points[i], centroids[label[i]]);
    if (sse < best_sse) {
      best_sse = sse;
      best_reps.assign(h, n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = label[i];
        if (best_reps[c] == n ||
            squared_chord(points[i], centroids[c]) < squared_chord(points[best_reps[c]], centroids[c])) {
          best_reps[c] = i;
        }
      }
    }
  }
  return solve_for(std::move(best_reps), instance);
}

DistributionSolution random_distribution(const DistributionInstance& instance, std::size_t h, std::uint64_t seed) {
  check_h(instance, h);
  const std::size_t n = instance.station_count();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < h; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(h);
  return solve_for(std::move(order), instance);
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

DistributionSolution brute_force_distribution(const DistributionInstance& instance, std::size_t h) {
  check_h(instance, h);
  const std::size_t n = instance.station_count();
  if (binomial(n, h) > kBruteForceGuard) {
    fail(ErrorKind::kInstanceTooLarge, "C(" + std::to_string(n) + ", " + std::to_string(h) + ") exceeds the guard");
  }
  std::vector<std::size_t> combo(h);
  std::iota(combo.begin(), combo.end(), 0);
  std::vector<std::size_t> best = combo;
  double best_cost = objective_cost(combo, instance);
  while (true) {
    // Next combination in lexicographic order.
    std::size_t i = h;
    while (i > 0 && combo[i - 1] == n - h + (i - 1)) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t j = i; j < h; ++j) combo[j] = combo[j - 1] + 1;
    const double cost = objective_cost(combo, instance);
    if (cost < best_cost) {
      best_cost = cost;
      best = combo;
    }
  }
  return solve_for(std::move(best), instance);
}

}  // namespace skyoct
