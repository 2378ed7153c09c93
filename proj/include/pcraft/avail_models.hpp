#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcraft/ctmc.hpp"
#include "pcraft/error.hpp"
#include "pcraft/transient.hpp"
#include "pcraft/types.hpp"
#include "pcraft/units.hpp"

namespace pcraft {

/// Cluster shape. `num` nodes are needed for throughput; ARA adds `op`
/// always-active extra nodes, on-premises PF keeps `pool` cold spares
/// (cloud PF has an unbounded pool).
struct ClusterSpec {
  Technique technique = Technique::active_route_anywhere;
  Deployment deployment = Deployment::cloud;
  int num = 1;
  int op = 0;
  int pool = 0;

  void validate() const {
    if (num < 1) throw InvalidArgument("num must be >= 1");
    if (op < 0) throw InvalidArgument("op must be >= 0");
    if (pool < 0) throw InvalidArgument("pool must be >= 0");
    if (technique == Technique::passive_failover && op != 0)
      throw InvalidArgument("op must be 0 for passive failover");
  }
};

/// How pending failovers and pool repairs are served.
enum class RecoveryPolicy {
  parallel,  // rate multiplied by the number of pending events
  single,    // one at a time, regardless of how many are pending
};

struct AvailRates {
  Rate hw_crash;                     // per node
  Rate crash_recovery = Rate::every(Seconds{15.0});  // failover / replacement
  std::optional<Rate> pool_repair;   // absent: crashed nodes are never repaired
  RecoveryPolicy policy = RecoveryPolicy::parallel;

  void validate() const {
    if (!hw_crash.is_positive()) throw InvalidArgument("hw_crash rate must be positive and finite");
    if (!crash_recovery.is_positive()) throw InvalidArgument("crash_recovery rate must be positive and finite");
    if (pool_repair && !pool_repair->is_positive())
      throw InvalidArgument("pool_repair rate must be positive and finite");
  }
};

/// A cluster chain plus, per state, how many nodes are up and how many
/// spares sit in the pool.
struct ClusterModel {
  ClusterSpec spec;
  Ctmc chain;
  std::vector<int> up_nodes;
  std::vector<int> pool_available;

  /// 1 on states where the cluster delivers its target throughput:
  /// UpNodes == num for PF, UpNodes >= num for ARA.
  RewardVector available_reward() const {
    RewardVector r(up_nodes.size(), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const bool ok = spec.technique == Technique::passive_failover ? up_nodes[i] == spec.num : up_nodes[i] >= spec.num;
      r[i] = ok ? 1.0 : 0.0;
    }
    return r;
  }
};

namespace detail {

inline double pending_multiplier(int pending, RecoveryPolicy policy) {
  if (pending <= 0) return 0.0;
  return policy == RecoveryPolicy::parallel ? static_cast<double>(pending) : 1.0;
}

}  // namespace detail

inline ClusterModel build_pf_model(const ClusterSpec& spec, const AvailRates& rates) {
  spec.validate();
  rates.validate();
  if (spec.technique != Technique::passive_failover) throw InvalidArgument("build_pf_model needs technique = pf");

  const double lambda = rates.hw_crash.per_second();
  const double rho = rates.crash_recovery.per_second();
  ClusterModel m{spec, {}, {}, {}};
  CtmcBuilder b;

  if (spec.deployment == Deployment::cloud) {
    // unbounded pool: only the number of up nodes matters
    for (int u = spec.num; u >= 0; --u) {
      b.add_state("up=" + std::to_string(u));
      m.up_nodes.push_back(u);
      m.pool_available.push_back(-1);
    }
    auto idx = [&](int u) { return static_cast<std::size_t>(spec.num - u); };
    for (int u = spec.num; u >= 0; --u) {
      if (u > 0) b.add_transition(idx(u), idx(u - 1), u * lambda);
      const double f = detail::pending_multiplier(spec.num - u, rates.policy);
      if (f > 0.0) b.add_transition(idx(u), idx(u + 1), f * rho);
    }
    b.set_initial_state(idx(spec.num));
    m.chain = b.build();
    return m;
  }

  // on-premises: (UpNodes, PoolAvail), Broken = num + pool - up - avail,
  // enumerated by reachability from the full cluster
  const int total = spec.num + spec.pool;
  std::map<std::pair<int, int>, std::size_t> index;
  std::deque<std::pair<int, int>> frontier;
  auto visit = [&](int u, int p) {
    auto [it, inserted] = index.try_emplace({u, p}, index.size());
    if (inserted) {
      frontier.emplace_back(u, p);
      b.add_state("up=" + std::to_string(u) + ",pool=" + std::to_string(p));
      m.up_nodes.push_back(u);
      m.pool_available.push_back(p);
    }
    return it->second;
  };
  struct Edge {
    std::size_t from, to;
    double rate;
  };
  std::vector<Edge> edges;
  visit(spec.num, spec.pool);
  while (!frontier.empty()) {
    const auto [u, p] = frontier.front();
    frontier.pop_front();
    const std::size_t from = index.at({u, p});
    const int broken = total - u - p;
    if (u > 0) edges.push_back({from, visit(u - 1, p), u * lambda});
    const double f = detail::pending_multiplier(std::min(spec.num - u, p), rates.policy);
    if (f > 0.0) edges.push_back({from, visit(u + 1, p - 1), f * rho});
    if (rates.pool_repair) {
      const double g = detail::pending_multiplier(broken, rates.policy);
      if (g > 0.0) edges.push_back({from, visit(u, p + 1), g * rates.pool_repair->per_second()});
    }
  }
  for (const auto& e : edges) b.add_transition(e.from, e.to, e.rate);
  b.set_initial_state(0);
  m.chain = b.build();
  return m;
}

inline ClusterModel build_ara_model(const ClusterSpec& spec, const AvailRates& rates) {
  spec.validate();
  rates.validate();
  if (spec.technique != Technique::active_route_anywhere) throw InvalidArgument("build_ara_model needs technique = ara");

  const int full = spec.num + spec.op;
  const double lambda = rates.hw_crash.per_second();
  const double rho = rates.crash_recovery.per_second();
  ClusterModel m{spec, {}, {}, {}};
  CtmcBuilder b;
  for (int u = full; u >= 0; --u) {
    b.add_state("up=" + std::to_string(u));
    m.up_nodes.push_back(u);
    m.pool_available.push_back(0);
  }
  auto idx = [&](int u) { return static_cast<std::size_t>(full - u); };
  for (int u = full; u >= 0; --u) {
    if (u > 0) b.add_transition(idx(u), idx(u - 1), u * lambda);
    if (spec.deployment == Deployment::cloud) {
      const double f = detail::pending_multiplier(full - u, rates.policy);
      if (f > 0.0) b.add_transition(idx(u), idx(u + 1), f * rho);
    }
  }
  b.set_initial_state(idx(full));
  m.chain = b.build();
  return m;
}

inline ClusterModel build_cluster_model(const ClusterSpec& spec, const AvailRates& rates) {
  return spec.technique == Technique::passive_failover ? build_pf_model(spec, rates) : build_ara_model(spec, rates);
}

struct NinesReport {
  double nines = 0.0;
  double downtime_hours = 0.0;
};

inline constexpr double kNinesCap = 12.0;

/// -log10(1 - availability), capped at 12, plus downtime over the horizon.
inline NinesReport nines(double availability, Seconds horizon) {
  if (!(availability >= 0.0 && availability <= 1.0)) throw InvalidArgument("availability must lie in [0, 1]");
  if (!(horizon.count() > 0.0)) throw InvalidArgument("horizon must be positive");
  const double unavailable = 1.0 - availability;
  NinesReport r;
  r.nines = unavailable <= 0.0 ? kNinesCap : std::min(kNinesCap, -std::log10(unavailable));
  r.downtime_hours = unavailable * std::chrono::duration_cast<Hours>(horizon).count();
  return r;
}

struct AvailabilityReport {
  double availability = 0.0;
  double downtime_hours = 0.0;
  double nines = 0.0;
};

/// Fraction of the horizon spent delivering target throughput.
inline AvailabilityReport availability(const ClusterModel& model, Seconds horizon, const SolverOptions& opt = {}) {
  if (!(horizon.count() > 0.0) || !std::isfinite(horizon.count())) throw InvalidArgument("horizon must be positive");
  const double up = cumulative_occupancy(model.chain, model.available_reward(), horizon.count(), opt);
  const double a = std::clamp(up / horizon.count(), 0.0, 1.0);
  const NinesReport n = nines(a, horizon);
  return {a, n.downtime_hours, n.nines};
}

}  // namespace pcraft
