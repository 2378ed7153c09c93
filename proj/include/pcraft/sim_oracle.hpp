#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "pcraft/ctmc.hpp"
#include "pcraft/error.hpp"

namespace pcraft {

/// Monte Carlo estimate of an accumulated reward with a 99% confidence
/// half-width (Student t over independent replications).
struct SimEstimate {
  double mean = 0.0;
  double ci_half_width = 0.0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;

  bool covers(double value) const { return std::abs(value - mean) <= ci_half_width; }
  SimEstimate scaled(double factor) const { return {mean * factor, ci_half_width * factor, replications, seed}; }

  friend bool operator==(const SimEstimate&, const SimEstimate&) = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Replication streams: std::mt19937_64 (fully specified by the standard)
/// seeded from splitmix64(splitmix64(seed) + replication). Uniforms take the
/// top 53 bits, so no library distribution is involved.
class ReplicationRng {
 public:
  ReplicationRng(std::uint64_t seed, std::uint64_t replication)
      : engine_(splitmix64(splitmix64(seed) + replication)) {}

  /// Uniform on (0, 1].
  double uniform_open_closed() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log(uniform_open_closed()) / rate; }

 private:
  std::mt19937_64 engine_;
};

/// Sum by recursive halving; result depends only on the values, not on
/// the order replications finished in.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct JumpTable {
  std::vector<double> exit;
  std::vector<std::size_t> start;  // CSR offsets into successor/cumulative
  std::vector<std::size_t> successor;
  std::vector<double> cumulative;  // cumulative jump probability per row
};

inline JumpTable jump_table(const Ctmc& c) {
  JumpTable t;
  const Generator& g = c.generator();
  t.start.push_back(0);
  for (Eigen::Index i = 0; i < g.outerSize(); ++i) {
    const double exit = c.exit_rate(static_cast<std::size_t>(i));
    t.exit.push_back(exit);
    double acc = 0.0;
    for (Generator::InnerIterator it(g, i); it; ++it) {
      if (it.col() == i) continue;
      acc += it.value() / exit;
      t.successor.push_back(static_cast<std::size_t>(it.col()));
      t.cumulative.push_back(acc);
    }
    if (acc > 0.0) t.cumulative.back() = 1.0;
    t.start.push_back(t.successor.size());
  }
  return t;
}

inline std::size_t sample_index(const std::vector<double>& weights, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // u fell into rounding slack: last state with positive mass
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  return 0;
}

inline double simulate_replication(const Ctmc& c, const JumpTable& t, const RewardVector& reward, double horizon,
                                   ReplicationRng& rng) {
  std::size_t s = sample_index(c.initial(), rng.uniform());
  double now = 0.0;
  double acc = 0.0;
  while (true) {
    const double exit = t.exit[s];
    if (exit == 0.0) return acc + reward[s] * (horizon - now);
    const double hold = rng.exponential(exit);
    if (now + hold >= horizon) return acc + reward[s] * (horizon - now);
    acc += reward[s] * hold;
    now += hold;
    const double u = rng.uniform();
    const auto first = t.cumulative.begin() + static_cast<std::ptrdiff_t>(t.start[s]);
    const auto last = t.cumulative.begin() + static_cast<std::ptrdiff_t>(t.start[s + 1]);
    auto it = std::upper_bound(first, last, u);
    if (it == last) --it;
    s = t.successor[static_cast<std::size_t>(it - t.cumulative.begin())];
  }
}

}  // namespace detail

/// Independent estimate of E[int_0^T r(X_t) dt] by simulating trajectories:
/// one exponential holding time per visit plus a categorical successor
/// draw. Identical inputs and seed give bit-identical output for any
/// thread count.
inline SimEstimate simulate_ctmc(const Ctmc& c, const RewardVector& reward, double horizon, std::size_t replications,
                                 std::uint64_t seed, unsigned threads = 1) {
  validate_reward(reward, c.size());
  if (replications < 2) throw InvalidArgument("need at least 2 replications");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be finite and > 0");

  const detail::JumpTable table = detail::jump_table(c);
  std::vector<double> samples(replications);
  auto run = [&](std::size_t r) {
    detail::ReplicationRng rng(seed, r);
    samples[r] = detail::simulate_replication(c, table, reward, horizon, rng);
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    for (std::size_t r = 0; r < replications; ++r) run(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i)
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < replications; r = next++) run(r);
      });
  }

  const auto n = static_cast<double>(replications);
  const double mean = detail::pairwise_sum(samples) / n;
  std::vector<double> sq(replications);
  for (std::size_t r = 0; r < replications; ++r) sq[r] = (samples[r] - mean) * (samples[r] - mean);
  const double variance = detail::pairwise_sum(sq) / (n - 1.0);
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(dist, 0.995);
  return {mean, t * std::sqrt(variance / n), replications, seed};
}

}  // namespace pcraft
