#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "pcraft/ctmc.hpp"
#include "pcraft/error.hpp"
#include "pcraft/poisson.hpp"

namespace pcraft {

enum class Backend {
  automatic,  // cheaper of the two by an operation-count estimate
  sparse,     // vector uniformization over K chained subintervals
  dense,      // subinterval propagator by uniformization, composed by squaring
};

struct SolverOptions {
  double tol = 1e-10;
  /// Uniformization rate q = factor * max exit rate.
  double uniformization_factor = 1.02;
  /// Sparse backend: horizon split into K pieces so that q * T / K <= this.
  double max_qt_per_piece = 1e6;
  /// Dense backend is never used above this many states.
  std::size_t dense_state_limit = 2600;
  Backend backend = Backend::automatic;
};

/// State at the horizon together with accumulated rewards.
struct HorizonSolution {
  Distribution distribution;         // pi(T)
  std::vector<double> accumulated;   // E[int_0^T r_j(X_t) dt], one per reward vector
  Backend backend_used = Backend::sparse;
  std::vector<double> occupancy;     // per-state expected time; sparse backend only
};

namespace detail {

using Dense = Eigen::MatrixXd;

inline Eigen::RowVectorXd as_row(const Distribution& d) {
  return Eigen::Map<const Eigen::RowVectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
}

inline Distribution clean_distribution(const Eigen::RowVectorXd& v) {
  Distribution out(v.data(), v.data() + v.size());
  double sum = 0.0;
  for (double& p : out) {
    if (p < 0.0) p = 0.0;
    sum += p;
  }
  if (sum > 0.0)
    for (double& p : out) p /= sum;
  return out;
}

inline Dense reward_matrix(std::span<const RewardVector> rewards, std::size_t n) {
  Dense r(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rewards.size()));
  for (std::size_t j = 0; j < rewards.size(); ++j) {
    validate_reward(rewards[j], n);
    for (std::size_t i = 0; i < n; ++i) r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rewards[j][i];
  }
  return r;
}

// Uniformized one-step matrix P = I + Q / q as a sparse row-major matrix.
inline Generator uniformized(const Ctmc& c, double q) {
  Generator p = c.generator() / q;
  Generator id(p.rows(), p.cols());
  id.setIdentity();
  p += id;
  p.prune(0.0);
  return p;
}

struct Plan {
  Backend backend;
  double q;
  int doublings = 0;
};

// Probabilities below this are dropped; left alone they decay into
// subnormals, which slow every later product several times over.
inline constexpr double kNegligible = 1e-150;

// Sparse products run roughly 20x slower per multiply-add than dense GEMM.
inline constexpr double kSparseOpWeight = 20.0;

// Cost of one base-series term relative to one dense multiply-add.
inline double dense_term_cost(double n, double nnz) { return kSparseOpWeight * n * nnz + 4.0 * n * n; }

inline int dense_doublings(double qt, std::size_t states, std::size_t nonzeros) {
  // each doubling of the base interval trades one squaring (n^3) for
  // another qh series terms; balance the two
  const auto n = static_cast<double>(states);
  const double theta = std::clamp(n * n * n / (std::log(2.0) * dense_term_cost(n, static_cast<double>(nonzeros))), 1.0, 1e4);
  if (qt <= theta) return 0;
  return static_cast<int>(std::ceil(std::log2(qt / theta)));
}

inline Plan choose_plan(const Ctmc& c, double horizon, std::size_t reward_count, const SolverOptions& opt) {
  const double q = opt.uniformization_factor * c.max_exit_rate();
  const double qt = q * horizon;
  const auto n = static_cast<double>(c.size());
  const auto nnz = static_cast<double>(c.generator().nonZeros()) + n;

  const double pieces = std::max(1.0, std::ceil(qt / opt.max_qt_per_piece));
  const double per_piece = qt / pieces;
  const double sparse_cost = pieces * (per_piece + 8.0 * std::sqrt(per_piece) + 20.0) * kSparseOpWeight * (nnz + 2.0 * n);

  const int s = dense_doublings(qt, c.size(), c.generator().nonZeros());
  const double base_qt = qt / std::ldexp(1.0, s);
  const double base_terms = base_qt + 8.0 * std::sqrt(base_qt) + 20.0;
  const double m = static_cast<double>(reward_count);
  const double dense_cost = base_terms * (dense_term_cost(n, nnz) + n * m) + s * (n * n * n + n * n * m);

  Backend b = opt.backend;
  if (b == Backend::automatic) b = (c.size() <= opt.dense_state_limit && dense_cost < sparse_cost) ? Backend::dense : Backend::sparse;
  return {b, q, s};
}

inline HorizonSolution solve_sparse(const Ctmc& c, double horizon, const Dense& rewards, double q,
                                    const SolverOptions& opt) {
  const auto n = static_cast<Eigen::Index>(c.size());
  const Generator p = uniformized(c, q);
  const double qt = q * horizon;
  const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(qt / opt.max_qt_per_piece)));
  const double h = horizon / static_cast<double>(pieces);
  const PoissonWeights pw = poisson_weights(q * h, opt.tol / static_cast<double>(pieces));
  const std::vector<double> surv = pw.survival();

  Eigen::RowVectorXd x = as_row(c.initial());
  Eigen::RowVectorXd occupancy = Eigen::RowVectorXd::Zero(n);
  Eigen::RowVectorXd v(n), next(n), at_end(n), piece_occ(n);
  for (std::size_t piece = 0; piece < pieces; ++piece) {
    v = x;
    at_end.setZero();
    piece_occ.setZero();
    for (std::size_t k = 0; k <= pw.right; ++k) {
      if (k >= pw.left) at_end += pw(k) * v;
      piece_occ += surv[k] * v;
      if (k < pw.right) {
        next.noalias() = v * p;
        v.swap(next);
        if (k % 16 == 15) v = (v.array() < kNegligible).select(0.0, v);
      }
    }
    occupancy += piece_occ / q;
    at_end = at_end.cwiseMax(0.0);
    x = at_end / at_end.sum();
  }

  HorizonSolution sol;
  sol.distribution = clean_distribution(x);
  Eigen::RowVectorXd acc = occupancy * rewards;
  sol.accumulated.assign(acc.data(), acc.data() + acc.size());
  sol.backend_used = Backend::sparse;
  sol.occupancy.assign(occupancy.data(), occupancy.data() + occupancy.size());
  return sol;
}

inline HorizonSolution solve_dense(const Ctmc& c, double horizon, const Dense& rewards, double q, int doublings,
                                   const SolverOptions& opt) {
  const auto n = static_cast<Eigen::Index>(c.size());
  const Generator p = uniformized(c, q);
  const double h = std::ldexp(horizon, -doublings);

  // propagator e^{Qh} and integral int_0^h e^{Qs} ds R over one base interval;
  // every term is nonnegative, so there is no cancellation
  const double base_tol = std::min(opt.tol, 1e-15);
  const PoissonWeights pw = poisson_weights(q * h, base_tol);
  const std::vector<double> surv = pw.survival();

  // Entries this small carry no weight, but products of them turn
  // subnormal and stall the floating-point units.
  auto flush = [](Dense& m) { m = (m.array() < kNegligible).select(0.0, m); };

  Dense power = Dense::Identity(n, n);
  Dense prop = Dense::Zero(n, n);
  Dense integral = Dense::Zero(n, rewards.cols());
  Dense next(n, n);
  for (std::size_t k = 0; k <= pw.right; ++k) {
    if (k >= pw.left) prop += pw(k) * power;
    integral.noalias() += (surv[k] / q) * (power * rewards);
    if (k < pw.right) {
      next.noalias() = power * p;
      power.swap(next);
      flush(power);
    }
  }

  auto renormalise = [&](Dense& m) {
    flush(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = m.row(i).sum();
      if (s > 0.0) m.row(i) /= s;
    }
  };
  renormalise(prop);
  Dense tmp(n, rewards.cols());
  flush(integral);
  for (int d = 0; d < doublings; ++d) {
    tmp.noalias() = prop * integral;
    integral += tmp;
    next.noalias() = prop * prop;
    prop.swap(next);
    renormalise(prop);
  }

  const Eigen::RowVectorXd x0 = as_row(c.initial());
  HorizonSolution sol;
  sol.distribution = clean_distribution(x0 * prop);
  Eigen::RowVectorXd acc = x0 * integral;
  sol.accumulated.assign(acc.data(), acc.data() + acc.size());
  sol.backend_used = Backend::dense;
  return sol;
}

inline void check_horizon_args(double horizon, double tol, bool allow_zero) {
  if (!std::isfinite(horizon) || horizon < 0.0 || (!allow_zero && horizon == 0.0))
    throw InvalidArgument(allow_zero ? "time must be finite and >= 0" : "horizon must be finite and > 0");
  if (!(tol > 0.0) || tol >= 1.0) throw InvalidArgument("tolerance must lie in (0, 1)");
}

}  // namespace detail

/// Distribution at `horizon` and accumulated reward for each reward vector.
inline HorizonSolution solve_horizon(const Ctmc& c, double horizon, std::span<const RewardVector> rewards,
                                     const SolverOptions& opt = {}) {
  detail::check_horizon_args(horizon, opt.tol, true);
  const detail::Dense r = detail::reward_matrix(rewards, c.size());
  if (horizon == 0.0) return {c.initial(), std::vector<double>(rewards.size(), 0.0), Backend::sparse, {}};

  if (c.max_exit_rate() == 0.0) {
    // nothing moves
    HorizonSolution sol{c.initial(), {}, Backend::sparse, {}};
    Eigen::RowVectorXd acc = detail::as_row(c.initial()) * r * horizon;
    sol.accumulated.assign(acc.data(), acc.data() + acc.size());
    return sol;
  }
  const detail::Plan plan = detail::choose_plan(c, horizon, rewards.size(), opt);
  return plan.backend == Backend::dense ? detail::solve_dense(c, horizon, r, plan.q, plan.doublings, opt)
                                        : detail::solve_sparse(c, horizon, r, plan.q, opt);
}

/// pi(t) = initial * exp(Q t) by uniformization.
inline Distribution transient_distribution(const Ctmc& c, double t, double tol = 1e-10) {
  SolverOptions opt;
  opt.tol = tol;
  return solve_horizon(c, t, {}, opt).distribution;
}

inline Distribution transient_distribution(const Ctmc& c, double t, const SolverOptions& opt) {
  return solve_horizon(c, t, {}, opt).distribution;
}

/// Expected accumulated reward E[int_0^T r(X_t) dt] in reward-seconds.
inline double cumulative_occupancy(const Ctmc& c, const RewardVector& reward, double horizon,
                                   const SolverOptions& opt) {
  detail::check_horizon_args(horizon, opt.tol, false);
  const RewardVector rs[] = {reward};
  return solve_horizon(c, horizon, rs, opt).accumulated.front();
}

inline double cumulative_occupancy(const Ctmc& c, const RewardVector& reward, double horizon, double tol = 1e-10) {
  SolverOptions opt;
  opt.tol = tol;
  return cumulative_occupancy(c, reward, horizon, opt);
}

/// Expected time spent in every state over [0, T].
inline std::vector<double> state_occupancy(const Ctmc& c, double horizon, const SolverOptions& opt = {}) {
  detail::check_horizon_args(horizon, opt.tol, false);
  if (c.size() > 256) {
    SolverOptions sparse = opt;
    sparse.backend = Backend::sparse;
    HorizonSolution sol = solve_horizon(c, horizon, {}, sparse);
    if (sol.occupancy.empty()) {
      // frozen chain: all time in the initial distribution
      sol.occupancy = c.initial();
      for (double& v : sol.occupancy) v *= horizon;
    }
    return sol.occupancy;
  }
  std::vector<RewardVector> indicators(c.size(), RewardVector(c.size(), 0.0));
  for (std::size_t i = 0; i < c.size(); ++i) indicators[i][i] = 1.0;
  return solve_horizon(c, horizon, indicators, opt).accumulated;
}

}  // namespace pcraft
