#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <cmath>
#include <deque>
#include <vector>

#include "pcraft/ctmc.hpp"
#include "pcraft/error.hpp"

namespace pcraft {

namespace detail {

inline std::vector<bool> reachable_from(const Ctmc& c, std::size_t start, bool reverse) {
  const std::size_t n = c.size();
  std::vector<std::vector<std::size_t>> adj(n);
  const Generator& g = c.generator();
  for (Eigen::Index i = 0; i < g.outerSize(); ++i)
    for (Generator::InnerIterator it(g, i); it; ++it)
      if (it.col() != i) {
        const auto from = static_cast<std::size_t>(i);
        const auto to = static_cast<std::size_t>(it.col());
        reverse ? adj[to].push_back(from) : adj[from].push_back(to);
      }
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{start};
  seen[start] = true;
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    for (std::size_t t : adj[s])
      if (!seen[t]) {
        seen[t] = true;
        queue.push_back(t);
      }
  }
  return seen;
}

// Grassmann-Taksar-Heyman state reduction. Subtraction-free, so it keeps
// full relative accuracy on stiff chains. O(n^3).
inline Eigen::VectorXd gth_stationary(const Ctmc& c) {
  const auto n = static_cast<Eigen::Index>(c.size());
  Eigen::MatrixXd a = Eigen::MatrixXd(c.generator());
  a.diagonal().setZero();
  for (Eigen::Index k = n - 1; k > 0; --k) {
    const double s = a.row(k).head(k).sum();
    a.col(k).head(k) /= s;
    a.topLeftCorner(k, k).noalias() += a.col(k).head(k) * a.row(k).head(k);
  }
  Eigen::VectorXd pi(n);
  pi(0) = 1.0;
  for (Eigen::Index j = 1; j < n; ++j) pi(j) = pi.head(j).dot(a.col(j).head(j));
  return pi / pi.sum();
}

inline Eigen::VectorXd sparse_lu_stationary(const Ctmc& c) {
  const auto n = static_cast<Eigen::Index>(c.size());
  Eigen::SparseMatrix<double> a = Eigen::SparseMatrix<double>(c.generator().transpose());
  // replace the first balance equation by the normalisation sum(pi) = 1
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() + n));
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it)
      if (it.row() != 0) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (Eigen::Index j = 0; j < n; ++j) t.emplace_back(0, static_cast<int>(j), 1.0);
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) throw Error("steady-state factorisation failed");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(0) = 1.0;
  Eigen::VectorXd pi = lu.solve(b);
  // one round of iterative refinement
  Eigen::VectorXd r = b - m * pi;
  pi += lu.solve(r);
  return pi;
}

}  // namespace detail

/// True when every state can reach every other state.
inline bool is_irreducible(const Ctmc& c) {
  for (bool b : detail::reachable_from(c, 0, false))
    if (!b) return false;
  for (bool b : detail::reachable_from(c, 0, true))
    if (!b) return false;
  return true;
}

/// Scaled balance residual ||pi Q||_1 / max exit rate (dimensionless).
inline double stationary_residual(const Ctmc& c, const Distribution& pi) {
  const double q = c.max_exit_rate();
  if (q == 0.0) return 0.0;
  Eigen::Map<const Eigen::RowVectorXd> p(pi.data(), static_cast<Eigen::Index>(pi.size()));
  Eigen::RowVectorXd r = p * c.generator();
  return r.lpNorm<1>() / q;
}

/// Stationary distribution pi with pi Q = 0, sum(pi) = 1. Requires an
/// irreducible chain; otherwise throws NotErgodic.
inline Distribution steady_state(const Ctmc& c, double tol = 1e-12) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (c.size() == 1) return {1.0};
  if (!is_irreducible(c))
    throw NotErgodic("chain is not ergodic (not irreducible); use transient or cumulative analysis instead");

  constexpr std::size_t kDenseLimit = 1500;
  Eigen::VectorXd pi = c.size() <= kDenseLimit ? detail::gth_stationary(c) : detail::sparse_lu_stationary(c);
  for (auto& p : pi)
    if (p < 0.0) p = 0.0;
  pi /= pi.sum();

  Distribution out(pi.data(), pi.data() + pi.size());
  const double res = stationary_residual(c, out);
  if (!(res <= tol))
    throw Error("steady-state residual " + std::to_string(res) + " exceeds tolerance " + std::to_string(tol));
  return out;
}

}  // namespace pcraft
