#pragma once

// Reference values computed without the library's solvers: closed forms,
// quadrature over independent-node binomials, and eigendecomposition of
// small generators.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

inline constexpr double kYear = 8766.0 * 3600.0;
inline constexpr double kMonth = kYear / 12.0;
inline constexpr double kDay = 86400.0;

inline double per_year(double x) { return x / kYear; }

/// Two-state up/down chain.
inline double two_state_steady(double lambda, double rho) { return rho / (lambda + rho); }

/// Time-averaged availability over [0, T], starting up.
inline double two_state_average_from_up(double lambda, double rho, double T) {
  const double s = lambda + rho;
  return rho / s + lambda / (s * s * T) * (-std::expm1(-s * T));
}

/// Per-node probability of being up at t, starting up.
inline double node_up(double lambda, double rho, double t) {
  const double s = lambda + rho;
  if (s == 0.0) return 1.0;
  return rho / s + lambda / s * std::exp(-s * t);
}

/// P(Binomial(n, p) >= k), summed in long double.
inline double binomial_tail(int n, double p, int k) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  long double total = 0.0L;
  for (int i = k; i <= n; ++i) {
    const long double log_term = std::lgamma(n + 1.0L) - std::lgamma(i + 1.0L) - std::lgamma(n - i + 1.0L) +
                                 i * std::log(static_cast<long double>(p)) +
                                 (n - i) * std::log1p(-static_cast<long double>(p));
    total += std::exp(log_term);
  }
  return static_cast<double>(total);
}

/// Composite Gauss-Legendre (5 points) of f over [a, b] with `panels` panels.
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels = 2000) {
  static const double x[] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
  static const double w[] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                             0.2369268850561891};
  const double h = (b - a) / panels;
  long double sum = 0.0L;
  for (int i = 0; i < panels; ++i) {
    const double mid = a + (i + 0.5) * h;
    for (int j = 0; j < 5; ++j) sum += w[j] * f(mid + 0.5 * h * x[j]);
  }
  return static_cast<double>(sum * 0.5L * h);
}

/// Clusters whose nodes fail and recover independently (cloud ARA with
/// per-node replacement, on-premises ARA without any): fraction of [0, T]
/// with at least `need` of `total` nodes up.
inline double independent_cluster_availability(int total, int need, double lambda, double rho, double T,
                                               int panels = 4000) {
  auto f = [&](double t) { return binomial_tail(total, node_up(lambda, rho, t), need); };
  // the interesting part is early when rho is fast: split at a few time constants
  const double s = lambda + rho;
  const double knee = std::min(T, 40.0 / s);
  double v = integrate(f, 0.0, knee, panels);
  if (knee < T) v += integrate(f, knee, T, panels);
  return v / T;
}

/// e^{-a} a^k / k!, directly, in long double so the exponent keeps its
/// digits at large means.
inline double poisson_pmf(double a, int k) {
  if (a == 0.0) return k == 0 ? 1.0 : 0.0;
  const long double la = a;
  return static_cast<double>(std::exp(-la + k * std::log(la) - std::lgamma(k + 1.0L)));
}

/// Small dense chains by eigendecomposition: Q = V diag(mu) V^-1.
struct Spectral {
  Eigen::MatrixXcd v, v_inv;
  Eigen::VectorXcd mu;

  explicit Spectral(const Eigen::MatrixXd& q) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(q);
    v = es.eigenvectors();
    mu = es.eigenvalues();
    v_inv = v.inverse();
  }

  /// x0 e^{Qt}
  Eigen::VectorXd distribution(const Eigen::VectorXd& x0, double t) const {
    Eigen::VectorXcd d = mu.unaryExpr([t](std::complex<double> m) { return std::exp(m * t); });
    Eigen::RowVectorXcd row = x0.transpose().cast<std::complex<double>>() * v * d.asDiagonal() * v_inv;
    return row.real().transpose();
  }

  /// x0 int_0^T e^{Qs} ds r
  double cumulative(const Eigen::VectorXd& x0, const Eigen::VectorXd& r, double T) const {
    Eigen::VectorXcd d = mu.unaryExpr([T](std::complex<double> m) {
      if (std::abs(m * T) < 1e-8) return std::complex<double>(T, 0.0) * (1.0 + m * T / 2.0);
      return (std::exp(m * T) - 1.0) / m;
    });
    std::complex<double> v_ = (x0.transpose().cast<std::complex<double>>() * v * d.asDiagonal() * v_inv *
                               r.cast<std::complex<double>>())(0, 0);
    return v_.real();
  }
};

/// x0 int_0^T e^{Qs} ds r from one Pade exponential of the augmented
/// generator [[Q, r], [0, 0]]. Holds up on stiff chains where the
/// eigenvector basis is badly conditioned.
inline double augmented_cumulative(const Eigen::MatrixXd& q, const Eigen::VectorXd& x0, const Eigen::VectorXd& r,
                                   double T) {
  const auto n = q.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  a.topLeftCorner(n, n) = q * T;
  a.topRightCorner(n, 1) = r * T;
  const Eigen::MatrixXd e = a.exp();
  return x0.dot(e.topRightCorner(n, 1).col(0));
}

/// Stationary distribution of a small irreducible chain by a direct solve.
inline Eigen::VectorXd stationary(const Eigen::MatrixXd& q) {
  const auto n = q.rows();
  Eigen::MatrixXd a = q.transpose();
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  return a.fullPivLu().solve(b);
}

}  // namespace oracle
