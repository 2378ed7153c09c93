#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "pcraft/error.hpp"

namespace pcraft {

/// Truncated Poisson(mean) probabilities used as uniformization weights.
/// weights[k - left] approximates P(N = k) for k in [left, right]; the
/// probability mass outside that window is at most the requested tolerance.
struct PoissonWeights {
  std::size_t left = 0;
  std::size_t right = 0;
  std::vector<double> weights;
  double total = 0.0;  // sum of weights

  double operator()(std::size_t k) const {
    return (k < left || k > right) ? 0.0 : weights[k - left];
  }

  /// P(N > k) under the truncated weights, evaluated without cancellation.
  std::vector<double> survival() const {
    std::vector<double> s(right + 1, 0.0);
    // tail sums from the right
    double tail = 0.0;
    for (std::size_t k = right + 1; k-- > 0;) {
      s[k] = tail;
      tail += (*this)(k);
    }
    // below the mode, 1 - cdf is better conditioned than the tail sum
    double cdf = 0.0;
    const std::size_t mode = left + mode_offset();
    for (std::size_t k = 0; k < mode && k <= right; ++k) {
      cdf += (*this)(k);
      s[k] = 1.0 - cdf;
    }
    return s;
  }

 private:
  std::size_t mode_offset() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < weights.size(); ++i)
      if (weights[i] > weights[best]) best = i;
    return best;
  }
};

namespace detail {

// log P(N = m) for m = floor(mean) >= 1, written so that no large terms cancel.
inline double log_poisson_at_mode(double mean, double m) {
  if (m < 16.0) return -mean + m * std::log(mean) - std::lgamma(m + 1.0);
  const double f = mean - m;
  // lgamma(m+1) = (m+1/2)log m - m + log(2 pi)/2 + 1/(12m) - 1/(360m^3) + 1/(1260 m^5)
  const double inv = 1.0 / m;
  const double inv2 = inv * inv;
  const double stirling = inv / 12.0 - inv * inv2 / 360.0 + inv * inv2 * inv2 / 1260.0;
  return m * std::log1p(f / m) - f - 0.5 * std::log(2.0 * std::numbers::pi * m) - stirling;
}

}  // namespace detail

/// Poisson weights for mean `qt`, expanded outward from the mode in
/// ratio form and anchored by a log-space value at the mode; stable for
/// means well beyond 1e6. Each tail is cut once a geometric bound on its
/// remaining mass drops below tol / 4.
inline PoissonWeights poisson_weights(double qt, double tol) {
  if (!(qt >= 0.0) || !std::isfinite(qt)) throw InvalidArgument("Poisson mean must be finite and >= 0");
  if (!(tol > 0.0) || tol >= 1.0) throw InvalidArgument("Poisson truncation tolerance must lie in (0, 1)");

  PoissonWeights pw;
  if (qt == 0.0) {
    pw.weights = {1.0};
    pw.total = 1.0;
    return pw;
  }

  const double m = std::floor(qt);
  const double anchor = std::exp(m == 0.0 ? -qt : detail::log_poisson_at_mode(qt, m));
  const double cut = tol / 4.0;

  std::vector<double> left_side;  // w(m-1), w(m-2), ...
  {
    double w = anchor;
    for (double k = m; k > 0.0; k -= 1.0) {
      w *= k / qt;  // w(k-1) from w(k)
      const double ratio = (k - 1.0) / qt;
      if (w / (1.0 - ratio) <= cut) break;
      left_side.push_back(w);
    }
  }
  std::vector<double> right_side;  // w(m+1), w(m+2), ...
  {
    double w = anchor;
    for (double k = m;; k += 1.0) {
      w *= qt / (k + 1.0);
      const double ratio = qt / (k + 2.0);
      if (ratio < 1.0 && w / (1.0 - ratio) <= cut) break;
      if (w == 0.0) break;
      right_side.push_back(w);
    }
  }

  pw.left = static_cast<std::size_t>(m) - left_side.size();
  pw.right = static_cast<std::size_t>(m) + right_side.size();
  pw.weights.reserve(left_side.size() + 1 + right_side.size());
  pw.weights.assign(left_side.rbegin(), left_side.rend());
  pw.weights.push_back(anchor);
  pw.weights.insert(pw.weights.end(), right_side.begin(), right_side.end());

  double total = 0.0;
  for (double w : pw.weights) total += w;
  if (total > 1.0) {
    for (double& w : pw.weights) w /= total;
    total = 1.0;
  }
  pw.total = total;
  return pw;
}

}  // namespace pcraft
