#pragma once

#include <Eigen/SparseCore>

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pcraft/error.hpp"

namespace pcraft {

/// Per-state probability vector.
using Distribution = std::vector<double>;

/// Per-state nonnegative reward rate (1 = count the time spent in that state).
using RewardVector = std::vector<double>;

/// Row-major sparse generator; off-diagonal entries are transition rates per second.
using Generator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr double kRowSumTolerance = 1e-12;

/// Finite continuous-time Markov chain: unique state labels, a sparse rate
/// generator with diagonal equal to minus the row sum, and an initial
/// distribution. Immutable once built; see CtmcBuilder and build_ctmc.
class Ctmc {
 public:
  /// Empty chain; real chains come from CtmcBuilder or build_ctmc.
  Ctmc() = default;

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const Generator& generator() const { return generator_; }
  const Distribution& initial() const { return initial_; }

  /// Total rate of leaving state i (minus the diagonal).
  double exit_rate(std::size_t i) const { return exit_rates_[i]; }
  double max_exit_rate() const {
    double m = 0.0;
    for (double r : exit_rates_) m = std::max(m, r);
    return m;
  }
  std::size_t transition_count() const {
    return static_cast<std::size_t>(generator_.nonZeros()) - diagonal_entries_;
  }

  /// Index of a state label; throws InvalidArgument when absent.
  std::size_t index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw InvalidArgument("unknown state '" + label + "'");
    return it->second;
  }

  /// Rate of the direct transition i -> j (0 when absent). i != j.
  double rate(std::size_t i, std::size_t j) const {
    return i == j ? 0.0 : generator_.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// Same chain started from a different distribution.
  Ctmc with_initial(Distribution initial) const {
    Ctmc copy = *this;
    copy.initial_ = validated_distribution(std::move(initial), size());
    return copy;
  }

  static Distribution validated_distribution(Distribution d, std::size_t n) {
    if (d.size() != n)
      throw InvalidArgument("distribution has " + std::to_string(d.size()) + " entries, expected " +
                            std::to_string(n));
    double sum = 0.0;
    for (double p : d) {
      if (!std::isfinite(p) || p < 0.0) throw InvalidArgument("distribution entries must be finite and >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      throw InvalidArgument("distribution must sum to 1 (got " + std::to_string(sum) + ")");
    return d;
  }

 private:
  friend class CtmcBuilder;

  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
  Generator generator_;
  std::vector<double> exit_rates_;
  std::size_t diagonal_entries_ = 0;
  Distribution initial_;
};

/// Incremental, index-based construction of a Ctmc. Duplicate (from, to)
/// transitions are summed.
class CtmcBuilder {
 public:
  std::size_t add_state(std::string label) {
    if (index_.contains(label)) throw InvalidArgument("duplicate state label '" + label + "'");
    const std::size_t id = labels_.size();
    index_.emplace(label, id);
    labels_.push_back(std::move(label));
    return id;
  }

  std::size_t state_count() const { return labels_.size(); }

  std::size_t index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw InvalidArgument("unknown state '" + label + "'");
    return it->second;
  }

  CtmcBuilder& add_transition(std::size_t from, std::size_t to, double rate) {
    if (from >= labels_.size() || to >= labels_.size())
      throw InvalidArgument("transition references an undeclared state");
    if (from == to) throw InvalidArgument("self-loop on state '" + labels_[from] + "'");
    if (!(rate > 0.0) || !std::isfinite(rate))
      throw InvalidArgument("transition " + labels_[from] + " -> " + labels_[to] +
                            " needs a positive finite rate (got " + std::to_string(rate) + ")");
    rates_[{from, to}] += rate;
    return *this;
  }

  CtmcBuilder& add_transition(const std::string& from, const std::string& to, double rate) {
    return add_transition(index_of(from), index_of(to), rate);
  }

  CtmcBuilder& set_initial(Distribution initial) {
    initial_ = std::move(initial);
    return *this;
  }

  /// Point-mass initial distribution on one state.
  CtmcBuilder& set_initial_state(std::size_t state) {
    if (state >= labels_.size()) throw InvalidArgument("initial state is undeclared");
    initial_.assign(labels_.size(), 0.0);
    initial_[state] = 1.0;
    return *this;
  }

  Ctmc build() const {
    const std::size_t n = labels_.size();
    if (n == 0) throw InvalidArgument("a CTMC needs at least one state");

    Ctmc c;
    c.labels_ = labels_;
    c.index_ = index_;
    c.exit_rates_.assign(n, 0.0);
    c.initial_ = Ctmc::validated_distribution(initial_, n);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(rates_.size() + n);
    for (const auto& [edge, rate] : rates_) {
      triplets.emplace_back(static_cast<int>(edge.first), static_cast<int>(edge.second), rate);
      c.exit_rates_[edge.first] += rate;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (c.exit_rates_[i] > 0.0) {
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), -c.exit_rates_[i]);
        ++c.diagonal_entries_;
      }
    }
    c.generator_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    c.generator_.setFromTriplets(triplets.begin(), triplets.end());
    c.generator_.makeCompressed();
    return c;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::pair<std::size_t, std::size_t>, double> rates_;
  Distribution initial_;
};

struct Transition {
  std::string from;
  std::string to;
  double rate;  // per second
};

/// Assemble a chain from declared states and labelled transitions.
inline Ctmc build_ctmc(std::span<const std::string> states, std::span<const Transition> transitions,
                       Distribution initial) {
  CtmcBuilder b;
  for (const auto& s : states) b.add_state(s);
  for (const auto& t : transitions) b.add_transition(t.from, t.to, t.rate);
  b.set_initial(std::move(initial));
  return b.build();
}

inline void validate_reward(const RewardVector& r, std::size_t n) {
  if (r.size() != n)
    throw InvalidArgument("reward vector has " + std::to_string(r.size()) + " entries, expected " +
                          std::to_string(n));
  for (double v : r)
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("rewards must be finite and >= 0");
}

/// Largest |row sum| of the generator; 0 up to rounding for every built chain.
inline double max_row_sum_error(const Ctmc& c) {
  double worst = 0.0;
  const Generator& g = c.generator();
  for (Eigen::Index i = 0; i < g.outerSize(); ++i) {
    double off = 0.0;
    double diag = 0.0;
    for (Generator::InnerIterator it(g, i); it; ++it) {
      if (it.col() == i)
        diag = it.value();
      else
        off += it.value();
    }
    worst = std::max(worst, std::abs(off + diag));
  }
  return worst;
}

}  // namespace pcraft
