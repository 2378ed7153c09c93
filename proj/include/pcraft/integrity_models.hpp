#pragma once

#include <optional>
#include <string>

#include "pcraft/ctmc.hpp"
#include "pcraft/error.hpp"
#include "pcraft/transient.hpp"
#include "pcraft/types.hpp"
#include "pcraft/units.hpp"

namespace pcraft {

/// Outcome probabilities of one transient fault; the remainder is masked.
struct TransientSplit {
  double p_corrupt = 0.0;
  double p_crash = 0.0;
  double p_retry = 0.0;

  /// Fault-injection outcome probabilities for each node variant.
  static TransientSplit defaults(NodeVariant v) {
    switch (v) {
      case NodeVariant::native: return {0.2619, 0.1249, 0.0};
      case NodeVariant::ft_ilr: return {0.008, 0.75, 0.0};
      case NodeVariant::ft_tx: return {0.0117, 0.0772, 0.6699};
    }
    return {};
  }

  void validate(NodeVariant v) const {
    for (double p : {p_corrupt, p_crash, p_retry})
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("transient split probabilities must lie in [0, 1]");
    if (p_corrupt + p_crash + p_retry > 1.0 + 1e-12)
      throw InvalidArgument("transient split probabilities sum to more than 1");
    if (p_retry > 0.0 && v != NodeVariant::ft_tx) throw InvalidArgument("only ft_tx nodes retry detected faults");
  }
};

struct RecoveryTimes {
  Seconds sdc_recovery = Hours{6.0};
  Seconds retry_tx = Seconds{2.5e-6};
  /// Retry -> Crash rate; the retry never fails when absent.
  std::optional<Rate> crash_tx;
  /// Crash -> Correct replacement time; absent for on-premises nodes without a pool.
  std::optional<Seconds> crash_recovery = Seconds{15.0};
};

/// Transition rates of the per-node integrity chain.
struct IntegrityRates {
  Rate sdc;           // Correct -> Corrupt
  Rate crash;         // Correct -> Crash
  Rate detected;      // Correct -> Retry (ft_tx only)
  Rate retry_ok;      // Retry -> Correct
  Rate retry_crash;   // Retry -> Crash
  Rate sdc_recovery;  // Corrupt -> Correct
  std::optional<Rate> crash_recovery;  // Crash -> Correct

  void validate() const {
    for (Rate r : {sdc, crash, detected, retry_ok, retry_crash, sdc_recovery})
      if (!(r.per_second() >= 0.0) || !std::isfinite(r.per_second()))
        throw InvalidArgument("integrity rates must be finite and >= 0");
    if (crash_recovery && !crash_recovery->is_positive())
      throw InvalidArgument("crash recovery rate must be positive");
  }
};

/// Fault outcome rates are the transient fault rate times the split.
inline IntegrityRates derive_integrity_rates(NodeVariant variant, Rate transient_rate, const TransientSplit& split,
                                             const RecoveryTimes& recovery = {}) {
  if (!(transient_rate.per_second() >= 0.0) || !std::isfinite(transient_rate.per_second()))
    throw InvalidArgument("transient fault rate must be finite and >= 0");
  split.validate(variant);
  IntegrityRates r;
  r.sdc = transient_rate * split.p_corrupt;
  r.crash = transient_rate * split.p_crash;
  r.detected = transient_rate * split.p_retry;
  r.sdc_recovery = Rate::every(recovery.sdc_recovery);
  if (variant == NodeVariant::ft_tx) {
    r.retry_ok = Rate::every(recovery.retry_tx);
    if (recovery.crash_tx) r.retry_crash = *recovery.crash_tx;
  }
  if (recovery.crash_recovery) r.crash_recovery = Rate::every(*recovery.crash_recovery);
  r.validate();
  return r;
}

struct IntegrityModel {
  Ctmc chain;
  std::size_t correct = 0;
  std::size_t corrupt = 1;
  std::size_t crash = 2;
  std::optional<std::size_t> retry;
};

/// Correct / Corrupt / Crash (+ Retry when faults can be detected). Zero
/// rates produce no edge. The cloud always replaces crashed nodes; on
/// premises the Crash state is absorbing unless a crash recovery rate is
/// given.
inline IntegrityModel build_integrity_model(const IntegrityRates& rates, Deployment deployment) {
  rates.validate();
  if (deployment == Deployment::cloud && !rates.crash_recovery)
    throw InvalidArgument("cloud integrity model needs a crash recovery rate");

  IntegrityModel m;
  CtmcBuilder b;
  m.correct = b.add_state("Correct");
  m.corrupt = b.add_state("Corrupt");
  m.crash = b.add_state("Crash");
  if (rates.detected.per_second() > 0.0) m.retry = b.add_state("Retry");

  auto edge = [&](std::size_t from, std::size_t to, Rate r) {
    if (r.per_second() > 0.0) b.add_transition(from, to, r.per_second());
  };
  edge(m.correct, m.corrupt, rates.sdc);
  edge(m.correct, m.crash, rates.crash);
  edge(m.corrupt, m.correct, rates.sdc_recovery);
  if (rates.crash_recovery) edge(m.crash, m.correct, *rates.crash_recovery);
  if (m.retry) {
    edge(m.correct, *m.retry, rates.detected);
    edge(*m.retry, m.correct, rates.retry_ok);
    edge(*m.retry, m.crash, rates.retry_crash);
  }
  b.set_initial_state(m.correct);
  m.chain = b.build();
  return m;
}

struct IntegrityReport {
  double correct = 0.0;
  double corrupt = 0.0;
  double down = 0.0;  // Crash + Retry
};

/// Normalised time in each state over the horizon.
inline IntegrityReport integrity_breakdown(const IntegrityModel& model, Seconds horizon,
                                           const SolverOptions& opt = {}) {
  const double t = horizon.count();
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("horizon must be positive");
  const std::vector<double> occ = state_occupancy(model.chain, t, opt);
  IntegrityReport r;
  r.correct = occ[model.correct] / t;
  r.corrupt = occ[model.corrupt] / t;
  r.down = occ[model.crash] / t + (model.retry ? occ[*model.retry] / t : 0.0);
  return r;
}

}  // namespace pcraft
