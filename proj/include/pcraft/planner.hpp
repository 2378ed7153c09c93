#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "pcraft/avail_models.hpp"
#include "pcraft/error.hpp"
#include "pcraft/transient.hpp"
#include "pcraft/types.hpp"
#include "pcraft/units.hpp"

namespace pcraft {

/// Average throughput of each variant relative to native.
inline double default_throughput_ratio(NodeVariant v) {
  switch (v) {
    case NodeVariant::native: return 1.0;
    case NodeVariant::ft_ilr: return 0.92;
    case NodeVariant::ft_tx: return 0.71;
  }
  return 1.0;
}

/// Num = ceil(SerT / NodT), with SerT given as a multiple of native NodT.
inline int required_base_nodes(double sert_multiplier, double ratio) {
  if (!(sert_multiplier > 0.0) || !std::isfinite(sert_multiplier))
    throw InvalidArgument("service target multiplier must be positive");
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw InvalidArgument("throughput ratio must be positive");
  // absorb rounding so that e.g. 10 / 1.0 stays exactly 10
  return static_cast<int>(std::ceil(sert_multiplier / ratio - 1e-9));
}

inline double target_availability(double target_nines) { return 1.0 - std::pow(10.0, -target_nines); }

struct PlanRequest {
  double sert_multiplier = 10.0;
  NodeVariant variant = NodeVariant::native;
  std::optional<double> throughput_ratio;  // defaults per variant
  Deployment deployment = Deployment::cloud;
  Technique technique = Technique::active_route_anywhere;
  AvailRates rates;
  double target_nines = 3.0;
  Seconds horizon = one_year;
  int search_cap = 1000;

  double ratio() const { return throughput_ratio.value_or(default_throughput_ratio(variant)); }

  void validate() const {
    if (!(sert_multiplier > 0.0)) throw InvalidArgument("sert_multiplier must be > 0");
    if (!(target_nines > 0.0)) throw InvalidArgument("target_nines must be > 0");
    if (!(horizon.count() > 0.0)) throw InvalidArgument("horizon must be > 0");
    if (search_cap < 1) throw InvalidArgument("search_cap must be >= 1");
    rates.validate();
  }
};

struct PlanResult {
  int base = 0;
  int extra = 0;  // OP for ARA, pool size for PF
  double achieved_availability = 0.0;
  double achieved_nines = 0.0;
  int evaluations = 0;
  bool feasible = true;
  /// Supremum of availability over all extras, when known (PF: the
  /// unbounded-pool model).
  std::optional<double> availability_limit;
};

/// Outcome of searching the smallest extra in [0, cap] with
/// evaluate(extra) >= target.
struct SearchOutcome {
  int extra = 0;
  double value = 0.0;
  int evaluations = 0;
  bool feasible = false;
};

/// Exponential probing followed by bisection; relies on evaluate() being
/// non-decreasing in extra. Infeasible searches report the cap.
template <class Evaluate>
SearchOutcome search_minimal_extra(Evaluate&& evaluate, double target, int cap) {
  if (cap < 0) throw InvalidArgument("search cap must be >= 0");
  SearchOutcome out;
  std::map<int, double> seen;
  auto eval = [&](int x) {
    if (auto it = seen.find(x); it != seen.end()) return it->second;
    ++out.evaluations;
    const double v = evaluate(x);
    seen.emplace(x, v);
    return v;
  };

  int fail = -1;  // largest extra known to miss the target
  int ok = -1;    // smallest extra known to meet it
  for (int x = 0;; x = (x == 0 ? 1 : 2 * x)) {
    const int probe = std::min(x, cap);
    if (eval(probe) >= target) {
      ok = probe;
      break;
    }
    fail = probe;
    if (probe == cap) break;
  }
  if (ok < 0) {
    out.extra = cap;
    out.value = seen.at(cap);
    out.feasible = false;
    return out;
  }
  while (ok - fail > 1) {
    const int mid = fail + (ok - fail) / 2;
    if (eval(mid) >= target)
      ok = mid;
    else
      fail = mid;
  }
  out.extra = ok;
  out.value = seen.at(ok);
  out.feasible = true;
  return out;
}

/// Reference linear scan, used to validate search_minimal_extra.
template <class Evaluate>
SearchOutcome linear_minimal_extra(Evaluate&& evaluate, double target, int cap) {
  SearchOutcome out;
  for (int x = 0; x <= cap; ++x) {
    ++out.evaluations;
    const double v = evaluate(x);
    if (v >= target || x == cap) {
      out.extra = x;
      out.value = v;
      out.feasible = v >= target;
      return out;
    }
  }
  return out;
}

/// Cluster spec for a given number of extra nodes.
inline ClusterSpec spec_with_extra(const PlanRequest& req, int base, int extra) {
  ClusterSpec s;
  s.technique = req.technique;
  s.deployment = req.deployment;
  s.num = base;
  if (req.technique == Technique::active_route_anywhere)
    s.op = extra;
  else
    s.pool = extra;
  return s;
}

/// Smallest over-provisioning (ARA extra nodes or PF pool size) meeting the
/// availability target. Cloud PF has no pool to size; it is evaluated as is.
inline PlanResult plan_capacity(const PlanRequest& req, const SolverOptions& opt = {}) {
  req.validate();
  PlanResult res;
  res.base = required_base_nodes(req.sert_multiplier, req.ratio());
  const double target = target_availability(req.target_nines);

  auto evaluate = [&](int extra) {
    const ClusterModel m = build_cluster_model(spec_with_extra(req, res.base, extra), req.rates);
    return availability(m, req.horizon, opt).availability;
  };

  const bool sized_pool = req.technique == Technique::passive_failover && req.deployment == Deployment::on_premises;
  if (req.technique == Technique::passive_failover) {
    // any finite pool is dominated by the unbounded one
    ClusterSpec unbounded = spec_with_extra(req, res.base, 0);
    unbounded.deployment = Deployment::cloud;
    res.availability_limit = availability(build_pf_model(unbounded, req.rates), req.horizon, opt).availability;
    ++res.evaluations;
  }

  SearchOutcome found;
  if (!sized_pool && req.technique == Technique::passive_failover) {
    found = {0, *res.availability_limit, 0, *res.availability_limit >= target};
  } else if (sized_pool && *res.availability_limit < target) {
    found.extra = 0;
    found.value = evaluate(0);
    found.evaluations = 1;
    found.feasible = false;
  } else {
    found = search_minimal_extra(evaluate, target, req.search_cap);
  }

  res.extra = found.extra;
  res.achieved_availability = found.value;
  res.achieved_nines = nines(found.value, req.horizon).nines;
  res.evaluations += found.evaluations;
  res.feasible = found.feasible;
  return res;
}

/// Result of one sweep cell: a value or the error that cell raised.
template <class T>
struct CellResult {
  std::variant<T, std::string> outcome;
  bool ok() const { return outcome.index() == 0; }
  const T& value() const { return std::get<0>(outcome); }
  const std::string& error() const { return std::get<1>(outcome); }
};

/// Evaluates fn on every cell, optionally on several threads, and returns
/// results in cell order. A throwing cell is recorded, not propagated.
template <class Cell, class Fn>
auto sweep_cells(const std::vector<Cell>& cells, Fn&& fn, unsigned threads = 1)
    -> std::vector<CellResult<std::invoke_result_t<Fn&, const Cell&>>> {
  using T = std::invoke_result_t<Fn&, const Cell&>;
  if (cells.empty()) throw InvalidArgument("sweep grid is empty");
  std::vector<CellResult<T>> out(cells.size(), CellResult<T>{std::string("not evaluated")});

  auto run = [&](std::size_t i) {
    try {
      out[i].outcome = fn(cells[i]);
    } catch (const std::exception& e) {
      out[i].outcome = std::string(e.what());
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) run(i);
    });
  pool.clear();
  return out;
}

/// Cartesian grid of planning requests. Empty axes keep the template value.
struct PlanGrid {
  std::vector<NodeVariant> variants;
  std::vector<Rate> hw_crash;
  std::vector<Rate> crash_recovery;
  std::vector<std::optional<Rate>> pool_repair;
  std::vector<Deployment> deployments;
  std::vector<Technique> techniques;

  /// Row-major expansion: the earliest axis varies slowest.
  std::vector<PlanRequest> expand(const PlanRequest& tmpl) const {
    std::vector<PlanRequest> out{tmpl};
    auto axis = [&out](const auto& values, auto apply) {
      if (values.empty()) return;
      std::vector<PlanRequest> next;
      next.reserve(out.size() * values.size());
      for (const auto& r : out)
        for (const auto& v : values) {
          PlanRequest c = r;
          apply(c, v);
          next.push_back(c);
        }
      out = std::move(next);
    };
    axis(techniques, [](PlanRequest& r, Technique t) { r.technique = t; });
    axis(deployments, [](PlanRequest& r, Deployment d) { r.deployment = d; });
    axis(variants, [](PlanRequest& r, NodeVariant v) {
      r.variant = v;
      r.throughput_ratio.reset();
    });
    axis(hw_crash, [](PlanRequest& r, Rate x) { r.rates.hw_crash = x; });
    axis(crash_recovery, [](PlanRequest& r, Rate x) { r.rates.crash_recovery = x; });
    axis(pool_repair, [](PlanRequest& r, std::optional<Rate> x) { r.rates.pool_repair = x; });
    return out;
  }
};

struct PlanRow {
  PlanRequest request;
  CellResult<PlanResult> result;
};

inline std::vector<PlanRow> sweep(const PlanGrid& grid, const PlanRequest& tmpl, unsigned threads = 1,
                                  const SolverOptions& opt = {}) {
  const std::vector<PlanRequest> cells = grid.expand(tmpl);
  auto results = sweep_cells(cells, [&](const PlanRequest& r) { return plan_capacity(r, opt); }, threads);
  std::vector<PlanRow> rows;
  rows.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) rows.push_back({cells[i], std::move(results[i])});
  return rows;
}

}  // namespace pcraft
