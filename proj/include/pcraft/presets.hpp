#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "pcraft/avail_models.hpp"
#include "pcraft/error.hpp"
#include "pcraft/integrity_models.hpp"
#include "pcraft/planner.hpp"
#include "pcraft/types.hpp"
#include "pcraft/units.hpp"

namespace pcraft {

/// A CSV table with a header row. Cells are preformatted strings.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != header.size())
      throw Error(fmt::format("table row has {} cells, header has {}", row.size(), header.size()));
    rows.push_back(std::move(row));
  }

  void write_csv(std::ostream& out) const {
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
        if (!quote) {
          out << cells[i];
          continue;
        }
        out << '"';
        for (char c : cells[i]) out << (c == '"' ? "\"\"" : std::string(1, c));
        out << '"';
      }
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  }
};

/// Shortest round-trip representation.
inline std::string num(double v) { return fmt::format("{}", v); }

/// Axis labels: converted units are rounded so 1/year prints as 1.
inline std::string label(double v) { return fmt::format("{:.10g}", v); }

inline std::string rate_per_year(Rate r) { return label(r.in_per_year()); }
inline std::string seconds_of(Rate r) { return label(r.mean_time().count()); }
inline std::string repair_cell(const std::optional<Rate>& r) { return r ? label(r->in_per_hour()) : std::string("none"); }

/// Rows of a planning sweep: axes first, then the plan itself. Infeasible
/// cells keep the best availability found and are flagged; failed cells
/// carry the error text.
inline Table plan_table(const std::vector<PlanRow>& rows) {
  Table t{{"technique", "deployment", "variant", "hw_crash_per_year", "crash_recovery_seconds",
           "pool_repair_per_hour", "base", "extra", "availability", "nines", "feasible", "evaluations", "error"},
          {}};
  for (const auto& row : rows) {
    const PlanRequest& r = row.request;
    std::vector<std::string> cells{to_string(r.technique),        to_string(r.deployment),
                                   to_string(r.variant),          rate_per_year(r.rates.hw_crash),
                                   seconds_of(r.rates.crash_recovery), repair_cell(r.rates.pool_repair)};
    if (row.result.ok()) {
      const PlanResult& p = row.result.value();
      for (auto s : {std::to_string(p.base), std::to_string(p.extra), num(p.achieved_availability),
                     num(p.achieved_nines), std::string(p.feasible ? "yes" : "no"), std::to_string(p.evaluations),
                     std::string()})
        cells.push_back(s);
    } else {
      for (int i = 0; i < 6; ++i) cells.emplace_back();
      cells.push_back(row.result.error());
    }
    t.add(std::move(cells));
  }
  return t;
}

namespace presets {

inline const std::vector<Rate>& crash_recovery_axis() {
  static const std::vector<Rate> v{Rate::every(Seconds{15.0}), Rate::every(Seconds{60.0}),
                                   Rate::every(Seconds{1800.0})};
  return v;
}

inline std::vector<Rate> yearly_rates(std::initializer_list<double> per_year) {
  std::vector<Rate> out;
  for (double x : per_year) out.push_back(Rate::per_year(x));
  return out;
}

inline PlanRequest base_request(Technique t, Deployment d) {
  PlanRequest r;
  r.technique = t;
  r.deployment = d;
  r.sert_multiplier = 10.0;
  r.target_nines = 3.0;
  r.rates.hw_crash = Rate::per_year(1.0);
  r.rates.crash_recovery = Rate::every(Seconds{15.0});
  return r;
}

/// Cloud ARA extra nodes: variants x {1, 6}/year x {15 s, 1 min, 30 min}.
inline Table ara_cloud(unsigned threads = 1, const SolverOptions& opt = {}) {
  PlanGrid g;
  g.variants.assign(kAllVariants.begin(), kAllVariants.end());
  g.hw_crash = yearly_rates({1.0, 6.0});
  g.crash_recovery = crash_recovery_axis();
  return plan_table(sweep(g, base_request(Technique::active_route_anywhere, Deployment::cloud), threads, opt));
}

/// On-premises ARA extra nodes: variants x {1, 6}/year. Extras run into the
/// thousands at the higher rate, hence the wide cap.
inline Table ara_onprem(unsigned threads = 1, const SolverOptions& opt = {}, int search_cap = 20000) {
  PlanGrid g;
  g.variants.assign(kAllVariants.begin(), kAllVariants.end());
  g.hw_crash = yearly_rates({1.0, 6.0});
  PlanRequest tmpl = base_request(Technique::active_route_anywhere, Deployment::on_premises);
  tmpl.search_cap = search_cap;
  return plan_table(sweep(g, tmpl, threads, opt));
}

/// On-premises PF pool sizes: variants x {1, 6}/year x failover x {no repair, 1 h}.
inline Table pf_onprem(unsigned threads = 1, const SolverOptions& opt = {}) {
  PlanGrid g;
  g.variants.assign(kAllVariants.begin(), kAllVariants.end());
  g.hw_crash = yearly_rates({1.0, 6.0});
  g.crash_recovery = crash_recovery_axis();
  g.pool_repair = {std::nullopt, Rate::per_hour(1.0)};
  return plan_table(sweep(g, base_request(Technique::passive_failover, Deployment::on_premises), threads, opt));
}

/// Yearly availability of a single node, 1..12 crashes/year: cloud at each
/// recovery time, plus on premises (no recovery).
inline Table single_node(unsigned threads = 1, const SolverOptions& opt = {}) {
  struct Cell {
    Deployment deployment;
    std::optional<Rate> recovery;
    Rate lambda;
  };
  std::vector<Cell> cells;
  for (Rate cr : crash_recovery_axis())
    for (int l = 1; l <= 12; ++l) cells.push_back({Deployment::cloud, cr, Rate::per_year(l)});
  for (int l = 1; l <= 12; ++l) cells.push_back({Deployment::on_premises, std::nullopt, Rate::per_year(l)});

  auto results = sweep_cells(
      cells,
      [&](const Cell& c) {
        ClusterSpec s{Technique::active_route_anywhere, c.deployment, 1, 0, 0};
        AvailRates r{c.lambda, c.recovery.value_or(Rate::every(Seconds{15.0})), std::nullopt, RecoveryPolicy::parallel};
        return availability(build_ara_model(s, r), one_year, opt);
      },
      threads);

  Table t{{"deployment", "crash_recovery_seconds", "hw_crash_per_year", "availability", "nines", "downtime_hours"}, {}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const auto& a = results[i].value();
    t.add({to_string(c.deployment), c.recovery ? seconds_of(*c.recovery) : std::string("none"), rate_per_year(c.lambda),
           num(a.availability), num(a.nines), num(a.downtime_hours)});
  }
  return t;
}

/// Availability with UpNodes == Num and no over-provisioning, for cluster
/// sizes 1..max_nodes at 1 and 6 crashes/year (cloud recovery 15 s).
inline Table cluster_no_op(unsigned threads = 1, const SolverOptions& opt = {}, int max_nodes = 20) {
  struct Cell {
    Deployment deployment;
    Rate lambda;
    int nodes;
  };
  std::vector<Cell> cells;
  for (Deployment d : {Deployment::cloud, Deployment::on_premises})
    for (double l : {1.0, 6.0})
      for (int n = 1; n <= max_nodes; ++n) cells.push_back({d, Rate::per_year(l), n});

  auto results = sweep_cells(
      cells,
      [&](const Cell& c) {
        ClusterSpec s{Technique::active_route_anywhere, c.deployment, c.nodes, 0, 0};
        AvailRates r{c.lambda, Rate::every(Seconds{15.0}), std::nullopt, RecoveryPolicy::parallel};
        return availability(build_ara_model(s, r), one_year, opt);
      },
      threads);

  Table t{{"deployment", "hw_crash_per_year", "nodes", "availability", "nines"}, {}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const auto& a = results[i].value();
    t.add({to_string(c.deployment), rate_per_year(c.lambda), std::to_string(c.nodes), num(a.availability), num(a.nines)});
  }
  return t;
}

/// Fault rates of the integrity sweep: a month range and a day range.
struct IntegrityPoint {
  std::string band;  // "month" or "day"
  double count;      // faults per band unit
  Rate rate;
};

inline std::vector<IntegrityPoint> integrity_axis() {
  std::vector<IntegrityPoint> out;
  for (double m : {1.0, 2.0, 4.0, 8.0, 16.0, 30.0}) out.push_back({"month", m, Rate::per_month(m)});
  for (double d : {1.0, 2.0, 4.0, 8.0, 16.0, 24.0}) out.push_back({"day", d, Rate::per_day(d)});
  return out;
}

/// Normalised Correct / Corrupt / Down time over one month in the cloud.
inline Table integrity(unsigned threads = 1, const SolverOptions& opt = {}) {
  struct Cell {
    NodeVariant variant;
    IntegrityPoint point;
  };
  std::vector<Cell> cells;
  for (NodeVariant v : kAllVariants)
    for (const auto& p : integrity_axis()) cells.push_back({v, p});

  auto results = sweep_cells(
      cells,
      [&](const Cell& c) {
        const IntegrityRates r = derive_integrity_rates(c.variant, c.point.rate, TransientSplit::defaults(c.variant));
        return integrity_breakdown(build_integrity_model(r, Deployment::cloud), one_month, opt);
      },
      threads);

  Table t{{"variant", "band", "faults_per_unit", "correct", "corrupt", "down"}, {}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const auto& r = results[i].value();
    t.add({to_string(c.variant), c.point.band, label(c.point.count), num(r.correct), num(r.corrupt), num(r.down)});
  }
  return t;
}

using PresetFn = std::function<Table(unsigned, const SolverOptions&)>;

/// Named presets, in the order `sweep --all` writes them.
inline const std::vector<std::pair<std::string, PresetFn>>& all() {
  static const std::vector<std::pair<std::string, PresetFn>> v{
      {"single-node", [](unsigned t, const SolverOptions& o) { return single_node(t, o); }},
      {"cluster-no-op", [](unsigned t, const SolverOptions& o) { return cluster_no_op(t, o); }},
      {"ara-cloud", [](unsigned t, const SolverOptions& o) { return ara_cloud(t, o); }},
      {"ara-onprem", [](unsigned t, const SolverOptions& o) { return ara_onprem(t, o); }},
      {"pf-onprem", [](unsigned t, const SolverOptions& o) { return pf_onprem(t, o); }},
      {"integrity", [](unsigned t, const SolverOptions& o) { return integrity(t, o); }},
  };
  return v;
}

inline const PresetFn& find(std::string_view name) {
  for (const auto& [n, fn] : all())
    if (n == name) return fn;
  std::string known;
  for (const auto& [n, fn] : all()) known += (known.empty() ? "" : ", ") + n;
  throw InvalidArgument("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

}  // namespace presets

}  // namespace pcraft
