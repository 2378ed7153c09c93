// pcraft: capacity planning from availability and integrity models.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pcraft/pcraft.hpp"

namespace {

using namespace pcraft;

constexpr int kExitOk = 0;
constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

struct Options {
  unsigned threads = 1;
  std::string config;
  std::string out;
  std::vector<std::string> sets;
};

/// Config file plus `--set key=value` overrides.
ScenarioConfig load_config(const Options& o) {
  ScenarioConfig cfg = o.config.empty() ? ScenarioConfig{} : ScenarioConfig::load(o.config);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + kv + "'");
    cfg.set(std::string(detail::trim(std::string_view(kv).substr(0, eq))),
            std::string(detail::trim(std::string_view(kv).substr(eq + 1))));
  }
  return cfg;
}

void emit(const Table& t, const std::string& out) {
  if (out.empty() || out == "-") {
    t.write_csv(std::cout);
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error("cannot write " + out);
  t.write_csv(f);
  if (!f) throw Error("write failed for " + out);
}

// --- ingest ---------------------------------------------------------------

struct CurveArg {
  std::string application;
  NodeVariant variant;
  std::string path;
};

CurveArg parse_curve_arg(const std::string& s) {
  // app:variant=path
  const auto colon = s.find(':');
  const auto eq = s.find('=');
  if (colon == std::string::npos || eq == std::string::npos || eq < colon)
    throw InvalidArgument("--curve expects APP:VARIANT=PATH, got '" + s + "'");
  return {s.substr(0, colon), parse_variant(s.substr(colon + 1, eq - colon - 1)), s.substr(eq + 1)};
}

Table run_ingest(const Options& o, const std::vector<std::string>& curves, std::optional<double> threshold) {
  const ScenarioConfig cfg = load_config(o);
  if (!threshold) threshold = cfg.number("latency_threshold_ms");
  if (!threshold) throw InvalidArgument("a latency threshold is required (--latency-threshold-ms or latency_threshold_ms)");
  const double sert = cfg.number_or("sert_multiplier", 10.0);

  std::map<std::string, std::map<NodeVariant, double>> per_app;
  for (const auto& arg : curves) {
    const CurveArg c = parse_curve_arg(arg);
    std::ifstream in(c.path);
    if (!in) throw Error("cannot open " + c.path);
    PerfCurve curve;
    try {
      curve = parse_benchmark_csv(in, c.application, c.variant);
    } catch (const ParseError& e) {
      throw ParseError(c.path + ": " + e.what());
    }
    if (!per_app[c.application].emplace(c.variant, saturation_throughput(curve, *threshold)).second)
      throw InvalidArgument(fmt::format("duplicate curve for {}:{}", c.application, to_string(c.variant)));
  }

  Table t{{"application", "variant", "nodt", "ratio", "base_nodes"}, {}};
  std::vector<std::map<NodeVariant, double>> all;
  for (const auto& [app, nodt] : per_app) {
    if (!nodt.contains(NodeVariant::native)) {
      // no baseline: report raw throughput only
      for (const auto& [v, x] : nodt) t.add({app, to_string(v), num(x), "", ""});
      continue;
    }
    const PerfProfile p = degradation_ratios(nodt);
    for (const auto& [v, x] : p.nodt)
      t.add({app, to_string(v), num(x), num(p.ratios.at(v)), std::to_string(required_base_nodes(sert, p.ratios.at(v)))});
    all.push_back(nodt);
  }
  if (all.size() > 1) {
    const PerfProfile mean = degradation_ratios(std::span<const std::map<NodeVariant, double>>(all));
    for (const auto& [v, r] : mean.ratios)
      t.add({"mean", to_string(v), num(mean.nodt.at(v)), num(r), std::to_string(required_base_nodes(sert, r))});
  }
  return t;
}

// --- avail ----------------------------------------------------------------

Table run_avail(const Options& o) {
  const ScenarioConfig cfg = load_config(o);
  const ClusterSpec spec = config::cluster_spec(cfg);
  const Seconds horizon = config::horizon(cfg);
  const PlanGrid axes = config::plan_grid(cfg);

  struct Cell {
    AvailRates rates;
  };
  std::vector<Cell> cells;
  for (Rate l : axes.hw_crash)
    for (Rate cr : axes.crash_recovery)
      for (const auto& pr : axes.pool_repair) cells.push_back({{l, cr, pr, config::recovery_policy(cfg)}});

  auto results = sweep_cells(
      cells,
      [&](const Cell& c) {
        const ClusterModel m = build_cluster_model(spec, c.rates);
        return std::make_pair(m.chain.size(), availability(m, horizon));
      },
      o.threads);

  Table t{{"technique", "deployment", "num", "op", "pool", "hw_crash_per_year", "crash_recovery_seconds",
           "pool_repair_per_hour", "states", "availability", "nines", "downtime_hours"},
          {}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!results[i].ok()) throw Error(results[i].error());
    const auto& [states, a] = results[i].value();
    const AvailRates& r = cells[i].rates;
    t.add({to_string(spec.technique), to_string(spec.deployment), std::to_string(spec.num), std::to_string(spec.op),
           std::to_string(spec.pool), rate_per_year(r.hw_crash), seconds_of(r.crash_recovery), repair_cell(r.pool_repair),
           std::to_string(states), num(a.availability), num(a.nines), num(a.downtime_hours)});
  }
  return t;
}

// --- integrity ------------------------------------------------------------

IntegrityModel integrity_model(const ScenarioConfig& cfg, NodeVariant v, Rate transient) {
  const Deployment d = config::deployment(cfg);
  const IntegrityRates rates =
      derive_integrity_rates(v, transient, config::transient_split(cfg, v), config::recovery_times(cfg, d));
  return build_integrity_model(rates, d);
}

Table run_integrity(const Options& o) {
  const ScenarioConfig cfg = load_config(o);
  const Seconds horizon = config::horizon(cfg, one_month);
  struct Cell {
    NodeVariant variant;
    Rate rate;
  };
  std::vector<Cell> cells;
  for (NodeVariant v : config::variants(cfg))
    for (Rate r : config::transient_rates(cfg)) cells.push_back({v, r});

  auto results = sweep_cells(
      cells, [&](const Cell& c) { return integrity_breakdown(integrity_model(cfg, c.variant, c.rate), horizon); },
      o.threads);

  Table t{{"variant", "deployment", "transient_rate_per_month", "correct", "corrupt", "down"}, {}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!results[i].ok()) throw Error(results[i].error());
    const IntegrityReport& r = results[i].value();
    t.add({to_string(cells[i].variant), to_string(config::deployment(cfg)), label(cells[i].rate.in_per_month()),
           num(r.correct), num(r.corrupt), num(r.down)});
  }
  return t;
}

// --- plan / sweep ---------------------------------------------------------

Table run_plan(const Options& o) {
  const ScenarioConfig cfg = load_config(o);
  const PlanRequest tmpl = config::plan_request(cfg);
  PlanGrid grid;
  grid.variants = config::variants(cfg);
  if (cfg.has("throughput_ratio")) {
    if (grid.variants.size() > 1) throw cfg.bad("throughput_ratio", "needs a single node_variant");
    grid.variants.clear();
  }
  const auto rows = sweep(grid, tmpl, o.threads);

  Table t{{"variant", "base", "extra", "availability", "nines", "feasible", "evaluations"}, {}};
  for (const auto& row : rows) {
    if (!row.result.ok()) throw Error(row.result.error());
    const PlanResult& p = row.result.value();
    t.add({to_string(row.request.variant), std::to_string(p.base), std::to_string(p.extra),
           num(p.achieved_availability), num(p.achieved_nines), p.feasible ? "yes" : "no",
           std::to_string(p.evaluations)});
  }
  return t;
}

int run_sweep(const Options& o, const std::string& preset, bool all, const std::string& out_dir) {
  if (all) {
    if (out_dir.empty()) throw InvalidArgument("--all needs --out-dir");
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, fn] : presets::all()) {
      const auto path = std::filesystem::path(out_dir) / (name + ".csv");
      emit(fn(o.threads, {}), path.string());
      std::cerr << "wrote " << path.string() << '\n';
    }
    return kExitOk;
  }
  if (!preset.empty()) {
    emit(presets::find(preset)(o.threads, {}), o.out);
    return kExitOk;
  }
  if (o.config.empty() && o.sets.empty()) throw InvalidArgument("sweep needs --preset, --all or --config");
  const ScenarioConfig cfg = load_config(o);
  emit(plan_table(sweep(config::plan_grid(cfg), config::plan_request(cfg), o.threads)), o.out);
  return kExitOk;
}

// --- simulate -------------------------------------------------------------

Table run_simulate(const Options& o, const std::string& metric, std::optional<std::size_t> reps,
                   std::optional<std::uint64_t> seed) {
  const ScenarioConfig cfg = load_config(o);
  const std::size_t replications = reps.value_or(static_cast<std::size_t>(cfg.integer("replications").value_or(10000)));
  const std::uint64_t s = seed.value_or(static_cast<std::uint64_t>(cfg.integer("seed").value_or(1)));

  Ctmc chain;
  RewardVector reward;
  Seconds horizon;
  if (metric == "availability") {
    const ClusterModel m = build_cluster_model(config::cluster_spec(cfg), config::avail_rates(cfg));
    chain = m.chain;
    reward = m.available_reward();
    horizon = config::horizon(cfg);
  } else {
    const NodeVariant v = config::variant(cfg);
    const IntegrityModel m =
        integrity_model(cfg, v, config::single(cfg, "transient_rate_per_month", config::transient_rates(cfg)));
    chain = m.chain;
    reward.assign(chain.size(), 0.0);
    if (metric == "correct")
      reward[m.correct] = 1.0;
    else if (metric == "corrupt")
      reward[m.corrupt] = 1.0;
    else {
      reward[m.crash] = 1.0;
      if (m.retry) reward[*m.retry] = 1.0;
    }
    horizon = config::horizon(cfg, one_month);
  }

  const double t = horizon.count();
  const double analytic = cumulative_occupancy(chain, reward, t) / t;
  const SimEstimate est = simulate_ctmc(chain, reward, t, replications, s, o.threads).scaled(1.0 / t);
  Table out{{"metric", "analytic", "sim_mean", "ci_half_width", "replications", "seed", "covered"}, {}};
  out.add({metric, num(analytic), num(est.mean), num(est.ci_half_width), std::to_string(est.replications),
           std::to_string(est.seed), est.covers(analytic) ? "yes" : "no"});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcraft: node counts for throughput and availability targets under crash and transient faults"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads, "Worker threads for sweeps and simulation")->check(CLI::Range(1u, 256u));

  auto common = [&o](CLI::App* sub, bool with_config = true) {
    if (with_config) {
      sub->add_option("--config,-c", o.config, "Scenario file (key = value lines)")->check(CLI::ExistingFile);
      sub->add_option("--set", o.sets, "Override a scenario key: key=value");
    }
    sub->add_option("--out,-o", o.out, "Output CSV (default stdout)");
  };

  auto* ingest = app.add_subcommand("ingest", "Saturation throughput and degradation ratios from benchmark CSVs");
  std::vector<std::string> curves;
  std::optional<double> threshold;
  ingest->add_option("--curve", curves, "APP:VARIANT=PATH (repeatable)")->required();
  ingest->add_option("--latency-threshold-ms", threshold, "Acceptable mean latency");
  common(ingest);

  auto* avail = app.add_subcommand("avail", "Availability of a cluster over the horizon");
  common(avail);
  avail->needs(avail->get_option("--config"));

  auto* integ = app.add_subcommand("integrity", "Time in Correct / Corrupt / Down under transient faults");
  common(integ);
  integ->needs(integ->get_option("--config"));

  auto* plan = app.add_subcommand("plan", "Minimal over-provisioning for an availability target");
  common(plan);
  plan->needs(plan->get_option("--config"));

  auto* sweep_cmd = app.add_subcommand("sweep", "Planning grid from a scenario, or a named preset");
  std::string preset, out_dir;
  bool all = false;
  common(sweep_cmd);
  sweep_cmd->add_option("--preset", preset, "single-node, cluster-no-op, ara-cloud, ara-onprem, pf-onprem, integrity");
  sweep_cmd->add_flag("--all", all, "Write every preset to --out-dir");
  sweep_cmd->add_option("--out-dir", out_dir, "Directory for --all");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate next to the analytic value");
  std::string metric = "availability";
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  common(simulate);
  simulate->needs(simulate->get_option("--config"));
  simulate->add_option("--metric", metric, "availability, correct, corrupt or down")
      ->check(CLI::IsMember({"availability", "correct", "corrupt", "down"}));
  simulate->add_option("--replications", reps, "Replications (>= 2)");
  simulate->add_option("--seed", seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) emit(run_ingest(o, curves, threshold), o.out);
    if (*avail) emit(run_avail(o), o.out);
    if (*integ) emit(run_integrity(o), o.out);
    if (*plan) emit(run_plan(o), o.out);
    if (*sweep_cmd) return run_sweep(o, preset, all, out_dir);
    if (*simulate) emit(run_simulate(o, metric, reps, seed), o.out);
  } catch (const ParseError& e) {
    std::cerr << "pcraft: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "pcraft: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "pcraft: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitOk;
}
