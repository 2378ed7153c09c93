#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "pcraft/avail_models.hpp"
#include "pcraft/error.hpp"
#include "pcraft/integrity_models.hpp"
#include "pcraft/perf_ingest.hpp"
#include "pcraft/planner.hpp"
#include "pcraft/types.hpp"
#include "pcraft/units.hpp"

namespace pcraft {

/// Keys accepted in scenario files; units are part of the name.
inline constexpr std::array<std::string_view, 26> kConfigKeys{
    "technique",           "deployment",         "node_variant",        "sert_multiplier",
    "target_nines",        "horizon_hours",      "hw_crash_per_year",   "crash_recovery_seconds",
    "pool_repair_per_hour", "transient_rate_per_month", "latency_threshold_ms", "p_corrupt",
    "p_crash",             "p_retry",            "sdc_recovery_hours",  "retry_tx_microseconds",
    "crash_tx_per_second", "throughput_ratio",   "num",                 "op",
    "pool",                "search_cap",         "recovery_policy",     "replications",
    "seed",                "transient_rate_per_day",
};

/// Flat `key = value` scenario file. `#` starts a comment; values may be
/// comma-separated lists where a sweep axis is expected.
class ScenarioConfig {
 public:
  static ScenarioConfig parse(std::istream& in, std::string source = "<config>") {
    ScenarioConfig cfg;
    cfg.source_ = std::move(source);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      ++row;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string_view body = detail::trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ParseError(cfg.source_ + ": expected 'key = value'", row);
      const std::string key(detail::trim(body.substr(0, eq)));
      const std::string value(detail::trim(body.substr(eq + 1)));
      if (key.empty()) throw ParseError(cfg.source_ + ": empty key", row);
      if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
        throw ParseError(cfg.source_ + ": unknown key '" + key + "'", row);
      if (value.empty()) throw ParseError(cfg.source_ + ": key '" + key + "' has no value", row);
      if (cfg.values_.contains(key)) throw ParseError(cfg.source_ + ": duplicate key '" + key + "'", row);
      cfg.values_[key] = {value, row};
    }
    return cfg;
  }

  static ScenarioConfig parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static ScenarioConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path.string());
    return parse(in, path.string());
  }

  bool has(std::string_view key) const { return values_.find(std::string(key)) != values_.end(); }

  void set(const std::string& key, const std::string& value) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
      throw ParseError("unknown key '" + key + "'");
    values_[key] = {value, 0};
  }

  std::optional<std::string> text(std::string_view key) const {
    auto it = values_.find(std::string(key));
    if (it == values_.end()) return std::nullopt;
    return it->second.value;
  }

  std::vector<std::string> list(std::string_view key) const {
    std::vector<std::string> out;
    if (auto v = text(key))
      for (auto part : detail::split_commas(*v)) {
        if (part.empty()) throw bad(key, "empty list element");
        out.emplace_back(part);
      }
    return out;
  }

  std::optional<double> number(std::string_view key) const {
    auto v = text(key);
    if (!v) return std::nullopt;
    return to_number(key, *v);
  }

  double number_or(std::string_view key, double fallback) const { return number(key).value_or(fallback); }

  double required_number(std::string_view key) const {
    auto v = number(key);
    if (!v) throw bad(key, "is required");
    return *v;
  }

  std::vector<double> numbers(std::string_view key) const {
    std::vector<double> out;
    for (const auto& s : list(key)) out.push_back(to_number(key, s));
    return out;
  }

  std::optional<int> integer(std::string_view key) const {
    auto v = number(key);
    if (!v) return std::nullopt;
    if (*v != std::floor(*v) || *v < 0 || *v > 1e9) throw bad(key, "expected a nonnegative integer");
    return static_cast<int>(*v);
  }

  /// Diagnostic that names the offending key (and its line when known).
  ParseError bad(std::string_view key, const std::string& what) const {
    auto it = values_.find(std::string(key));
    const std::size_t row = it == values_.end() ? 0 : it->second.row;
    return ParseError(source_ + ": key '" + std::string(key) + "' " + what, row);
  }

 private:
  struct Entry {
    std::string value;
    std::size_t row = 0;
  };

  double to_number(std::string_view key, std::string_view s) const {
    auto v = detail::parse_double(s);
    if (!v) throw bad(key, "expected a number, got '" + std::string(s) + "'");
    return *v;
  }

  std::string source_ = "<config>";
  std::map<std::string, Entry, std::less<>> values_;
};

// --- typed views ----------------------------------------------------------

namespace config {

template <class Parse>
auto parsed(const ScenarioConfig& cfg, std::string_view key, Parse parse, decltype(parse("")) fallback) {
  auto v = cfg.text(key);
  if (!v) return fallback;
  try {
    return parse(*v);
  } catch (const InvalidArgument& e) {
    throw cfg.bad(key, e.what());
  }
}

inline Technique technique(const ScenarioConfig& c) {
  return parsed(c, "technique", [](std::string_view s) { return parse_technique(s); }, Technique::active_route_anywhere);
}
inline Deployment deployment(const ScenarioConfig& c) {
  return parsed(c, "deployment", [](std::string_view s) { return parse_deployment(s); }, Deployment::cloud);
}

inline std::vector<NodeVariant> variants(const ScenarioConfig& c) {
  std::vector<NodeVariant> out;
  for (const auto& s : c.list("node_variant")) {
    try {
      out.push_back(parse_variant(s));
    } catch (const InvalidArgument& e) {
      throw c.bad("node_variant", e.what());
    }
  }
  if (out.empty()) out.push_back(NodeVariant::native);
  return out;
}

inline NodeVariant variant(const ScenarioConfig& c) {
  auto v = variants(c);
  if (v.size() != 1) throw c.bad("node_variant", "expects a single value here");
  return v.front();
}

inline RecoveryPolicy recovery_policy(const ScenarioConfig& c) {
  return parsed(
      c, "recovery_policy",
      [](std::string_view s) {
        if (s == "parallel") return RecoveryPolicy::parallel;
        if (s == "single") return RecoveryPolicy::single;
        throw InvalidArgument("expected parallel or single");
      },
      RecoveryPolicy::parallel);
}

inline Seconds horizon(const ScenarioConfig& c, Seconds fallback = one_year) {
  const double h = c.number_or("horizon_hours", std::chrono::duration_cast<Hours>(fallback).count());
  if (!(h > 0.0)) throw c.bad("horizon_hours", "must be > 0");
  return Hours{h};
}

inline double positive(const ScenarioConfig& c, std::string_view key, double v) {
  if (!(v > 0.0)) throw c.bad(key, "must be > 0");
  return v;
}

inline std::vector<Rate> hw_crash_rates(const ScenarioConfig& c) {
  std::vector<Rate> out;
  for (double v : c.numbers("hw_crash_per_year")) out.push_back(Rate::per_year(positive(c, "hw_crash_per_year", v)));
  if (out.empty()) throw c.bad("hw_crash_per_year", "is required");
  return out;
}

inline std::vector<Rate> crash_recovery_rates(const ScenarioConfig& c) {
  std::vector<Rate> out;
  for (double v : c.numbers("crash_recovery_seconds"))
    out.push_back(Rate::every(Seconds{positive(c, "crash_recovery_seconds", v)}));
  if (out.empty()) out.push_back(Rate::every(Seconds{15.0}));
  return out;
}

inline std::vector<std::optional<Rate>> pool_repair_rates(const ScenarioConfig& c) {
  std::vector<std::optional<Rate>> out;
  for (const auto& s : c.list("pool_repair_per_hour")) {
    if (s == "none" || s == "-") {
      out.emplace_back(std::nullopt);
      continue;
    }
    auto v = detail::parse_double(s);
    if (!v) throw c.bad("pool_repair_per_hour", "expected a number or 'none', got '" + s + "'");
    if (*v == 0.0)
      out.emplace_back(std::nullopt);
    else
      out.emplace_back(Rate::per_hour(positive(c, "pool_repair_per_hour", *v)));
  }
  if (out.empty()) out.emplace_back(std::nullopt);
  return out;
}

template <class T>
T single(const ScenarioConfig& c, std::string_view key, const std::vector<T>& values) {
  if (values.size() != 1) throw c.bad(key, "expects a single value here");
  return values.front();
}

inline AvailRates avail_rates(const ScenarioConfig& c) {
  AvailRates r;
  r.hw_crash = single(c, "hw_crash_per_year", hw_crash_rates(c));
  r.crash_recovery = single(c, "crash_recovery_seconds", crash_recovery_rates(c));
  r.pool_repair = single(c, "pool_repair_per_hour", pool_repair_rates(c));
  r.policy = recovery_policy(c);
  return r;
}

inline double throughput_ratio(const ScenarioConfig& c, NodeVariant v) {
  if (auto r = c.number("throughput_ratio")) return positive(c, "throughput_ratio", *r);
  return default_throughput_ratio(v);
}

/// Planning request template; list-valued axes take their first element.
inline PlanRequest plan_request(const ScenarioConfig& c) {
  PlanRequest req;
  req.variant = variants(c).front();
  if (auto r = c.number("throughput_ratio")) req.throughput_ratio = positive(c, "throughput_ratio", *r);
  req.deployment = deployment(c);
  req.technique = technique(c);
  req.sert_multiplier = positive(c, "sert_multiplier", c.number_or("sert_multiplier", 10.0));
  req.target_nines = positive(c, "target_nines", c.number_or("target_nines", 3.0));
  req.horizon = horizon(c);
  req.search_cap = c.integer("search_cap").value_or(1000);
  if (req.search_cap < 1) throw c.bad("search_cap", "must be >= 1");
  req.rates.hw_crash = hw_crash_rates(c).front();
  req.rates.crash_recovery = crash_recovery_rates(c).front();
  req.rates.pool_repair = pool_repair_rates(c).front();
  req.rates.policy = recovery_policy(c);
  return req;
}

/// Sweep axes from list-valued keys.
inline PlanGrid plan_grid(const ScenarioConfig& c) {
  PlanGrid g;
  g.variants = variants(c);
  g.hw_crash = hw_crash_rates(c);
  g.crash_recovery = crash_recovery_rates(c);
  g.pool_repair = pool_repair_rates(c);
  return g;
}

/// Cluster for `avail`: num defaults to the base node count.
inline ClusterSpec cluster_spec(const ScenarioConfig& c) {
  ClusterSpec s;
  s.technique = technique(c);
  s.deployment = deployment(c);
  const NodeVariant v = variant(c);
  s.num = c.integer("num").value_or(
      required_base_nodes(c.number_or("sert_multiplier", 10.0), throughput_ratio(c, v)));
  if (s.num < 1) throw c.bad("num", "must be >= 1");
  s.op = c.integer("op").value_or(0);
  s.pool = c.integer("pool").value_or(0);
  if (s.technique == Technique::passive_failover && s.op != 0) throw c.bad("op", "must be 0 for pf");
  return s;
}

inline TransientSplit transient_split(const ScenarioConfig& c, NodeVariant v) {
  TransientSplit s = TransientSplit::defaults(v);
  // overrides are percentages, as in the fault-injection tables
  if (auto p = c.number("p_corrupt")) s.p_corrupt = *p / 100.0;
  if (auto p = c.number("p_crash")) s.p_crash = *p / 100.0;
  if (auto p = c.number("p_retry")) s.p_retry = *p / 100.0;
  try {
    s.validate(v);
  } catch (const InvalidArgument& e) {
    throw c.bad(c.has("p_retry") ? "p_retry" : (c.has("p_crash") ? "p_crash" : "p_corrupt"), e.what());
  }
  return s;
}

inline RecoveryTimes recovery_times(const ScenarioConfig& c, Deployment d) {
  RecoveryTimes r;
  if (auto h = c.number("sdc_recovery_hours")) r.sdc_recovery = Hours{positive(c, "sdc_recovery_hours", *h)};
  if (auto us = c.number("retry_tx_microseconds"))
    r.retry_tx = Seconds{positive(c, "retry_tx_microseconds", *us) * 1e-6};
  if (auto x = c.number("crash_tx_per_second")) {
    if (*x < 0.0) throw c.bad("crash_tx_per_second", "must be >= 0");
    if (*x > 0.0) r.crash_tx = Rate::per_second(*x);
  }
  const double cr = single(c, "crash_recovery_seconds", c.numbers("crash_recovery_seconds").empty()
                                                            ? std::vector<double>{15.0}
                                                            : c.numbers("crash_recovery_seconds"));
  r.crash_recovery = Seconds{positive(c, "crash_recovery_seconds", cr)};
  // on premises, a crashed node only comes back when a pool is declared
  if (d == Deployment::on_premises && c.integer("pool").value_or(0) == 0) r.crash_recovery.reset();
  return r;
}

/// Transient fault rates from transient_rate_per_month / _per_day lists.
inline std::vector<Rate> transient_rates(const ScenarioConfig& c) {
  std::vector<Rate> out;
  for (double v : c.numbers("transient_rate_per_month")) {
    if (v < 0.0) throw c.bad("transient_rate_per_month", "must be >= 0");
    out.push_back(Rate::per_month(v));
  }
  for (double v : c.numbers("transient_rate_per_day")) {
    if (v < 0.0) throw c.bad("transient_rate_per_day", "must be >= 0");
    out.push_back(Rate::per_day(v));
  }
  if (out.empty()) throw c.bad("transient_rate_per_month", "is required");
  return out;
}

}  // namespace config

}  // namespace pcraft
