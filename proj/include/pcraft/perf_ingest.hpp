#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "pcraft/error.hpp"
#include "pcraft/types.hpp"

namespace pcraft {

struct PerfRow {
  double offered_rate = 0.0;   // req/s
  double achieved_rate = 0.0;  // req/s
  double latency_ms = 0.0;     // mean latency reported by the load generator
  std::optional<double> cpu_pct;
};

/// Throughput/latency curve of one application on one node variant,
/// ordered by offered rate.
struct PerfCurve {
  std::string application;
  NodeVariant variant = NodeVariant::native;
  std::vector<PerfRow> rows;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads `offered_rate,achieved_rate,latency_ms[,cpu_pct]` (header required,
/// any column order, unknown columns ignored). Rows come back sorted by
/// offered rate.
inline PerfCurve parse_benchmark_csv(std::istream& in, std::string application = {},
                                     NodeVariant variant = NodeVariant::native) {
  PerfCurve curve{std::move(application), variant, {}};
  std::string line;
  std::size_t row = 0;

  std::optional<std::vector<std::string_view>> header;
  std::string header_line;
  while (std::getline(in, line)) {
    ++row;
    if (!detail::trim(line).empty()) {
      header_line = line;
      header = detail::split_commas(header_line);
      break;
    }
  }
  if (!header) throw ParseError("empty file: no header row");
  if (header_line.size() >= 3 && header_line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    header_line.erase(0, 3);
    header = detail::split_commas(header_line);
  }

  std::map<std::string, std::size_t, std::less<>> col;
  for (std::size_t i = 0; i < header->size(); ++i) col.emplace(std::string((*header)[i]), i);
  auto need = [&](std::string_view name) {
    auto it = col.find(name);
    if (it == col.end()) throw ParseError("missing column '" + std::string(name) + "'", row);
    return it->second;
  };
  const std::size_t c_offered = need("offered_rate");
  const std::size_t c_achieved = need("achieved_rate");
  const std::size_t c_latency = need("latency_ms");
  std::optional<std::size_t> c_cpu;
  if (auto it = col.find("cpu_pct"); it != col.end()) c_cpu = it->second;

  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != header->size())
      throw ParseError(fmt::format("expected {} cells, found {}", header->size(), cells.size()), row);
    auto number = [&](std::size_t c, std::string_view name) {
      auto v = detail::parse_double(cells[c]);
      if (!v) throw ParseError(fmt::format("non-numeric value '{}' in column '{}'", cells[c], name), row, c + 1);
      return *v;
    };
    PerfRow r;
    r.offered_rate = number(c_offered, "offered_rate");
    r.achieved_rate = number(c_achieved, "achieved_rate");
    r.latency_ms = number(c_latency, "latency_ms");
    if (c_cpu && !cells[*c_cpu].empty()) r.cpu_pct = number(*c_cpu, "cpu_pct");
    if (r.achieved_rate < 0.0) throw ParseError("achieved_rate must be >= 0", row, c_achieved + 1);
    if (!(r.latency_ms > 0.0)) throw ParseError("latency_ms must be > 0", row, c_latency + 1);
    curve.rows.push_back(r);
  }
  if (curve.rows.empty()) throw ParseError("no data rows");
  std::stable_sort(curve.rows.begin(), curve.rows.end(),
                   [](const PerfRow& a, const PerfRow& b) { return a.offered_rate < b.offered_rate; });
  return curve;
}

inline void write_benchmark_csv(std::ostream& out, const PerfCurve& curve) {
  const bool cpu = std::any_of(curve.rows.begin(), curve.rows.end(), [](const PerfRow& r) { return r.cpu_pct.has_value(); });
  out << "offered_rate,achieved_rate,latency_ms" << (cpu ? ",cpu_pct" : "") << '\n';
  for (const auto& r : curve.rows) {
    out << fmt::format("{},{},{}", r.offered_rate, r.achieved_rate, r.latency_ms);
    if (cpu) out << ',' << (r.cpu_pct ? fmt::format("{}", *r.cpu_pct) : std::string{});
    out << '\n';
  }
}

/// NodT: the largest achieved rate among rows whose latency stays within
/// the threshold (constant-bit-rate saturation point).
inline double saturation_throughput(const PerfCurve& curve, double latency_threshold_ms) {
  if (curve.rows.empty()) throw InvalidArgument("empty performance curve");
  if (!(latency_threshold_ms > 0.0)) throw InvalidArgument("latency threshold must be > 0");
  std::optional<double> best;
  for (const auto& r : curve.rows)
    if (r.latency_ms <= latency_threshold_ms) best = std::max(best.value_or(0.0), r.achieved_rate);
  if (!best)
    throw InvalidArgument(fmt::format("no row of '{}' ({}) meets the {} ms latency threshold", curve.application,
                                      to_string(curve.variant), latency_threshold_ms));
  return *best;
}

/// Saturation throughput per variant and its ratio to native.
struct PerfProfile {
  std::map<NodeVariant, double> nodt;
  std::map<NodeVariant, double> ratios;
};

inline PerfProfile degradation_ratios(const std::map<NodeVariant, double>& nodt) {
  auto native = nodt.find(NodeVariant::native);
  if (native == nodt.end()) throw InvalidArgument("missing native baseline throughput");
  if (!(native->second > 0.0)) throw InvalidArgument("native throughput must be > 0");
  PerfProfile p;
  for (const auto& [v, t] : nodt) {
    if (!(t > 0.0)) throw InvalidArgument(fmt::format("{} throughput must be > 0", to_string(v)));
    const double ratio = t / native->second;
    if (ratio > 1.5) throw InvalidArgument(fmt::format("{} ratio {} exceeds 1.5", to_string(v), ratio));
    p.nodt[v] = t;
    p.ratios[v] = ratio;
  }
  return p;
}

/// Several applications: per-application ratios, averaged arithmetically.
/// `nodt` of the result holds the mean throughput per variant.
inline PerfProfile degradation_ratios(std::span<const std::map<NodeVariant, double>> per_application) {
  if (per_application.empty()) throw InvalidArgument("no applications given");
  std::map<NodeVariant, double> ratio_sum, nodt_sum;
  std::map<NodeVariant, int> count;
  for (const auto& app : per_application) {
    const PerfProfile p = degradation_ratios(app);
    for (const auto& [v, r] : p.ratios) {
      ratio_sum[v] += r;
      nodt_sum[v] += p.nodt.at(v);
      ++count[v];
    }
  }
  PerfProfile out;
  for (const auto& [v, n] : count) {
    out.ratios[v] = ratio_sum[v] / n;
    out.nodt[v] = nodt_sum[v] / n;
  }
  return out;
}

}  // namespace pcraft
