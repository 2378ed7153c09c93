#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pcraft/perf_ingest.hpp"

using namespace pcraft;

namespace {

PerfCurve parse(const std::string& text) {
  std::istringstream in(text);
  return parse_benchmark_csv(in, "app", NodeVariant::native);
}

PerfCurve load(const std::string& name) {
  std::ifstream in(std::string(PCRAFT_SCENARIOS_DIR) + "/benchmarks/" + name);
  return parse_benchmark_csv(in, name, NodeVariant::native);
}

}  // namespace

TEST(BenchmarkCsv, ParsesWellFormedRows) {
  const PerfCurve c = parse("offered_rate,achieved_rate,latency_ms\n300,290,2000\n100,100,10\n200,200,20\n");
  ASSERT_EQ(c.rows.size(), 3u);
  EXPECT_EQ(c.rows.front().offered_rate, 100.0);  // sorted by offered rate
  EXPECT_FALSE(c.rows.front().cpu_pct.has_value());
}

TEST(BenchmarkCsv, AcceptsReorderedAndExtraColumns) {
  const PerfCurve c = parse("\xEF\xBB\xBFlatency_ms,note,cpu_pct,achieved_rate,offered_rate\n5,x,40,10,10\n");
  ASSERT_EQ(c.rows.size(), 1u);
  EXPECT_EQ(c.rows[0].latency_ms, 5.0);
  EXPECT_EQ(c.rows[0].cpu_pct, 40.0);
}

TEST(BenchmarkCsv, ReportsMissingColumnByName) {
  try {
    parse("offered_rate,achieved_rate\n1,1\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("latency_ms"), std::string::npos);
  }
}

TEST(BenchmarkCsv, EmptyBodyHasNoDataRows) {
  try {
    parse("offered_rate,achieved_rate,latency_ms\n\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("no data rows"), std::string::npos);
  }
  EXPECT_THROW(parse(""), ParseError);
}

TEST(BenchmarkCsv, NonNumericCellNamesRowAndColumn) {
  try {
    parse("offered_rate,achieved_rate,latency_ms\n1,1,1\n2,abc,1\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), 2u);
  }
  EXPECT_THROW(parse("offered_rate,achieved_rate,latency_ms\n1,1\n"), ParseError);
}

TEST(BenchmarkCsv, RoundTripIsLossless) {
  const PerfCurve c = parse("offered_rate,achieved_rate,latency_ms,cpu_pct\n1.5,1.25,0.1,\n2,2,3.75,99.5\n");
  std::ostringstream out;
  write_benchmark_csv(out, c);
  const PerfCurve back = parse(out.str());
  ASSERT_EQ(back.rows.size(), c.rows.size());
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].offered_rate, c.rows[i].offered_rate);
    EXPECT_EQ(back.rows[i].achieved_rate, c.rows[i].achieved_rate);
    EXPECT_EQ(back.rows[i].latency_ms, c.rows[i].latency_ms);
    EXPECT_EQ(back.rows[i].cpu_pct, c.rows[i].cpu_pct);
  }
}

TEST(Saturation, MaximumUnderThreshold) {
  const PerfCurve c = parse("offered_rate,achieved_rate,latency_ms\n100,100,10\n200,200,20\n300,300,2000\n");
  EXPECT_EQ(saturation_throughput(c, 1000.0), 200.0);
  EXPECT_EQ(saturation_throughput(c, 5000.0), 300.0);
  EXPECT_THROW(saturation_throughput(c, 5.0), InvalidArgument);
  EXPECT_THROW(saturation_throughput(c, 0.0), InvalidArgument);
}

TEST(Saturation, MonotoneInThreshold) {
  const PerfCurve c = load("apache_static_native.csv");
  double last = 0.0;
  for (double t = 2.0; t < 1e5; t *= 1.7) {
    double v = 0.0;
    try {
      v = saturation_throughput(c, t);
    } catch (const InvalidArgument&) {
      continue;
    }
    EXPECT_GE(v, last);
    last = v;
  }
}

TEST(Saturation, SampleCurves) {
  EXPECT_NEAR(saturation_throughput(load("apache_static_native.csv"), 1000.0), 200000.0, 1000.0);
  EXPECT_NEAR(saturation_throughput(load("memcached_native.csv"), 1000.0), 886000.0, 1000.0);
}

TEST(Degradation, Ratios) {
  const PerfProfile p = degradation_ratios({{NodeVariant::native, 100000.0}, {NodeVariant::ft_tx, 71000.0}, {NodeVariant::ft_ilr, 92000.0}});
  EXPECT_DOUBLE_EQ(p.ratios.at(NodeVariant::ft_tx), 0.71);
  EXPECT_DOUBLE_EQ(p.ratios.at(NodeVariant::ft_ilr), 0.92);
  EXPECT_DOUBLE_EQ(p.ratios.at(NodeVariant::native), 1.0);
  EXPECT_THROW(degradation_ratios({{NodeVariant::ft_tx, 1.0}}), InvalidArgument);
  EXPECT_THROW(degradation_ratios({{NodeVariant::native, 1.0}, {NodeVariant::ft_tx, 2.0}}), InvalidArgument);
}

TEST(Degradation, MeanAcrossApplications) {
  const std::vector<std::map<NodeVariant, double>> apps{{{NodeVariant::native, 100.0}, {NodeVariant::ft_tx, 60.0}},
                                                        {{NodeVariant::native, 1000.0}, {NodeVariant::ft_tx, 800.0}}};
  const PerfProfile p = degradation_ratios(std::span<const std::map<NodeVariant, double>>(apps));
  EXPECT_NEAR(p.ratios.at(NodeVariant::ft_tx), 0.7, 1e-15);
}
