#include <gtest/gtest.h>

#include "pcraft/config.hpp"

using namespace pcraft;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.what();
  }
  return "no error";
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndBlanks) {
  const auto c = ScenarioConfig::parse_string(
      "# scenario\n\n technique = ara  # trailing\ndeployment=cloud\nhw_crash_per_year = 1, 6\n");
  EXPECT_EQ(c.text("technique"), "ara");
  EXPECT_EQ(config::deployment(c), Deployment::cloud);
  EXPECT_EQ(c.numbers("hw_crash_per_year"), (std::vector<double>{1, 6}));
  EXPECT_FALSE(c.has("pool"));
}

TEST(Config, UnknownKeyIsNamed) {
  const std::string m = message_of([] { ScenarioConfig::parse_string("technique = ara\nbogus_key = 3\n"); });
  EXPECT_NE(m.find("bogus_key"), std::string::npos);
  EXPECT_NE(m.find("row 2"), std::string::npos);
}

TEST(Config, MalformedLines) {
  EXPECT_NE(message_of([] { ScenarioConfig::parse_string("technique\n"); }).find("key = value"), std::string::npos);
  EXPECT_NE(message_of([] { ScenarioConfig::parse_string("technique =\n"); }).find("technique"), std::string::npos);
  EXPECT_NE(message_of([] { ScenarioConfig::parse_string("num = 1\nnum = 2\n"); }).find("duplicate key 'num'"),
            std::string::npos);
  EXPECT_NE(message_of([] { ScenarioConfig::parse_string("= 2\n"); }).find("empty key"), std::string::npos);
}

TEST(Config, BadValuesNameTheKey) {
  const auto c = ScenarioConfig::parse_string("target_nines = three\nnum = 2.5\nnode_variant = native,,ft_tx\n");
  EXPECT_NE(message_of([&] { c.number("target_nines"); }).find("target_nines"), std::string::npos);
  EXPECT_NE(message_of([&] { c.integer("num"); }).find("'num'"), std::string::npos);
  EXPECT_NE(message_of([&] { config::variants(c); }).find("node_variant"), std::string::npos);
  EXPECT_NE(message_of([&] { config::hw_crash_rates(c); }).find("hw_crash_per_year"), std::string::npos);
}

TEST(Config, SetValidatesKeys) {
  auto c = ScenarioConfig::parse_string("");
  c.set("seed", "4");
  EXPECT_EQ(c.integer("seed"), 4);
  EXPECT_THROW(c.set("nope", "1"), ParseError);
}

TEST(Config, PlanRequestFromKeys) {
  const auto c = ScenarioConfig::parse_string(
      "technique = pf\ndeployment = on-premises\nnode_variant = ft_ilr\nhw_crash_per_year = 2\n"
      "crash_recovery_seconds = 60\npool_repair_per_hour = 1\ntarget_nines = 4\nhorizon_hours = 100\n");
  const PlanRequest r = config::plan_request(c);
  EXPECT_EQ(r.technique, Technique::passive_failover);
  EXPECT_EQ(r.variant, NodeVariant::ft_ilr);
  EXPECT_NEAR(r.rates.hw_crash.in_per_year(), 2.0, 1e-12);
  EXPECT_NEAR(r.rates.crash_recovery.mean_time().count(), 60.0, 1e-9);
  ASSERT_TRUE(r.rates.pool_repair.has_value());
  EXPECT_NEAR(r.rates.pool_repair->in_per_hour(), 1.0, 1e-12);
  EXPECT_EQ(r.target_nines, 4.0);
  EXPECT_NEAR(r.horizon.count(), 360000.0, 1e-6);
}

TEST(Config, PoolRepairAcceptsNone) {
  const auto c = ScenarioConfig::parse_string("pool_repair_per_hour = none, 1\n");
  const auto v = config::pool_repair_rates(c);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_FALSE(v[0].has_value());
  EXPECT_TRUE(v[1].has_value());
}

TEST(Config, SplitOverridesArePercentages) {
  const auto c = ScenarioConfig::parse_string("p_corrupt = 10\np_crash = 20\n");
  const TransientSplit s = config::transient_split(c, NodeVariant::native);
  EXPECT_DOUBLE_EQ(s.p_corrupt, 0.1);
  EXPECT_DOUBLE_EQ(s.p_crash, 0.2);
  const auto bad = ScenarioConfig::parse_string("p_corrupt = 90\np_crash = 20\n");
  EXPECT_NE(message_of([&] { config::transient_split(bad, NodeVariant::native); }).find("p_c"), std::string::npos);
}

TEST(Config, TransientRatesNeedOneList) {
  EXPECT_THROW(config::transient_rates(ScenarioConfig::parse_string("")), ParseError);
  const auto c = ScenarioConfig::parse_string("transient_rate_per_month = 1\ntransient_rate_per_day = 1, 2\n");
  EXPECT_EQ(config::transient_rates(c).size(), 3u);
}
