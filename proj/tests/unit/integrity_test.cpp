#include <gtest/gtest.h>

#include "pcraft/integrity_models.hpp"
#include "support/chains.hpp"
#include "support/oracles.hpp"

using namespace pcraft;

namespace {

double corrupt_fraction(NodeVariant v, Rate rate) {
  const auto r = derive_integrity_rates(v, rate, TransientSplit::defaults(v));
  return integrity_breakdown(build_integrity_model(r, Deployment::cloud), one_month).corrupt;
}

}  // namespace

TEST(IntegrityRates, SplitScalesTheFaultRate) {
  const auto tx = derive_integrity_rates(NodeVariant::ft_tx, Rate::per_day(1), TransientSplit::defaults(NodeVariant::ft_tx));
  EXPECT_NEAR(tx.sdc.in_per_day(), 0.0117, 1e-15);
  EXPECT_NEAR(tx.crash.in_per_day(), 0.0772, 1e-15);
  EXPECT_NEAR(tx.detected.in_per_day(), 0.6699, 1e-15);
  EXPECT_NEAR(tx.retry_ok.per_second(), 1.0 / 2.5e-6, 1e-6);

  const auto native = derive_integrity_rates(NodeVariant::native, Rate::per_month(1), TransientSplit::defaults(NodeVariant::native));
  EXPECT_NEAR(native.sdc.in_per_month(), 0.2619, 1e-15);
  EXPECT_NEAR(native.crash.in_per_month(), 0.1249, 1e-15);
  EXPECT_EQ(native.detected.per_second(), 0.0);

  for (NodeVariant v : kAllVariants) {
    const auto zero = derive_integrity_rates(v, Rate::per_second(0), TransientSplit::defaults(v));
    EXPECT_EQ(zero.sdc.per_second() + zero.crash.per_second() + zero.detected.per_second(), 0.0);
  }
}

TEST(IntegrityRates, RejectsInvalidSplits) {
  EXPECT_THROW(derive_integrity_rates(NodeVariant::native, Rate::per_day(1), {0.7, 0.5, 0.0}), InvalidArgument);
  EXPECT_THROW(derive_integrity_rates(NodeVariant::native, Rate::per_day(1), {0.1, 0.1, 0.1}), InvalidArgument);
  EXPECT_THROW(derive_integrity_rates(NodeVariant::ft_ilr, Rate::per_day(1), {-0.1, 0.1, 0.0}), InvalidArgument);
  EXPECT_THROW(derive_integrity_rates(NodeVariant::ft_ilr, Rate::per_day(-1), {0.1, 0.1, 0.0}), InvalidArgument);
}

TEST(IntegrityModel, NativeCloudShape) {
  const auto r = derive_integrity_rates(NodeVariant::native, Rate::per_month(1), TransientSplit::defaults(NodeVariant::native));
  const IntegrityModel m = build_integrity_model(r, Deployment::cloud);
  EXPECT_EQ(m.chain.size(), 3u);
  EXPECT_EQ(m.chain.transition_count(), 4u);
  EXPECT_FALSE(m.retry.has_value());
}

TEST(IntegrityModel, FtTxHasRetry) {
  const auto r = derive_integrity_rates(NodeVariant::ft_tx, Rate::per_month(1), TransientSplit::defaults(NodeVariant::ft_tx));
  const IntegrityModel m = build_integrity_model(r, Deployment::cloud);
  ASSERT_TRUE(m.retry.has_value());
  EXPECT_EQ(m.chain.size(), 4u);
  EXPECT_GT(m.chain.rate(m.correct, *m.retry), 0.0);
  EXPECT_GT(m.chain.rate(*m.retry, m.correct), 0.0);
  EXPECT_EQ(m.chain.rate(*m.retry, m.crash), 0.0);  // no retry failures unless configured

  RecoveryTimes rt;
  rt.crash_tx = Rate::per_second(10.0);
  const auto with_crash = derive_integrity_rates(NodeVariant::ft_tx, Rate::per_month(1), TransientSplit::defaults(NodeVariant::ft_tx), rt);
  const IntegrityModel m2 = build_integrity_model(with_crash, Deployment::cloud);
  EXPECT_DOUBLE_EQ(m2.chain.rate(*m2.retry, m2.crash), 10.0);
}

TEST(IntegrityModel, OnPremisesWithoutPoolCrashIsAbsorbing) {
  RecoveryTimes rt;
  rt.crash_recovery.reset();
  const auto r = derive_integrity_rates(NodeVariant::native, Rate::per_month(1), TransientSplit::defaults(NodeVariant::native), rt);
  const IntegrityModel m = build_integrity_model(r, Deployment::on_premises);
  EXPECT_EQ(m.chain.exit_rate(m.crash), 0.0);
  EXPECT_THROW(build_integrity_model(r, Deployment::cloud), InvalidArgument);
}

TEST(IntegrityBreakdown, NoFaultsStaysCorrect) {
  for (NodeVariant v : kAllVariants) {
    const auto r = derive_integrity_rates(v, Rate::per_second(0), TransientSplit::defaults(v));
    const IntegrityReport rep = integrity_breakdown(build_integrity_model(r, Deployment::cloud), one_month);
    EXPECT_NEAR(rep.correct, 1.0, 1e-14);
    EXPECT_EQ(rep.corrupt, 0.0);
    EXPECT_EQ(rep.down, 0.0);
  }
}

TEST(IntegrityBreakdown, MatchesMatrixExponential) {
  // ft_tx retries in microseconds, too stiff for a double-precision exponential
  for (NodeVariant v : {NodeVariant::native, NodeVariant::ft_ilr})
    for (Rate rate : {Rate::per_month(1), Rate::per_month(8), Rate::per_day(1), Rate::per_day(24)}) {
      const auto r = derive_integrity_rates(v, rate, TransientSplit::defaults(v));
      const IntegrityModel m = build_integrity_model(r, Deployment::cloud);
      const IntegrityReport rep = integrity_breakdown(m, one_month);
      Eigen::VectorXd ind = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.chain.size()));
      ind(static_cast<Eigen::Index>(m.corrupt)) = 1.0;
      const double ref = oracle::augmented_cumulative(testing_support::dense_generator(m.chain),
                                                      testing_support::as_vector(m.chain.initial()), ind,
                                                      oracle::kMonth) / oracle::kMonth;
      EXPECT_NEAR(rep.corrupt, ref, 1e-9 * std::max(1.0, ref) + 1e-12) << to_string(v) << " " << rate.in_per_day();
      EXPECT_NEAR(rep.correct + rep.corrupt + rep.down, 1.0, 1e-9);
    }
}

TEST(IntegrityBreakdown, StiffRetryChain) {
  // 60-digit matrix exponentials of the augmented generator
  const std::pair<Rate, double> cases[] = {{Rate::per_month(1), 9.530012772727561927e-05},
                                           {Rate::per_month(8), 7.6189045065706501024e-04},
                                           {Rate::per_day(1), 2.8925459606155086425e-03},
                                           {Rate::per_day(24), 6.5072217736981734031e-02}};
  for (const auto& [rate, expected] : cases) {
    const auto r = derive_integrity_rates(NodeVariant::ft_tx, rate, TransientSplit::defaults(NodeVariant::ft_tx));
    const IntegrityReport rep = integrity_breakdown(build_integrity_model(r, Deployment::cloud), one_month);
    EXPECT_NEAR(rep.corrupt, expected, 1e-12 * expected) << rate.in_per_day();
  }
}

TEST(IntegrityBreakdown, PointValues) {
  // sdc rate times 6 h, less what the startup transient and crashes take
  EXPECT_NEAR(100.0 * corrupt_fraction(NodeVariant::native, Rate::per_month(1)), 0.21, 0.05);
  EXPECT_NEAR(100.0 * corrupt_fraction(NodeVariant::ft_tx, Rate::per_day(1)), 0.29, 0.1);
}
