#include <gtest/gtest.h>

#include "risnoma/orchestrator.hpp"

using namespace risnoma;

namespace {

ChannelSet trial_channels(const ScenarioConfig& c, std::uint64_t seed) {
  return generate_channels(c, TrialStreams(seed).channels);
}

}  // namespace

TEST(RunTrial, RandomPhaseSingleStep) {
  ScenarioConfig c;
  const RunResult r = run_trial(c, 3, OrderingScheme::Eigen, Optimizer::RandomPhase);
  EXPECT_EQ(r.outer_iterations, 1);
  EXPECT_EQ(r.power_trace.size(), 1u);
  EXPECT_EQ(r.termination, TerminationReason::Converged);
}

TEST(RunTrial, DcTraceNonIncreasingAndFeasible) {
  ScenarioConfig c;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const RunResult r = run_trial(c, seed, OrderingScheme::Eigen, Optimizer::DC);
    ASSERT_TRUE(r.has_solution()) << r.detail;
    for (std::size_t t = 1; t < r.power_trace.size(); ++t) {
      EXPECT_LE(r.power_trace[t], r.power_trace[t - 1] + dc_slack(r.power_trace[t - 1]));
    }
    EXPECT_NEAR(r.total_power_dbm, 10.0 * std::log10(r.total_power_mw), 1e-12);
    const ChannelSet ch = trial_channels(c, seed);
    EXPECT_TRUE(check_feasible(ch, r.phases, r.beamformers, c, 1e-5).feasible);
  }
}

TEST(RunTrial, Deterministic) {
  ScenarioConfig c;
  const RunResult a = run_trial(c, 9, OrderingScheme::Eigen, Optimizer::DC);
  const RunResult b = run_trial(c, 9, OrderingScheme::Eigen, Optimizer::DC);
  EXPECT_EQ(a.total_power_mw, b.total_power_mw);
  EXPECT_EQ(a.power_trace, b.power_trace);
  EXPECT_EQ(a.phases.values(), b.phases.values());
  EXPECT_EQ(a.outer_iterations, b.outer_iterations);
  for (std::size_t k = 0; k < a.beamformers.w.size(); ++k) EXPECT_EQ(a.beamformers.w[k], b.beamformers.w[k]);
}

TEST(RunTrial, NoRisMatchesEmptySurface) {
  ScenarioConfig c;
  const RunResult noris = run_trial(c, 4, OrderingScheme::Eigen, Optimizer::NoRIS);
  ScenarioConfig c0 = c;
  c0.N = 0;
  const RunResult dc0 = run_trial(c0, 4, OrderingScheme::Eigen, Optimizer::DC);
  ASSERT_TRUE(noris.has_solution());
  ASSERT_TRUE(dc0.has_solution());
  EXPECT_NEAR(noris.total_power_mw, dc0.total_power_mw, 1e-6 * dc0.total_power_mw);
  EXPECT_EQ(noris.outer_iterations, 1);
}

// The continuous alternation is a local method whose phase step only restores
// feasibility, so a quantized point can occasionally re-solve to lower power.
// The ordering is asserted on the batch mean.
TEST(RunTrial, QuantizedNotBelowContinuousOnAverage) {
  ScenarioConfig c;
  c.N = 12;
  c.K = 3;
  double sum_q = 0.0, sum_c = 0.0;
  int both = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const RunResult q = run_trial(c, seed, OrderingScheme::Eigen, Optimizer::DC, 3);
    if (!q.has_solution()) {
      EXPECT_EQ(q.termination, TerminationReason::QuantizationInfeasible);
      continue;
    }
    EXPECT_EQ(q.bits, std::optional<int>(3));
    const RunResult cont = run_trial(c, seed, OrderingScheme::Eigen, Optimizer::DC);
    EXPECT_EQ(cont.total_power_mw, q.continuous_power_mw);
    sum_q += q.total_power_dbm;
    sum_c += cont.total_power_dbm;
    ++both;
    const RealVector a = q.phases.angles();
    for (Eigen::Index n = 0; n < a.size(); ++n) {
      const double idx = a(n) / (std::numbers::pi / 4);
      EXPECT_NEAR(idx, std::round(idx), 1e-9);
    }
  }
  ASSERT_GT(both, 0);
  EXPECT_GE(sum_q / both, sum_c / both);
}

TEST(RunTrial, SdrVariantRuns) {
  ScenarioConfig c;
  const RunResult r = run_trial(c, 5, OrderingScheme::Eigen, Optimizer::SDR);
  ASSERT_TRUE(r.has_solution()) << r.detail;
  EXPECT_GE(r.outer_iterations, 1);
  const ChannelSet ch = trial_channels(c, 5);
  EXPECT_TRUE(check_feasible(ch, r.phases, r.beamformers, c, 1e-5).feasible);
}

TEST(Optimizer, StringRoundTrip) {
  for (auto o : {Optimizer::DC, Optimizer::SDR, Optimizer::RandomPhase, Optimizer::NoRIS})
    EXPECT_EQ(optimizer_from_string(to_string(o)), o);
  EXPECT_THROW(optimizer_from_string("bogus"), ValidationError);
}
