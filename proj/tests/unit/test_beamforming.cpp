#include <gtest/gtest.h>

#include "risnoma/beamforming.hpp"
#include "support/instances.hpp"

using namespace risnoma;
using namespace risnoma::testing;

namespace {

std::vector<HermitianMatrix> zero_subgrads(int K, int M) {
  return std::vector<HermitianMatrix>(K, HermitianMatrix::zero(M));
}

// Minimal powers for scalar channels: p_k = gamma_k (sum_{j>k} p_j + s2 / min_{l>=k} |h_l|^2),
// evaluated from the last decoded position backwards.
std::vector<double> back_substitution(const std::vector<ComplexVector>& rows,
                                      const std::vector<int>& order, const ScenarioConfig& c) {
  const int K = static_cast<int>(order.size());
  std::vector<double> p(K, 0.0);
  double tail = 0.0;
  for (int k = K - 1; k >= 0; --k) {
    double weakest = INFINITY;
    for (int l = k; l < K; ++l) weakest = std::min(weakest, std::norm(rows[order[l]](0)));
    const int user = order[k];
    p[user] = c.gamma_min(user) * (tail + c.noise_power_mw() / weakest);
    tail += p[user];
  }
  return p;
}

}  // namespace

TEST(BuildP3, ConstraintCounts) {
  std::mt19937_64 rng(1);
  ScenarioConfig c;
  c.K = 1;
  EXPECT_EQ(build_p3_subproblem({crandn(3, rng)}, {0}, zero_subgrads(1, 3), c).constraints().size(), 1u);
  c.K = 3;
  const std::vector<ComplexVector> rows{crandn(3, rng), crandn(3, rng), crandn(3, rng)};
  EXPECT_EQ(build_p3_subproblem(rows, {0, 1, 2}, zero_subgrads(3, 3), c).constraints().size(), 6u);
}

TEST(BuildP3, ZeroRateDropsRows) {
  std::mt19937_64 rng(2);
  ScenarioConfig c;
  c.K = 3;
  c.user_rates = {1.0, 0.0, 1.0};
  const std::vector<ComplexVector> rows{crandn(3, rng), crandn(3, rng), crandn(3, rng)};
  // user 1 sits at position 0 and would own 3 rows
  EXPECT_EQ(build_p3_subproblem(rows, {1, 0, 2}, zero_subgrads(3, 3), c).constraints().size(), 3u);
}

TEST(BuildP3, PenaltyOffIsTracePower) {
  std::mt19937_64 rng(3);
  ScenarioConfig c;
  c.K = 2;
  const std::vector<ComplexVector> rows{crandn(2, rng), crandn(2, rng)};
  const auto p = build_p3_subproblem(rows, {0, 1}, zero_subgrads(2, 2), c, P3Weights{0.0, 0.0, 1.0});
  for (const auto& b : p.blocks()) {
    EXPECT_LT((b.cost - ComplexMatrix::Identity(2, 2)).norm(), 1e-15);
    EXPECT_EQ(b.quadratic_weight, 0.0);
  }
  EXPECT_THROW(build_p3_subproblem(rows, {0, 1}, zero_subgrads(2, 3), c), ValidationError);
}

TEST(SpectralSubgradient, Examples) {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  EXPECT_LT((spectral_subgradient(HermitianMatrix(d)).matrix() - expected).norm(), 1e-14);

  std::mt19937_64 rng(4);
  const ComplexVector w = crandn(4, rng);
  const ComplexMatrix ref = w * w.adjoint() / w.squaredNorm();
  EXPECT_LT((spectral_subgradient(HermitianMatrix::outer(w)).matrix() - ref).norm(), 1e-12);
}

TEST(SpectralSubgradient, InnerProductIsSpectralNorm) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const HermitianMatrix W = random_psd(4, 1 + i % 4, rng);
    const double s1 = hermitian_eig(W).eigenvalues(0);
    EXPECT_NEAR(inner(W.matrix(), spectral_subgradient(W).matrix()), s1, 1e-10 * s1);
  }
}

TEST(BeamformersDc, SingleUserMrt) {
  std::mt19937_64 rng(6);
  ScenarioConfig c;
  c.K = 1;
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexVector row = crandn(3, rng, 1e-4);
    const BeamformingResult r = solve_beamformers_dc({row}, {0}, c);
    ASSERT_TRUE(r.ok()) << r.detail;
    const double mrt = c.gamma_min(0) * c.noise_power_mw() / row.squaredNorm();
    EXPECT_NEAR(r.bf.total_power(), mrt, 1e-4 * mrt);
  }
}

TEST(BeamformersDc, ScalarBackSubstitution) {
  std::mt19937_64 rng(7);
  ScenarioConfig c;
  c.M = 1;
  for (int trial = 0; trial < 12; ++trial) {
    const int K = 2 + trial % 2;
    c.K = K;
    c.user_rates.clear();
    std::uniform_real_distribution<double> rate(0.5, 2.0);
    for (int k = 0; k < K; ++k) c.user_rates.push_back(rate(rng));
    std::vector<ComplexVector> rows;
    for (int k = 0; k < K; ++k) rows.push_back(crandn(1, rng, 1e-4));
    std::vector<int> order = identity_order(K);
    std::shuffle(order.begin(), order.end(), rng);
    const BeamformingResult r = solve_beamformers_dc(rows, order, c);
    ASSERT_TRUE(r.ok()) << r.detail;
    const std::vector<double> p = back_substitution(rows, order, c);
    for (int k = 0; k < K; ++k) EXPECT_NEAR(r.bf.w[k].squaredNorm(), p[k], 1e-3 * p[k]);
  }
}

TEST(BeamformersDc, SuccessContract) {
  std::mt19937_64 rng(8);
  ScenarioConfig c;
  c.M = 3;
  c.K = 4;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<ComplexVector> rows;
    for (int k = 0; k < 4; ++k) rows.push_back(crandn(3, rng, 1e-4));
    const BeamformingResult r = solve_beamformers_dc(rows, {0, 1, 2, 3}, c);
    ASSERT_TRUE(r.ok()) << r.detail;
    EXPECT_LE(r.lifted.penalty, c.rank_tol * std::max(1.0, r.lifted.total_power));
    EXPECT_TRUE(check_feasible(rows, r.bf, c, 1e-5).feasible);
    EXPECT_GE(naive_worst_ratio(rows, r.bf.w, r.bf.ordering, c), 1.0 - 1e-5);
    EXPECT_TRUE(dc_monotone(r.trace));
    EXPECT_TRUE(dc_rate_bound(r.trace));
  }
}

TEST(BeamformersDc, InfeasibleWhenUserUnreachable) {
  ScenarioConfig c;
  c.M = 2;
  c.K = 2;
  std::mt19937_64 rng(9);
  const std::vector<ComplexVector> rows{ComplexVector::Zero(2), crandn(2, rng, 1e-4)};
  const BeamformingResult r = solve_beamformers_dc(rows, {0, 1}, c);
  EXPECT_EQ(r.status, BeamStatus::Infeasible);
}

TEST(BeamformersSdr, SingleUserMatchesDc) {
  std::mt19937_64 rng(10);
  ScenarioConfig c;
  c.K = 1;
  const ComplexVector row = crandn(4, rng, 1e-4);
  const BeamformingResult dc = solve_beamformers_dc({row}, {0}, c);
  const SdrBeamResult sdr = solve_beamformers_sdr({row}, {0}, c, 200, RngStream(1));
  ASSERT_TRUE(dc.ok());
  ASSERT_EQ(sdr.status, SdrStatus::Exact);
  EXPECT_NEAR(sdr.bf.total_power(), dc.bf.total_power(), 1e-6 * dc.bf.total_power());
}

TEST(BeamformersSdr, RelaxationLowerBoundsDc) {
  std::mt19937_64 rng(11);
  ScenarioConfig c;
  c.K = 4;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<ComplexVector> rows;
    for (int k = 0; k < 4; ++k) rows.push_back(crandn(3, rng, 1e-4));
    const BeamformingResult dc = solve_beamformers_dc(rows, {3, 1, 0, 2}, c);
    const SdrBeamResult sdr = solve_beamformers_sdr(rows, {3, 1, 0, 2}, c, 200, RngStream(trial));
    ASSERT_TRUE(dc.ok());
    ASSERT_TRUE(sdr.ok());
    const double p = dc.bf.total_power();
    EXPECT_LE(sdr.relaxation_power, p * (1 + 1e-6));
    if (sdr.status == SdrStatus::Exact) EXPECT_LE(sdr.bf.total_power(), p * (1 + 1e-6));
    EXPECT_TRUE(check_feasible(rows, sdr.bf, c, 1e-5).feasible);
  }
}

TEST(GaussianCandidate, CovarianceMatches) {
  std::mt19937_64 rng(12);
  const HermitianMatrix A = random_psd(3, 2, rng);
  std::mt19937_64 draw(13);
  ComplexMatrix acc = ComplexMatrix::Zero(3, 3);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const ComplexVector x = gaussian_candidate(A, draw);
    acc += x * x.adjoint();
  }
  EXPECT_LT((acc / n - A.matrix()).norm(), 0.05 * A.frobenius_norm());
}
