#pragma once

// Random instances and independent reference computations for tests.

#include <cmath>
#include <random>
#include <vector>

#include "risnoma/channel.hpp"

namespace risnoma::testing {

inline ComplexVector crandn(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * Complex(g(rng), g(rng));
  return v;
}

inline ComplexMatrix crandn(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  ComplexMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

/// Random PSD matrix of the given rank.
inline HermitianMatrix random_psd(Eigen::Index n, Eigen::Index rank, std::mt19937_64& rng) {
  const ComplexMatrix f = crandn(n, rank, rng);
  return HermitianMatrix::from_symmetrized(f * f.adjoint());
}

/// Unit-variance channels, no geometry.
inline ChannelSet random_channels(int M, int N, int K, std::mt19937_64& rng) {
  ChannelSet ch;
  for (int k = 0; k < K; ++k) {
    ch.h_d.push_back(crandn(M, rng));
    ch.h_r.push_back(crandn(N, rng));
  }
  ch.G = crandn(N, M, rng);
  ch.users.assign(K, Point3{});
  return ch;
}

inline PhaseShiftVector random_unit(int N, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  RealVector t(N);
  for (int n = 0; n < N; ++n) t(n) = u(rng);
  return PhaseShiftVector::from_angles(t);
}

/// h_k^H written out term by term: sum_n conj(h_r[n]) v[n] G[n][m] + conj(h_d[m]).
inline ComplexVector naive_row(const ChannelSet& ch, const PhaseShiftVector& v, int k) {
  const int M = ch.M(), N = ch.N();
  ComplexVector row(M);
  for (int m = 0; m < M; ++m) {
    Complex acc = std::conj(ch.h_d[k](m));
    for (int n = 0; n < N; ++n) acc += std::conj(ch.h_r[k](n)) * v.values()(n) * ch.G(n, m);
    row(m) = acc;
  }
  return row;
}

/// Minimum over (k, l >= k) of SINR / gamma computed from scratch.
inline double naive_worst_ratio(const std::vector<ComplexVector>& rows,
                                const std::vector<ComplexVector>& w, const std::vector<int>& order,
                                const ScenarioConfig& config) {
  const int K = static_cast<int>(order.size());
  const double s2 = config.noise_power_mw();
  auto amp2 = [&](int l_user, int k_user) {
    Complex acc = 0.0;
    for (Eigen::Index m = 0; m < rows[l_user].size(); ++m) acc += rows[l_user](m) * w[k_user](m);
    return std::norm(acc);
  };
  double worst = INFINITY;
  for (int k = 0; k < K; ++k) {
    const double g = config.gamma_min(order[k]);
    if (g <= 0) continue;
    for (int l = k; l < K; ++l) {
      double interf = s2;
      for (int j = k + 1; j < K; ++j) interf += amp2(order[l], order[j]);
      worst = std::min(worst, amp2(order[l], order[k]) / interf / g);
    }
  }
  return worst;
}

inline std::vector<int> identity_order(int K) {
  std::vector<int> o(K);
  for (int k = 0; k < K; ++k) o[k] = k;
  return o;
}

}  // namespace risnoma::testing
