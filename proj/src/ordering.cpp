#include "risnoma/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "risnoma/conic.hpp"

namespace risnoma {

namespace {

// Stable argsort; ties keep the lower user index first.
std::vector<int> argsort(const std::vector<double>& key, bool descending) {
  std::vector<int> idx(key.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return descending ? key[a] > key[b] : key[a] < key[b];
  });
  return idx;
}

}  // namespace

const char* to_string(OrderingScheme s) {
  switch (s) {
    case OrderingScheme::DirectLink: return "direct";
    case OrderingScheme::Eigen: return "eigen";
    case OrderingScheme::SDR: return "sdr";
    case OrderingScheme::Exhaustive: return "exhaustive";
  }
  return "unknown";
}

OrderingScheme ordering_from_string(const std::string& s) {
  if (s == "direct") return OrderingScheme::DirectLink;
  if (s == "eigen") return OrderingScheme::Eigen;
  if (s == "sdr") return OrderingScheme::SDR;
  if (s == "exhaustive") return OrderingScheme::Exhaustive;
  throw ValidationError("unknown ordering scheme '" + s + "'");
}

OrderingResult order_direct_link(const ChannelSet& ch) {
  OrderingResult out;
  out.scheme = OrderingScheme::DirectLink;
  for (const auto& h : ch.h_d) out.criterion.push_back(h.norm());
  out.permutation = argsort(out.criterion, false);
  return out;
}

HermitianMatrix build_Q(const ChannelSet& ch, int k) {
  const auto& hr = ch.h_r.at(static_cast<std::size_t>(k));
  const auto& hd = ch.h_d.at(static_cast<std::size_t>(k));
  const Eigen::Index N = ch.G.rows();
  // B = diag(h_r^H) G, so the reflected row is x^H B with x = conj(v).
  const ComplexMatrix B = hr.conjugate().asDiagonal() * ch.G;
  ComplexMatrix Q(N + 1, N + 1);
  Q.topLeftCorner(N, N) = B * B.adjoint();
  Q.topRightCorner(N, 1) = B * hd;
  Q.bottomLeftCorner(1, N) = (B * hd).adjoint();
  Q(N, N) = hd.squaredNorm();
  return HermitianMatrix::from_symmetrized(Q);
}

OrderingResult order_eigen(const ChannelSet& ch, const ScenarioConfig& config) {
  OrderingResult out;
  out.scheme = OrderingScheme::Eigen;
  const double sigma2 = config.noise_power_mw();
  const double n1 = static_cast<double>(ch.N() + 1);
  for (int k = 0; k < ch.K(); ++k) {
    const double s1 = hermitian_eig(build_Q(ch, k)).eigenvalues(0);
    out.criterion.push_back(s1 > 0.0 ? config.gamma_min(k) * sigma2 / (s1 * n1)
                                     : std::numeric_limits<double>::infinity());
  }
  out.permutation = argsort(out.criterion, true);
  return out;
}

OrderingResult order_sdr(const ChannelSet& ch, const ScenarioConfig& config) {
  OrderingResult out;
  out.scheme = OrderingScheme::SDR;
  const double sigma2 = config.noise_power_mw();
  const auto n = static_cast<std::size_t>(ch.N() + 1);
  for (int k = 0; k < ch.K(); ++k) {
    const HermitianMatrix Q = build_Q(ch, k);
    const double scale = Q.frobenius_norm();
    if (scale == 0.0) {
      out.criterion.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    conic::ConicProblem p;
    const auto b = p.add_block(n);
    p.set_linear_cost(b, -Q.matrix() / scale);
    for (std::size_t i = 0; i < n; ++i) p.pin_diagonal(b, i, 1.0);
    const conic::ConicSolution sol = conic::solve(p);
    if (!sol.optimal()) {
      throw std::runtime_error("order_sdr: relaxation for user " + std::to_string(k) + " " +
                               conic::to_string(sol.status) + " " + sol.diagnostics);
    }
    const double opt = -sol.objective * scale;
    out.criterion.push_back(config.gamma_min(k) * sigma2 / opt);
  }
  out.permutation = argsort(out.criterion, true);
  return out;
}

OrderingResult order_exhaustive(const ChannelSet& ch, const ScenarioConfig& config,
                                const OrderingPipeline& pipeline) {
  (void)config;
  const int K = ch.K();
  if (K > 6) throw ValidationError("order_exhaustive: K must be <= 6");
  OrderingResult out;
  out.scheme = OrderingScheme::Exhaustive;
  std::vector<int> perm(static_cast<std::size_t>(K));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    const std::optional<double> p = pipeline(perm);
    const double val = p ? *p : std::numeric_limits<double>::quiet_NaN();
    out.per_permutation.emplace_back(perm, val);
    if (p && *p < best) {
      best = *p;
      out.permutation = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (!std::isfinite(best)) throw std::runtime_error("order_exhaustive: every ordering is infeasible");
  out.criterion.assign(static_cast<std::size_t>(K), best);
  return out;
}

}  // namespace risnoma
