#include "risnoma/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace risnoma {

namespace {

constexpr double kUnitModulusTol = 1e-8;

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("ScenarioConfig: " + what);
}

ComplexVector complex_gaussian(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  ComplexVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = nd(rng);
    const double im = nd(rng);
    out(i) = Complex(re, im);
  }
  return out;
}

}  // namespace

double distance(const Point3& a, const Point3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

void ScenarioConfig::validate() const {
  require(M >= 1, "M must be >= 1");
  require(N >= 0, "N must be >= 0");
  require(K >= 1, "K must be >= 1");
  require(alpha_bu > 0 && alpha_bi > 0 && alpha_iu > 0, "path-loss exponents must be > 0");
  require(std::isfinite(T0_db) && std::isfinite(ris_element_gain_db) &&
              std::isfinite(noise_power_dbm),
          "dB quantities must be finite");
  require(rate_min >= 0 && std::isfinite(rate_min), "rate_min must be >= 0");
  require(user_rates.empty() || static_cast<int>(user_rates.size()) == K,
          "user_rates must have K entries");
  for (double r : user_rates) require(r >= 0 && std::isfinite(r), "user_rates must be >= 0");
  require(rho > 0, "rho must be > 0");
  require(eta >= 0, "eta must be >= 0");
  require(epsilon > 0, "epsilon must be > 0");
  require(rank_tol > 0 && rank_tol < 1, "rank_tol must lie in (0, 1)");
  require(max_outer_iters >= 1, "max_outer_iters must be >= 1");
  require(max_inner_iters >= 1, "max_inner_iters must be >= 1");
  require(n_randomizations >= 1, "n_randomizations must be >= 1");
  require(user_region.x_min <= user_region.x_max && user_region.y_min <= user_region.y_max &&
              user_region.z_min <= user_region.z_max,
          "user_region bounds are inverted");
  require(user_positions.empty() || static_cast<int>(user_positions.size()) == K,
          "user_positions must have K entries");
}

double ScenarioConfig::rate(int user) const {
  return user_rates.empty() ? rate_min : user_rates.at(static_cast<std::size_t>(user));
}

double ScenarioConfig::gamma_min(int user) const { return std::exp2(rate(user)) - 1.0; }

ChannelSet ChannelSet::without_ris() const {
  ChannelSet out = *this;
  out.G.setZero();
  return out;
}

PhaseShiftVector::PhaseShiftVector(ComplexVector v) : v_(std::move(v)) {
  require_finite(v_, "PhaseShiftVector");
  for (Eigen::Index n = 0; n < v_.size(); ++n) {
    if (std::abs(std::abs(v_(n)) - 1.0) > kUnitModulusTol) {
      std::ostringstream os;
      os << "PhaseShiftVector: entry " << n << " has modulus " << std::abs(v_(n));
      throw ValidationError(os.str());
    }
  }
}

PhaseShiftVector PhaseShiftVector::from_angles(const RealVector& theta) {
  ComplexVector v(theta.size());
  for (Eigen::Index n = 0; n < theta.size(); ++n) v(n) = std::polar(1.0, theta(n));
  return PhaseShiftVector(std::move(v));
}

PhaseShiftVector PhaseShiftVector::project(const ComplexVector& v) {
  ComplexVector out(v.size());
  for (Eigen::Index n = 0; n < v.size(); ++n) {
    out(n) = std::abs(v(n)) > 0.0 ? std::polar(1.0, std::arg(v(n))) : Complex(1.0, 0.0);
  }
  return PhaseShiftVector(std::move(out));
}

RealVector PhaseShiftVector::angles() const {
  RealVector t(v_.size());
  for (Eigen::Index n = 0; n < v_.size(); ++n) {
    double a = std::arg(v_(n));
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    t(n) = a;
  }
  return t;
}

double BeamformerSet::total_power() const {
  double p = 0.0;
  for (const auto& wk : w) p += wk.squaredNorm();
  return p;
}

double path_loss(double d, double alpha, double T0_db) {
  if (!(d > 0.0)) throw ValidationError("path_loss: distance must be positive");
  return std::pow(10.0, T0_db / 10.0) * std::pow(d, -alpha);
}

ChannelSet generate_channels(const ScenarioConfig& config, const RngStream& stream) {
  config.validate();
  const int M = config.M, N = config.N, K = config.K;
  const double g_ris = db_to_linear(config.ris_element_gain_db);

  // Separate substreams per user and per RIS row keep realizations nested:
  // growing M, N or K extends the draws of a smaller configuration.
  ChannelSet ch;
  ch.users.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    if (!config.user_positions.empty()) {
      ch.users[k] = config.user_positions[k];
      continue;
    }
    auto rng = stream.substream({1, static_cast<std::uint64_t>(k)}).engine();
    const Region& r = config.user_region;
    std::uniform_real_distribution<double> ux(r.x_min, r.x_max), uy(r.y_min, r.y_max),
        uz(r.z_min, r.z_max);
    const double x = ux(rng), y = uy(rng);
    ch.users[k] = {x, y, r.z_min == r.z_max ? r.z_min : uz(rng)};
  }

  const double d_ib = distance(config.bs_pos, config.ris_pos);
  if (N > 0 && !(d_ib > 0.0)) throw ValidationError("generate_channels: BS and RIS coincide");
  ch.G.resize(N, M);
  for (int n = 0; n < N; ++n) {
    auto rng = stream.substream({4, static_cast<std::uint64_t>(n)}).engine();
    ch.G.row(n) = std::sqrt(path_loss(d_ib, config.alpha_bi, config.T0_db)) *
                  complex_gaussian(M, rng).transpose();
  }
  for (int k = 0; k < K; ++k) {
    const double d_bu = distance(config.bs_pos, ch.users[k]);
    const double d_iu = distance(config.ris_pos, ch.users[k]);
    if (!(d_bu > 0.0) || (N > 0 && !(d_iu > 0.0))) {
      throw ValidationError("generate_channels: user " + std::to_string(k) +
                            " coincides with the BS or RIS");
    }
    auto rng_d = stream.substream({2, static_cast<std::uint64_t>(k)}).engine();
    ch.h_d.push_back(std::sqrt(path_loss(d_bu, config.alpha_bu, config.T0_db)) *
                     complex_gaussian(M, rng_d));
    auto rng_r = stream.substream({3, static_cast<std::uint64_t>(k)}).engine();
    ComplexVector hr = complex_gaussian(N, rng_r);
    if (N > 0) hr *= std::sqrt(path_loss(d_iu, config.alpha_iu, config.T0_db) * g_ris);
    ch.h_r.push_back(std::move(hr));
  }
  return ch;
}

ComplexVector combined_channel(const ChannelSet& ch, const PhaseShiftVector& v, int k) {
  const auto& hd = ch.h_d.at(static_cast<std::size_t>(k));
  const auto& hr = ch.h_r.at(static_cast<std::size_t>(k));
  if (v.size() != ch.G.rows() || hr.size() != ch.G.rows() || hd.size() != ch.G.cols()) {
    throw ValidationError("combined_channel: dimension mismatch");
  }
  ComplexVector row = hd.conjugate();
  if (ch.G.rows() > 0) row += ch.G.transpose() * hr.conjugate().cwiseProduct(v.values());
  return row;
}

std::vector<ComplexVector> combined_channels(const ChannelSet& ch, const PhaseShiftVector& v) {
  std::vector<ComplexVector> rows;
  rows.reserve(ch.h_d.size());
  for (int k = 0; k < ch.K(); ++k) rows.push_back(combined_channel(ch, v, k));
  return rows;
}

void check_ordering(const std::vector<int>& ordering, int K) {
  if (static_cast<int>(ordering.size()) != K) {
    throw ValidationError("ordering must have K entries");
  }
  std::vector<bool> seen(static_cast<std::size_t>(K), false);
  for (int u : ordering) {
    if (u < 0 || u >= K || seen[u]) throw ValidationError("ordering is not a permutation");
    seen[u] = true;
  }
}

double sinr(const std::vector<ComplexVector>& rows, const BeamformerSet& bf, int k, int l,
            double sigma2) {
  const int K = static_cast<int>(bf.ordering.size());
  if (k < 0 || l < k || l >= K) throw ValidationError("sinr: requires 0 <= k <= l < K");
  const ComplexVector& h = rows.at(static_cast<std::size_t>(bf.ordering[l]));
  const double signal = gain(h, bf.w.at(static_cast<std::size_t>(bf.ordering[k])));
  double interference = 0.0;
  for (int j = k + 1; j < K; ++j) interference += gain(h, bf.w[bf.ordering[j]]);
  const double denom = interference + sigma2;
  if (denom == 0.0) return signal > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return signal / denom;
}

FeasibilityReport check_feasible(const std::vector<ComplexVector>& rows, const BeamformerSet& bf,
                                 const ScenarioConfig& config, double slack_tol) {
  const int K = static_cast<int>(rows.size());
  check_ordering(bf.ordering, K);
  if (static_cast<int>(bf.w.size()) != K) throw ValidationError("check_feasible: need K beamformers");
  const double sigma2 = config.noise_power_mw();
  FeasibilityReport rep;
  rep.feasible = true;
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    const double gamma = config.gamma_min(bf.ordering[k]);
    if (gamma <= 0.0) continue;
    for (int l = k; l < K; ++l) {
      const double ratio = sinr(rows, bf, k, l, sigma2) / gamma;
      if (ratio < rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.worst_k = k;
        rep.worst_l = l;
      }
      if (!(ratio >= 1.0 - slack_tol)) rep.feasible = false;
    }
  }
  return rep;
}

FeasibilityReport check_feasible(const ChannelSet& ch, const PhaseShiftVector& v,
                                 const BeamformerSet& bf, const ScenarioConfig& config,
                                 double slack_tol) {
  return check_feasible(combined_channels(ch, v), bf, config, slack_tol);
}

SicOrderReport sic_power_order(const std::vector<ComplexVector>& rows, const BeamformerSet& bf) {
  const int K = static_cast<int>(bf.ordering.size());
  SicOrderReport rep;
  for (int obs = 0; obs < K; ++obs) {
    const ComplexVector& h = rows.at(static_cast<std::size_t>(bf.ordering[obs]));
    for (int j = 0; j + 1 < K; ++j) {
      if (gain(h, bf.w[bf.ordering[j]]) < gain(h, bf.w[bf.ordering[j + 1]])) {
        rep.satisfied = false;
        ++rep.violations;
      }
    }
  }
  return rep;
}

}  // namespace risnoma
