#pragma once

#include <optional>
#include <string>
#include <vector>

#include "risnoma/numerics.hpp"
#include "risnoma/random.hpp"

namespace risnoma {

struct Point3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

double distance(const Point3& a, const Point3& b);

struct Region {
  double x_min = -50.0, x_max = 50.0;
  double y_min = 60.0, y_max = 160.0;
  double z_min = 0.0, z_max = 0.0;
};

struct ScenarioConfig {
  int M = 3;  // BS antennas
  int N = 8;  // RIS elements (0 disables the reflected path)
  int K = 4;  // users

  Point3 bs_pos{0.0, 0.0, 10.0};
  Point3 ris_pos{50.0, 50.0, 15.0};
  Region user_region;
  std::vector<Point3> user_positions;  // overrides the region when non-empty

  double T0_db = -30.0;
  double alpha_bu = 3.5;
  double alpha_bi = 2.0;
  double alpha_iu = 2.2;
  double ris_element_gain_db = 3.0;
  double noise_power_dbm = -80.0;

  double rate_min = 1.5;           // bits/channel use, all users
  std::vector<double> user_rates;  // per-user override, size K

  double rho = 10.0;
  double eta = 1e-4;
  double epsilon = 1e-4;
  double rank_tol = 1e-6;
  int max_outer_iters = 30;
  int max_inner_iters = 50;
  int n_randomizations = 200;
  std::uint64_t seed = 1;

  /// Throws ValidationError naming the offending field.
  void validate() const;

  double noise_power_mw() const { return dbm_to_mw(noise_power_dbm); }
  double rate(int user) const;
  /// 2^R - 1 for the given user.
  double gamma_min(int user) const;
};

struct ChannelSet {
  std::vector<ComplexVector> h_d;  // K x (M)
  std::vector<ComplexVector> h_r;  // K x (N)
  ComplexMatrix G;                 // N x M
  std::vector<Point3> users;

  int M() const { return static_cast<int>(G.cols()); }
  int N() const { return static_cast<int>(G.rows()); }
  int K() const { return static_cast<int>(h_d.size()); }
  /// Copy with the reflected path removed (G = 0).
  ChannelSet without_ris() const;
};

/// Reflection coefficients v_n = e^{j theta_n}; the RIS acts as diag(v).
class PhaseShiftVector {
 public:
  PhaseShiftVector() = default;
  /// Validates | |v_n| - 1 | <= 1e-8.
  explicit PhaseShiftVector(ComplexVector v);
  static PhaseShiftVector from_angles(const RealVector& theta);
  /// Projects every entry onto the unit circle (zero entries map to 1).
  static PhaseShiftVector project(const ComplexVector& v);

  const ComplexVector& values() const noexcept { return v_; }
  Eigen::Index size() const noexcept { return v_.size(); }
  /// Angles in [0, 2 pi).
  RealVector angles() const;

 private:
  ComplexVector v_;
};

/// Decode order: ordering[pos] is the user decoded at position pos
/// (position 0 is decoded first by everyone and gets the most power).
struct BeamformerSet {
  std::vector<ComplexVector> w;  // indexed by user
  std::vector<int> ordering;

  double total_power() const;
};

/// L(d) = 10^{T0/10} d^{-alpha}.
double path_loss(double d, double alpha, double T0_db);

ChannelSet generate_channels(const ScenarioConfig& config, const RngStream& stream);

/// Entries r_m of the row h_k^H = h_{r,k}^H diag(v) G + h_{d,k}^H, so the
/// received amplitude for beamformer w is sum_m r_m w_m.
ComplexVector combined_channel(const ChannelSet& ch, const PhaseShiftVector& v, int k);

/// Rows for all users.
std::vector<ComplexVector> combined_channels(const ChannelSet& ch, const PhaseShiftVector& v);

/// Column vector h with h^H = row, i.e. H = h h^H gives |row w|^2 = Tr(H w w^H).
inline ComplexVector column_of(const ComplexVector& row) { return row.conjugate(); }

inline double gain(const ComplexVector& row, const ComplexVector& w) {
  return std::norm(row.cwiseProduct(w).sum());
}

/// SINR of the signal at position k observed by the user at position l >= k.
double sinr(const std::vector<ComplexVector>& rows, const BeamformerSet& bf, int k, int l,
            double sigma2);

void check_ordering(const std::vector<int>& ordering, int K);

struct FeasibilityReport {
  bool feasible = false;
  double worst_ratio = 0.0;  // min over (k, l) of SINR / gamma
  int worst_k = -1;          // positions in decode order
  int worst_l = -1;
};

FeasibilityReport check_feasible(const std::vector<ComplexVector>& rows, const BeamformerSet& bf,
                                 const ScenarioConfig& config, double slack_tol);
FeasibilityReport check_feasible(const ChannelSet& ch, const PhaseShiftVector& v,
                                 const BeamformerSet& bf, const ScenarioConfig& config,
                                 double slack_tol);

/// Whether every user receives the decode-ordered signals with non-increasing
/// power. Reported only; never enforced.
struct SicOrderReport {
  bool satisfied = true;
  int violations = 0;
};
SicOrderReport sic_power_order(const std::vector<ComplexVector>& rows, const BeamformerSet& bf);

}  // namespace risnoma
