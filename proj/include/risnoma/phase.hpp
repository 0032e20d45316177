#pragma once

#include <optional>
#include <string>
#include <vector>

#include "risnoma/channel.hpp"
#include "risnoma/conic.hpp"
#include "risnoma/dc_trace.hpp"

namespace risnoma {

/// Quadratic-form data of the phase subproblem for fixed beamformers.
///
/// With x = conj(v) (v the reflection coefficients) the amplitude of user k's
/// beamformer at user l is x^H a_lk + b_lk, and for x~ = (x; 1)
///   |x^H a_lk + b_lk|^2 = x~^H R_lk x~ + |b_lk|^2.
/// Outer indices are users (not decode positions).
struct PhaseProblemData {
  int N = 0;
  std::vector<std::vector<ComplexVector>> a;  // a[l][k] = diag(h_{r,l}^H) G w_k
  std::vector<std::vector<Complex>> b;        // b[l][k] = h_{d,l}^H w_k
  std::vector<std::vector<HermitianMatrix>> R;
  std::vector<int> ordering;

  int K() const { return static_cast<int>(b.size()); }
};

PhaseProblemData build_phase_data(const ChannelSet& ch, const BeamformerSet& bf);

/// x~ = (conj(v); 1).
ComplexVector lift_phases(const PhaseShiftVector& v);
/// Inverse of lift_phases up to global phase and scaling; entries are
/// projected back onto the unit circle.
PhaseShiftVector unlift_phases(const ComplexVector& x);

struct LiftedPhase {
  HermitianMatrix V;
  double penalty = 0.0;

  static LiftedPhase from_matrix(HermitianMatrix V);
  static LiftedPhase from_phases(const PhaseShiftVector& v);
};

/// The SINR rows in trace form over a single (N+1)-block with unit diagonal.
/// The objective is left at zero.
conic::ConicProblem build_phase_feasibility(const PhaseProblemData& data,
                                            const ScenarioConfig& config);

/// Evaluates the SINR constraints for phases v directly from the data.
FeasibilityReport phase_feasible(const PhaseProblemData& data, const PhaseShiftVector& v,
                                 const ScenarioConfig& config, double slack_tol);

enum class PhaseStatus {
  Success,
  Infeasible,
  RankNotAchieved,
  ExtractionInfeasible,
  RandomizationFailed,
  NumericalFailure
};
const char* to_string(PhaseStatus s);

struct PhaseResult {
  PhaseStatus status = PhaseStatus::NumericalFailure;
  PhaseShiftVector v;
  std::optional<LiftedPhase> lifted;
  DcTrace trace;
  bool exact = false;  // relaxation baseline: rank one without randomization
  std::string detail;

  bool ok() const noexcept { return status == PhaseStatus::Success; }
};

/// DC iterations over V. Without init the iterations start from a solution
/// of the relaxed feasibility problem; with init they start from init.
PhaseResult solve_phase_dc(const PhaseProblemData& data, const ScenarioConfig& config,
                           const std::optional<LiftedPhase>& init = std::nullopt);

PhaseResult solve_phase_sdr(const PhaseProblemData& data, const ScenarioConfig& config,
                            int n_randomizations, const RngStream& stream);

PhaseShiftVector random_phase(int N, const RngStream& stream);

/// Nearest point of the 2^B-level lattice under circular distance; exact
/// ties go to the smaller lattice angle.
PhaseShiftVector quantize_phases(const PhaseShiftVector& v, int bits);

}  // namespace risnoma
