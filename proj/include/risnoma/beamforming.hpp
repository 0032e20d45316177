#pragma once

#include <optional>
#include <string>
#include <vector>

#include "risnoma/channel.hpp"
#include "risnoma/conic.hpp"
#include "risnoma/dc_trace.hpp"

namespace risnoma {

struct LiftedBeamformers {
  std::vector<HermitianMatrix> W;  // indexed by user
  double penalty = 0.0;            // sum_k nuclear_minus_spectral(W_k)
  double total_power = 0.0;        // sum_k Tr W_k, mW

  static LiftedBeamformers from_blocks(std::vector<HermitianMatrix> W);
  static LiftedBeamformers from_vectors(const std::vector<ComplexVector>& w);
};

enum class BeamStatus { Success, Infeasible, RankNotAchieved, ExtractionInfeasible, NumericalFailure };
const char* to_string(BeamStatus s);

struct BeamformingResult {
  BeamStatus status = BeamStatus::NumericalFailure;
  BeamformerSet bf;
  LiftedBeamformers lifted;
  DcTrace trace;
  std::string detail;

  bool ok() const noexcept { return status == BeamStatus::Success; }
};

struct P3Weights {
  double rho = 0.0;
  double eta = 0.0;
  /// Variables are W_k / power_unit and the objective is divided by it.
  double power_unit = 1.0;
};

/// Block k is user k. Linear cost (1 + rho) I - subgrad_k, quadratic weight
/// eta * power_unit, one row per (k, l >= k) in decode order for users with a
/// positive SINR target.
conic::ConicProblem build_p3_subproblem(const std::vector<ComplexVector>& rows,
                                        const std::vector<int>& ordering,
                                        const std::vector<HermitianMatrix>& subgrads,
                                        const ScenarioConfig& config, const P3Weights& weights);
conic::ConicProblem build_p3_subproblem(const std::vector<ComplexVector>& rows,
                                        const std::vector<int>& ordering,
                                        const std::vector<HermitianMatrix>& subgrads,
                                        const ScenarioConfig& config);

/// u_1 u_1^H for the leading eigenvector of W.
HermitianMatrix spectral_subgradient(const HermitianMatrix& W);

/// Largest single-user MRT power over users with a positive target, used to
/// bring the subproblems to unit scale.
double beam_power_unit(const std::vector<ComplexVector>& rows, const ScenarioConfig& config);

BeamformingResult solve_beamformers_dc(const std::vector<ComplexVector>& rows,
                                       const std::vector<int>& ordering,
                                       const ScenarioConfig& config,
                                       const std::optional<LiftedBeamformers>& init = std::nullopt);

enum class SdrStatus { Exact, Randomized, Failed, Infeasible, NumericalFailure };
const char* to_string(SdrStatus s);

struct SdrBeamResult {
  SdrStatus status = SdrStatus::NumericalFailure;
  BeamformerSet bf;
  double relaxation_power = 0.0;  // SDR lower bound, mW
  std::string detail;

  bool ok() const noexcept { return status == SdrStatus::Exact || status == SdrStatus::Randomized; }
};

SdrBeamResult solve_beamformers_sdr(const std::vector<ComplexVector>& rows,
                                    const std::vector<int>& ordering, const ScenarioConfig& config,
                                    int n_randomizations, const RngStream& stream);

/// Draws xi ~ CN(0, A) using the eigendecomposition of A.
ComplexVector gaussian_candidate(const HermitianMatrix& A, std::mt19937_64& rng);

}  // namespace risnoma
