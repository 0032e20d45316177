#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "risnoma/beamforming.hpp"
#include "risnoma/ordering.hpp"
#include "risnoma/phase.hpp"

namespace risnoma {

enum class Optimizer { DC, SDR, RandomPhase, NoRIS };
const char* to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& s);

enum class TerminationReason {
  Converged,
  PhaseInfeasible,
  MaxIters,
  BeamformingInfeasible,
  QuantizationInfeasible  // the re-solve after phase quantization failed
};
const char* to_string(TerminationReason t);

struct RunResult {
  double total_power_mw = 0.0;
  double total_power_dbm = 0.0;
  int outer_iterations = 0;
  TerminationReason termination = TerminationReason::BeamformingInfeasible;
  std::vector<double> power_trace;  // one entry per beamformer step, mW

  BeamformerSet beamformers;
  PhaseShiftVector phases;
  std::optional<LiftedBeamformers> lifted_beamformers;  // DC beam steps only
  std::optional<LiftedPhase> lifted_phase;              // DC phase steps only

  std::vector<DcTrace> beam_traces;
  std::vector<DcTrace> phase_traces;

  Optimizer optimizer = Optimizer::DC;
  OrderingScheme ordering_scheme = OrderingScheme::Eigen;
  std::optional<int> bits;  // nullopt: continuous phases
  double continuous_power_mw = 0.0;  // before quantization

  std::string detail;

  /// A feasible (w, v) pair is available and the powers are meaningful.
  bool has_solution() const noexcept {
    return termination != TerminationReason::BeamformingInfeasible &&
           termination != TerminationReason::QuantizationInfeasible;
  }
};

/// Random streams used by one trial. All schemes of a trial share the
/// channel and initial-phase streams.
struct TrialStreams {
  RngStream channels, initial_phases, randomization;
  explicit TrialStreams(std::uint64_t seed)
      : channels(RngStream(seed).substream(1)),
        initial_phases(RngStream(seed).substream(2)),
        randomization(RngStream(seed).substream(3)) {}
};

RunResult alternate(const ScenarioConfig& config, const ChannelSet& ch,
                    const OrderingResult& ordering, Optimizer optimizer,
                    const TrialStreams& streams);

/// Ordering for the given channels; Exhaustive runs the alternating pipeline
/// for every permutation with the given optimizer.
OrderingResult compute_ordering(const ScenarioConfig& config, const ChannelSet& ch,
                                OrderingScheme scheme, Optimizer optimizer,
                                const TrialStreams& streams);

RunResult run_trial(const ScenarioConfig& config, std::uint64_t seed, OrderingScheme ordering,
                    Optimizer optimizer, std::optional<int> bits = std::nullopt);

}  // namespace risnoma
