#include "risnoma/orchestrator.hpp"

#include <cmath>
#include <limits>

namespace risnoma {

namespace {

struct BeamStep {
  bool ok = false;
  BeamformerSet bf;
  std::optional<LiftedBeamformers> lifted;
  std::string detail;
};

bool uses_dc_beams(Optimizer o) { return o != Optimizer::SDR; }

// One beamformer update at fixed phases. For DC, a step that fails or does not
// improve on the previous beamformers is retried from the lifted previous
// solution, which is feasible for the new phases; if that also fails the
// previous beamformers are kept, so the power never increases.
BeamStep beam_step(Optimizer optimizer, const std::vector<ComplexVector>& rows,
                   const std::vector<int>& perm, const ScenarioConfig& config,
                   const BeamformerSet* prev, const RngStream& stream, RunResult& res) {
  BeamStep step;
  const double prev_power = prev ? prev->total_power() : std::numeric_limits<double>::infinity();
  auto keep_previous = [&](const std::string& why) {
    step.ok = true;
    step.bf = *prev;
    if (uses_dc_beams(optimizer)) step.lifted = LiftedBeamformers::from_vectors(prev->w);
    step.detail = why;
  };

  if (!uses_dc_beams(optimizer)) {
    SdrBeamResult s = solve_beamformers_sdr(rows, perm, config, config.n_randomizations, stream);
    if (s.ok()) {
      step.ok = true;
      step.bf = std::move(s.bf);
    } else if (prev) {
      keep_previous(std::string("relaxation beam step: ") + to_string(s.status));
    } else {
      step.detail = std::string(to_string(s.status)) + " " + s.detail;
    }
    return step;
  }

  BeamformingResult r = solve_beamformers_dc(rows, perm, config);
  res.beam_traces.push_back(r.trace);
  if (r.ok() && r.bf.total_power() <= prev_power) {
    step.ok = true;
    step.bf = std::move(r.bf);
    step.lifted = std::move(r.lifted);
    return step;
  }
  if (!prev) {
    step.detail = std::string(to_string(r.status)) + " " + r.detail;
    return step;
  }
  BeamformingResult warm =
      solve_beamformers_dc(rows, perm, config, LiftedBeamformers::from_vectors(prev->w));
  res.beam_traces.push_back(warm.trace);
  if (warm.ok() && warm.bf.total_power() <= prev_power) {
    step.ok = true;
    step.bf = std::move(warm.bf);
    step.lifted = std::move(warm.lifted);
    return step;
  }
  keep_previous(std::string("warm-started beam step: ") + to_string(warm.status));
  return step;
}

struct Iterate {
  BeamformerSet bf;
  PhaseShiftVector v;
  double power = std::numeric_limits<double>::infinity();
  std::optional<LiftedBeamformers> lifted_w;
  std::optional<LiftedPhase> lifted_v;
};

void finish(RunResult& res, const Iterate& best) {
  res.beamformers = best.bf;
  res.phases = best.v;
  res.lifted_beamformers = best.lifted_w;
  res.lifted_phase = best.lifted_v;
  res.total_power_mw = best.power;
  res.total_power_dbm = mw_to_dbm(best.power);
  res.continuous_power_mw = best.power;
}

}  // namespace

const char* to_string(Optimizer o) {
  switch (o) {
    case Optimizer::DC: return "dc";
    case Optimizer::SDR: return "sdr";
    case Optimizer::RandomPhase: return "random";
    case Optimizer::NoRIS: return "noris";
  }
  return "unknown";
}

Optimizer optimizer_from_string(const std::string& s) {
  if (s == "dc") return Optimizer::DC;
  if (s == "sdr") return Optimizer::SDR;
  if (s == "random") return Optimizer::RandomPhase;
  if (s == "noris") return Optimizer::NoRIS;
  throw ValidationError("unknown optimizer '" + s + "'");
}

const char* to_string(TerminationReason t) {
  switch (t) {
    case TerminationReason::Converged: return "Converged";
    case TerminationReason::PhaseInfeasible: return "PhaseInfeasible";
    case TerminationReason::MaxIters: return "MaxIters";
    case TerminationReason::BeamformingInfeasible: return "BeamformingInfeasible";
    case TerminationReason::QuantizationInfeasible: return "QuantizationInfeasible";
  }
  return "Unknown";
}

RunResult alternate(const ScenarioConfig& config, const ChannelSet& ch_in,
                    const OrderingResult& ordering, Optimizer optimizer,
                    const TrialStreams& streams) {
  RunResult res;
  res.optimizer = optimizer;
  res.ordering_scheme = ordering.scheme;
  const ChannelSet ch = optimizer == Optimizer::NoRIS ? ch_in.without_ris() : ch_in;
  const std::vector<int>& perm = ordering.permutation;

  Iterate cur;
  cur.v = random_phase(ch.N(), streams.initial_phases);
  BeamStep b = beam_step(optimizer, combined_channels(ch, cur.v), perm, config, nullptr,
                         streams.randomization.substream({1, 0}), res);
  res.outer_iterations = 1;
  if (!b.ok) {
    res.termination = TerminationReason::BeamformingInfeasible;
    res.total_power_mw = res.total_power_dbm = std::numeric_limits<double>::quiet_NaN();
    res.continuous_power_mw = res.total_power_mw;
    res.detail = b.detail;
    return res;
  }
  cur.bf = std::move(b.bf);
  cur.lifted_w = std::move(b.lifted);
  cur.power = cur.bf.total_power();
  res.power_trace.push_back(cur.power);
  Iterate best = cur;

  if (optimizer == Optimizer::RandomPhase || optimizer == Optimizer::NoRIS) {
    res.termination = TerminationReason::Converged;
    finish(res, best);
    return res;
  }

  res.termination = TerminationReason::MaxIters;
  for (int t = 2; t <= config.max_outer_iters; ++t) {
    const PhaseProblemData data = build_phase_data(ch, cur.bf);
    PhaseResult pr;
    if (optimizer == Optimizer::DC) {
      pr = solve_phase_dc(data, config);
      res.phase_traces.push_back(pr.trace);
      if (!pr.ok()) {
        // The current phases are feasible, so a warm start always has a
        // rank-one fixed point to fall back on.
        const std::string first = std::string(to_string(pr.status)) + " " + pr.detail;
        pr = solve_phase_dc(data, config, LiftedPhase::from_phases(cur.v));
        res.phase_traces.push_back(pr.trace);
        if (!pr.ok()) pr.detail = first + "; warm start: " + pr.detail;
      }
    } else {
      pr = solve_phase_sdr(data, config, config.n_randomizations,
                           streams.randomization.substream({static_cast<std::uint64_t>(t), 1}));
    }
    if (!pr.ok()) {
      res.termination = TerminationReason::PhaseInfeasible;
      res.detail = std::string(to_string(pr.status)) + " " + pr.detail;
      break;
    }

    b = beam_step(optimizer, combined_channels(ch, pr.v), perm, config, &cur.bf,
                  streams.randomization.substream({static_cast<std::uint64_t>(t), 0}), res);
    res.outer_iterations = t;
    const double prev_power = cur.power;
    cur.v = pr.v;
    cur.lifted_v = optimizer == Optimizer::DC ? pr.lifted : std::nullopt;
    cur.bf = std::move(b.bf);
    cur.lifted_w = std::move(b.lifted);
    cur.power = cur.bf.total_power();
    res.power_trace.push_back(cur.power);
    if (cur.power <= best.power) best = cur;

    if ((prev_power - cur.power) / prev_power < config.epsilon) {
      res.termination = TerminationReason::Converged;
      break;
    }
  }
  finish(res, best);
  return res;
}

OrderingResult compute_ordering(const ScenarioConfig& config, const ChannelSet& ch_in,
                                OrderingScheme scheme, Optimizer optimizer,
                                const TrialStreams& streams) {
  const ChannelSet ch = optimizer == Optimizer::NoRIS ? ch_in.without_ris() : ch_in;
  switch (scheme) {
    case OrderingScheme::DirectLink: return order_direct_link(ch);
    case OrderingScheme::Eigen: return order_eigen(ch, config);
    case OrderingScheme::SDR: return order_sdr(ch, config);
    case OrderingScheme::Exhaustive:
      return order_exhaustive(ch, config, [&](const std::vector<int>& perm) -> std::optional<double> {
        OrderingResult o;
        o.permutation = perm;
        o.scheme = OrderingScheme::Exhaustive;
        const RunResult r = alternate(config, ch_in, o, optimizer, streams);
        if (!r.has_solution()) return std::nullopt;
        return r.total_power_mw;
      });
  }
  throw ValidationError("unknown ordering scheme");
}

RunResult run_trial(const ScenarioConfig& config, std::uint64_t seed, OrderingScheme scheme,
                    Optimizer optimizer, std::optional<int> bits) {
  config.validate();
  const TrialStreams streams(seed);
  const ChannelSet ch = generate_channels(config, streams.channels);

  RunResult res;
  if (scheme == OrderingScheme::Exhaustive) {
    // Keep the winning run instead of recomputing it.
    std::optional<RunResult> best;
    order_exhaustive(ch, config, [&](const std::vector<int>& perm) -> std::optional<double> {
      OrderingResult o;
      o.permutation = perm;
      o.scheme = OrderingScheme::Exhaustive;
      RunResult r = alternate(config, ch, o, optimizer, streams);
      if (!r.has_solution()) return std::nullopt;
      const double p = r.total_power_mw;
      if (!best || p < best->total_power_mw) best = std::move(r);
      return p;
    });
    res = std::move(*best);
  } else {
    res = alternate(config, ch, compute_ordering(config, ch, scheme, optimizer, streams),
                    optimizer, streams);
  }

  res.bits = bits;
  if (!bits || !res.has_solution() || optimizer == Optimizer::NoRIS || ch.N() == 0) return res;

  const PhaseShiftVector vq = quantize_phases(res.phases, *bits);
  const std::vector<ComplexVector> rows = combined_channels(ch, vq);
  const std::vector<int>& perm = res.beamformers.ordering;
  std::optional<BeamformerSet> bf;
  std::string why;
  if (uses_dc_beams(optimizer)) {
    BeamformingResult r = solve_beamformers_dc(rows, perm, config);
    res.beam_traces.push_back(r.trace);
    if (r.ok()) {
      bf = std::move(r.bf);
      res.lifted_beamformers = std::move(r.lifted);
    } else {
      why = std::string(to_string(r.status)) + " " + r.detail;
    }
  } else {
    SdrBeamResult r = solve_beamformers_sdr(rows, perm, config, config.n_randomizations,
                                            streams.randomization.substream({0, 2}));
    if (r.ok()) {
      bf = std::move(r.bf);
    } else {
      why = std::string(to_string(r.status)) + " " + r.detail;
    }
  }
  res.phases = vq;
  res.lifted_phase.reset();
  if (!bf) {
    res.termination = TerminationReason::QuantizationInfeasible;
    res.total_power_mw = res.total_power_dbm = std::numeric_limits<double>::quiet_NaN();
    res.detail = "re-solve after quantization: " + why;
    return res;
  }
  res.beamformers = std::move(*bf);
  res.total_power_mw = res.beamformers.total_power();
  res.total_power_dbm = mw_to_dbm(res.total_power_mw);
  return res;
}

}  // namespace risnoma
