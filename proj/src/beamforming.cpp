#include "risnoma/beamforming.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace risnoma {

namespace {

constexpr double kFeasibleSlack = 1e-5;

double total_trace(const std::vector<HermitianMatrix>& W) {
  double s = 0.0;
  for (const auto& w : W) s += w.trace();
  return s;
}

double dc_objective(const LiftedBeamformers& lb, double rho) {
  return lb.total_power + rho * lb.penalty;
}

std::vector<HermitianMatrix> scaled(const std::vector<HermitianMatrix>& blocks, double unit) {
  std::vector<HermitianMatrix> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(HermitianMatrix::from_symmetrized(b.matrix() * unit));
  return out;
}

bool any_target(const std::vector<int>& ordering, const ScenarioConfig& config) {
  for (int u : ordering) {
    if (config.gamma_min(u) > 0.0) return true;
  }
  return false;
}

BeamformerSet zero_beamformers(int K, int M, const std::vector<int>& ordering) {
  BeamformerSet bf;
  bf.w.assign(static_cast<std::size_t>(K), ComplexVector::Zero(M));
  bf.ordering = ordering;
  return bf;
}

}  // namespace

const char* to_string(BeamStatus s) {
  switch (s) {
    case BeamStatus::Success: return "Success";
    case BeamStatus::Infeasible: return "Infeasible";
    case BeamStatus::RankNotAchieved: return "RankNotAchieved";
    case BeamStatus::ExtractionInfeasible: return "ExtractionInfeasible";
    case BeamStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

const char* to_string(SdrStatus s) {
  switch (s) {
    case SdrStatus::Exact: return "Exact";
    case SdrStatus::Randomized: return "Randomized";
    case SdrStatus::Failed: return "RandomizationFailed";
    case SdrStatus::Infeasible: return "Infeasible";
    case SdrStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

LiftedBeamformers LiftedBeamformers::from_blocks(std::vector<HermitianMatrix> W) {
  LiftedBeamformers lb;
  lb.W = std::move(W);
  for (const auto& w : lb.W) {
    lb.penalty += nuclear_minus_spectral(w);
    lb.total_power += w.trace();
  }
  return lb;
}

LiftedBeamformers LiftedBeamformers::from_vectors(const std::vector<ComplexVector>& w) {
  std::vector<HermitianMatrix> W;
  W.reserve(w.size());
  for (const auto& wk : w) W.push_back(HermitianMatrix::outer(wk));
  return from_blocks(std::move(W));
}

conic::ConicProblem build_p3_subproblem(const std::vector<ComplexVector>& rows,
                                        const std::vector<int>& ordering,
                                        const std::vector<HermitianMatrix>& subgrads,
                                        const ScenarioConfig& config, const P3Weights& weights) {
  const int K = static_cast<int>(rows.size());
  check_ordering(ordering, K);
  if (static_cast<int>(subgrads.size()) != K) {
    throw ValidationError("build_p3_subproblem: need one subgradient per user");
  }
  const Eigen::Index M = K > 0 ? rows[0].size() : 0;
  for (int k = 0; k < K; ++k) {
    if (rows[k].size() != M || subgrads[k].dim() != M) {
      throw ValidationError("build_p3_subproblem: dimension mismatch");
    }
  }
  if (!(weights.power_unit > 0.0)) throw ValidationError("build_p3_subproblem: power_unit <= 0");

  conic::ConicProblem p;
  const ComplexMatrix I = ComplexMatrix::Identity(M, M);
  for (int k = 0; k < K; ++k) {
    const auto b = p.add_block(static_cast<std::size_t>(M));
    p.set_linear_cost(b, (1.0 + weights.rho) * I - subgrads[k].matrix());
    if (weights.eta > 0.0) p.set_quadratic_weight(b, weights.eta * weights.power_unit);
  }
  const double sigma2 = config.noise_power_mw() / weights.power_unit;
  for (int k = 0; k < K; ++k) {
    const double gamma = config.gamma_min(ordering[k]);
    if (gamma <= 0.0) continue;
    for (int l = k; l < K; ++l) {
      const ComplexVector h = column_of(rows[ordering[l]]);
      const ComplexMatrix H = h * h.adjoint();
      conic::Constraint c;
      c.terms.push_back({static_cast<std::size_t>(ordering[k]), H});
      for (int j = k + 1; j < K; ++j) {
        c.terms.push_back({static_cast<std::size_t>(ordering[j]), -gamma * H});
      }
      c.sense = conic::Sense::GreaterEqual;
      c.rhs = gamma * sigma2;
      c.label = "sinr k=" + std::to_string(k) + " l=" + std::to_string(l);
      p.add_constraint(std::move(c));
    }
  }
  return p;
}

conic::ConicProblem build_p3_subproblem(const std::vector<ComplexVector>& rows,
                                        const std::vector<int>& ordering,
                                        const std::vector<HermitianMatrix>& subgrads,
                                        const ScenarioConfig& config) {
  return build_p3_subproblem(rows, ordering, subgrads, config, {config.rho, config.eta, 1.0});
}

HermitianMatrix spectral_subgradient(const HermitianMatrix& W) {
  return HermitianMatrix::outer(leading_eigenvector(W));
}

double beam_power_unit(const std::vector<ComplexVector>& rows, const ScenarioConfig& config) {
  double unit = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double g = config.gamma_min(static_cast<int>(k));
    const double h2 = rows[k].squaredNorm();
    if (g > 0.0 && h2 > 0.0) unit = std::max(unit, g * config.noise_power_mw() / h2);
  }
  return unit > 0.0 && std::isfinite(unit) ? unit : 1.0;
}

BeamformingResult solve_beamformers_dc(const std::vector<ComplexVector>& rows,
                                       const std::vector<int>& ordering,
                                       const ScenarioConfig& config,
                                       const std::optional<LiftedBeamformers>& init) {
  const int K = static_cast<int>(rows.size());
  check_ordering(ordering, K);
  const Eigen::Index M = K > 0 ? rows[0].size() : 0;
  BeamformingResult res;
  res.trace.eta = config.eta;
  if (!any_target(ordering, config)) {
    res.status = BeamStatus::Success;
    res.bf = zero_beamformers(K, static_cast<int>(M), ordering);
    res.lifted = LiftedBeamformers::from_vectors(res.bf.w);
    res.trace.objective = {0.0};
    res.trace.penalty = {0.0};
    res.trace.converged = true;
    return res;
  }
  const double unit = beam_power_unit(rows, config);

  LiftedBeamformers current;
  if (init) {
    if (static_cast<int>(init->W.size()) != K) {
      throw ValidationError("solve_beamformers_dc: init has wrong number of blocks");
    }
    current = *init;
  } else {
    const std::vector<HermitianMatrix> zero(static_cast<std::size_t>(K), HermitianMatrix::zero(M));
    const conic::ConicSolution sdr =
        conic::solve(build_p3_subproblem(rows, ordering, zero, config, {0.0, 0.0, unit}));
    if (sdr.status == conic::SolveStatus::Infeasible) {
      res.status = BeamStatus::Infeasible;
      res.detail = "relaxed beamforming problem is infeasible";
      return res;
    }
    if (!sdr.optimal()) {
      res.status = BeamStatus::NumericalFailure;
      res.detail = std::string("relaxation: ") + conic::to_string(sdr.status) + " " + sdr.diagnostics;
      return res;
    }
    current = LiftedBeamformers::from_blocks(scaled(sdr.blocks, unit));
  }
  res.trace.objective.push_back(dc_objective(current, config.rho));
  res.trace.penalty.push_back(current.penalty);

  for (int r = 1; r <= config.max_inner_iters; ++r) {
    std::vector<HermitianMatrix> subgrads;
    subgrads.reserve(current.W.size());
    for (const auto& W : current.W) {
      subgrads.push_back(HermitianMatrix::from_symmetrized(
          config.rho * spectral_subgradient(W).matrix() + config.eta * W.matrix()));
    }
    const conic::ConicSolution sol = conic::solve(
        build_p3_subproblem(rows, ordering, subgrads, config, {config.rho, config.eta, unit}));
    if (!sol.optimal()) {
      res.status = sol.status == conic::SolveStatus::Infeasible ? BeamStatus::Infeasible
                                                                 : BeamStatus::NumericalFailure;
      res.detail = std::string("DC subproblem ") + std::to_string(r) + ": " +
                   conic::to_string(sol.status) + " " + sol.diagnostics;
      res.lifted = current;
      return res;
    }
    LiftedBeamformers next = LiftedBeamformers::from_blocks(scaled(sol.blocks, unit));
    double step = 0.0;
    for (int k = 0; k < K; ++k) step += (next.W[k].matrix() - current.W[k].matrix()).squaredNorm();
    current = std::move(next);
    res.trace.step_sq.push_back(step);
    res.trace.objective.push_back(dc_objective(current, config.rho));
    res.trace.penalty.push_back(current.penalty);
    res.trace.iterations = r;
    if (current.penalty <= config.rank_tol * std::max(1.0, current.total_power)) {
      res.trace.converged = true;
      break;
    }
  }
  res.lifted = current;
  if (!res.trace.converged) {
    res.status = BeamStatus::RankNotAchieved;
    std::ostringstream os;
    os << "rank penalty " << current.penalty << " after " << res.trace.iterations << " iterations";
    res.detail = os.str();
    return res;
  }

  res.bf.ordering = ordering;
  for (const auto& W : current.W) {
    const EigenDecomposition ed = hermitian_eig(W);
    const double s1 = ed.eigenvalues.size() > 0 ? std::abs(ed.eigenvalues(0)) : 0.0;
    const double tol = s1 > 0.0 ? std::max(config.rank_tol, nuclear_minus_spectral(W) / s1)
                                : config.rank_tol;
    res.bf.w.push_back(extract_rank_one(W, std::min(tol, 1.0)));
  }
  const FeasibilityReport rep = check_feasible(rows, res.bf, config, kFeasibleSlack);
  if (!rep.feasible) {
    res.status = BeamStatus::ExtractionInfeasible;
    std::ostringstream os;
    os << "extracted beamformers violate SINR at (k=" << rep.worst_k << ", l=" << rep.worst_l
       << "), ratio " << rep.worst_ratio;
    res.detail = os.str();
    return res;
  }
  res.status = BeamStatus::Success;
  return res;
}

ComplexVector gaussian_candidate(const HermitianMatrix& A, std::mt19937_64& rng) {
  const EigenDecomposition ed = hermitian_eig(A);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  ComplexVector z(A.dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double re = nd(rng);
    const double im = nd(rng);
    z(i) = Complex(re, im) * std::sqrt(std::max(ed.eigenvalues(i), 0.0));
  }
  return ed.eigenvectors * z;
}

SdrBeamResult solve_beamformers_sdr(const std::vector<ComplexVector>& rows,
                                    const std::vector<int>& ordering, const ScenarioConfig& config,
                                    int n_randomizations, const RngStream& stream) {
  const int K = static_cast<int>(rows.size());
  check_ordering(ordering, K);
  const Eigen::Index M = K > 0 ? rows[0].size() : 0;
  SdrBeamResult res;
  if (!any_target(ordering, config)) {
    res.status = SdrStatus::Exact;
    res.bf = zero_beamformers(K, static_cast<int>(M), ordering);
    return res;
  }
  const double unit = beam_power_unit(rows, config);
  const std::vector<HermitianMatrix> zero(static_cast<std::size_t>(K), HermitianMatrix::zero(M));
  const conic::ConicSolution sdr =
      conic::solve(build_p3_subproblem(rows, ordering, zero, config, {0.0, 0.0, unit}));
  if (sdr.status == conic::SolveStatus::Infeasible) {
    res.status = SdrStatus::Infeasible;
    res.detail = "relaxed beamforming problem is infeasible";
    return res;
  }
  if (!sdr.optimal()) {
    res.status = SdrStatus::NumericalFailure;
    res.detail = std::string(conic::to_string(sdr.status)) + " " + sdr.diagnostics;
    return res;
  }
  const std::vector<HermitianMatrix> W = scaled(sdr.blocks, unit);
  res.relaxation_power = total_trace(W);

  BeamformerSet exact;
  exact.ordering = ordering;
  try {
    for (const auto& Wk : W) exact.w.push_back(extract_rank_one(Wk, config.rank_tol));
    if (check_feasible(rows, exact, config, kFeasibleSlack).feasible) {
      res.status = SdrStatus::Exact;
      res.bf = std::move(exact);
      return res;
    }
  } catch (const RankToleranceExceeded&) {
  }

  // Gaussian randomization with the smallest common scaling that restores
  // every SINR row: c^2 (a_lk) >= gamma sigma^2 where a_lk is the
  // interference-limited margin of the candidate.
  const double sigma2 = config.noise_power_mw();
  auto rng = stream.engine();
  double best = std::numeric_limits<double>::infinity();
  std::vector<ComplexVector> cand(static_cast<std::size_t>(K));
  for (int trial = 0; trial < n_randomizations; ++trial) {
    for (int k = 0; k < K; ++k) cand[k] = gaussian_candidate(W[k], rng);
    double c2 = 0.0;
    bool ok = true;
    for (int k = 0; k < K && ok; ++k) {
      const double gamma = config.gamma_min(ordering[k]);
      if (gamma <= 0.0) continue;
      for (int l = k; l < K; ++l) {
        const ComplexVector& h = rows[ordering[l]];
        double margin = gain(h, cand[ordering[k]]);
        for (int j = k + 1; j < K; ++j) margin -= gamma * gain(h, cand[ordering[j]]);
        if (!(margin > 0.0)) {
          ok = false;
          break;
        }
        c2 = std::max(c2, gamma * sigma2 / margin);
      }
    }
    if (!ok) continue;
    double power = 0.0;
    for (const auto& c : cand) power += c.squaredNorm();
    power *= c2;
    if (power < best) {
      best = power;
      res.bf.ordering = ordering;
      res.bf.w.clear();
      for (const auto& c : cand) res.bf.w.push_back(std::sqrt(c2) * c);
    }
  }
  if (!std::isfinite(best)) {
    res.status = SdrStatus::Failed;
    res.detail = "no Gaussian candidate could be scaled to feasibility";
    return res;
  }
  res.status = SdrStatus::Randomized;
  return res;
}

}  // namespace risnoma
