#include "risnoma/phase.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "risnoma/beamforming.hpp"

namespace risnoma {

namespace {

constexpr double kFeasibleSlack = 1e-5;

// Trace-form row for (position k, position l): Tr(A V) >= rhs, in units of
// the noise power.
struct PhaseRow {
  ComplexMatrix A;
  double rhs;
};

std::vector<PhaseRow> phase_rows(const PhaseProblemData& data, const ScenarioConfig& config) {
  const int K = data.K();
  const double sigma2 = config.noise_power_mw();
  std::vector<PhaseRow> rows;
  for (int k = 0; k < K; ++k) {
    const int uk = data.ordering[k];
    const double gamma = config.gamma_min(uk);
    if (gamma <= 0.0) continue;
    for (int l = k; l < K; ++l) {
      const int ul = data.ordering[l];
      ComplexMatrix A = data.R[ul][uk].matrix();
      double interference = 0.0;
      for (int j = k + 1; j < K; ++j) {
        const int uj = data.ordering[j];
        A -= gamma * data.R[ul][uj].matrix();
        interference += std::norm(data.b[ul][uj]);
      }
      const double rhs = gamma * (interference + sigma2) - std::norm(data.b[ul][uk]);
      rows.push_back({A / sigma2, rhs / sigma2});
    }
  }
  return rows;
}

}  // namespace

const char* to_string(PhaseStatus s) {
  switch (s) {
    case PhaseStatus::Success: return "Success";
    case PhaseStatus::Infeasible: return "Infeasible";
    case PhaseStatus::RankNotAchieved: return "RankNotAchieved";
    case PhaseStatus::ExtractionInfeasible: return "ExtractionInfeasible";
    case PhaseStatus::RandomizationFailed: return "RandomizationFailed";
    case PhaseStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

PhaseProblemData build_phase_data(const ChannelSet& ch, const BeamformerSet& bf) {
  const int K = ch.K();
  check_ordering(bf.ordering, K);
  if (static_cast<int>(bf.w.size()) != K) throw ValidationError("build_phase_data: need K beamformers");
  PhaseProblemData d;
  d.N = ch.N();
  d.ordering = bf.ordering;
  d.a.assign(K, std::vector<ComplexVector>(K));
  d.b.assign(K, std::vector<Complex>(K));
  d.R.assign(K, std::vector<HermitianMatrix>(K));
  const Eigen::Index N = d.N;
  for (int k = 0; k < K; ++k) {
    if (bf.w[k].size() != ch.G.cols()) throw ValidationError("build_phase_data: dimension mismatch");
    const ComplexVector gw = ch.G * bf.w[k];
    for (int l = 0; l < K; ++l) {
      const ComplexVector a = ch.h_r[l].conjugate().cwiseProduct(gw);
      const Complex b = ch.h_d[l].dot(bf.w[k]);
      ComplexMatrix R = ComplexMatrix::Zero(N + 1, N + 1);
      R.topLeftCorner(N, N) = a * a.adjoint();
      R.topRightCorner(N, 1) = a * std::conj(b);
      R.bottomLeftCorner(1, N) = b * a.adjoint();
      d.a[l][k] = a;
      d.b[l][k] = b;
      d.R[l][k] = HermitianMatrix::from_symmetrized(R);
    }
  }
  return d;
}

ComplexVector lift_phases(const PhaseShiftVector& v) {
  ComplexVector x(v.size() + 1);
  x.head(v.size()) = v.values().conjugate();
  x(v.size()) = 1.0;
  return x;
}

PhaseShiftVector unlift_phases(const ComplexVector& x) {
  const Eigen::Index N = x.size() - 1;
  if (N < 0) throw ValidationError("unlift_phases: empty vector");
  const Complex last = x(N);
  if (std::abs(last) == 0.0) throw ValidationError("unlift_phases: last entry is zero");
  return PhaseShiftVector::project((x.head(N) / last).conjugate());
}

LiftedPhase LiftedPhase::from_matrix(HermitianMatrix V) {
  LiftedPhase lp;
  lp.penalty = nuclear_minus_spectral(V);
  lp.V = std::move(V);
  return lp;
}

LiftedPhase LiftedPhase::from_phases(const PhaseShiftVector& v) {
  return from_matrix(HermitianMatrix::outer(lift_phases(v)));
}

conic::ConicProblem build_phase_feasibility(const PhaseProblemData& data,
                                            const ScenarioConfig& config) {
  conic::ConicProblem p;
  const auto n = static_cast<std::size_t>(data.N + 1);
  const auto blk = p.add_block(n);
  for (std::size_t i = 0; i < n; ++i) p.pin_diagonal(blk, i, 1.0);
  int idx = 0;
  for (auto& row : phase_rows(data, config)) {
    p.add_constraint({{{blk, std::move(row.A)}}, conic::Sense::GreaterEqual, row.rhs,
                      "phase sinr " + std::to_string(idx++)});
  }
  return p;
}

FeasibilityReport phase_feasible(const PhaseProblemData& data, const PhaseShiftVector& v,
                                 const ScenarioConfig& config, double slack_tol) {
  const int K = data.K();
  const ComplexVector x = v.values().conjugate();
  // Received amplitudes amp[l][k] = x^H a_lk + b_lk.
  std::vector<std::vector<double>> g(K, std::vector<double>(K));
  for (int l = 0; l < K; ++l) {
    for (int k = 0; k < K; ++k) {
      const Complex amp = (data.N > 0 ? x.dot(data.a[l][k]) : Complex(0.0)) + data.b[l][k];
      g[l][k] = std::norm(amp);
    }
  }
  const double sigma2 = config.noise_power_mw();
  FeasibilityReport rep;
  rep.feasible = true;
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    const double gamma = config.gamma_min(data.ordering[k]);
    if (gamma <= 0.0) continue;
    for (int l = k; l < K; ++l) {
      const int ul = data.ordering[l];
      double interference = 0.0;
      for (int j = k + 1; j < K; ++j) interference += g[ul][data.ordering[j]];
      const double ratio = g[ul][data.ordering[k]] / (interference + sigma2) / gamma;
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

PhaseResult solve_phase_dc(const PhaseProblemData& data, const ScenarioConfig& config,
                           const std::optional<LiftedPhase>& init) {
  PhaseResult res;
  res.trace.eta = config.eta;
  const int N = data.N;
  if (N == 0) {
    res.v = PhaseShiftVector(ComplexVector(0));
    const bool ok = phase_feasible(data, res.v, config, kFeasibleSlack).feasible;
    res.status = ok ? PhaseStatus::Success : PhaseStatus::Infeasible;
    res.lifted = LiftedPhase::from_phases(res.v);
    res.trace.objective = {0.0};
    res.trace.penalty = {0.0};
    res.trace.converged = ok;
    return res;
  }
  const conic::ConicProblem base = build_phase_feasibility(data, config);

  LiftedPhase current;
  if (init) {
    if (init->V.dim() != N + 1) throw ValidationError("solve_phase_dc: init has wrong dimension");
    current = *init;
  } else {
    const conic::ConicSolution relax = conic::solve(base);
    if (relax.status == conic::SolveStatus::Infeasible) {
      res.status = PhaseStatus::Infeasible;
      res.detail = "relaxed phase problem is infeasible";
      return res;
    }
    if (!relax.optimal()) {
      res.status = PhaseStatus::NumericalFailure;
      res.detail = std::string("relaxation: ") + conic::to_string(relax.status) + " " +
                   relax.diagnostics;
      return res;
    }
    current = LiftedPhase::from_matrix(relax.blocks[0]);
  }
  // Tr V is pinned, so the DC objective Tr V - ||V||_2 equals the penalty.
  res.trace.objective.push_back(current.penalty);
  res.trace.penalty.push_back(current.penalty);

  const double tol = config.rank_tol * static_cast<double>(N + 1);
  const ComplexMatrix I = ComplexMatrix::Identity(N + 1, N + 1);
  for (int r = 1; r <= config.max_inner_iters; ++r) {
    conic::ConicProblem p = base;
    const ComplexMatrix subgrad =
        spectral_subgradient(current.V).matrix() + config.eta * current.V.matrix();
    p.set_linear_cost(0, I - subgrad);
    if (config.eta > 0.0) p.set_quadratic_weight(0, config.eta);
    const conic::ConicSolution sol = conic::solve(p);
    if (!sol.optimal()) {
      res.status = sol.status == conic::SolveStatus::Infeasible ? PhaseStatus::Infeasible
                                                                 : PhaseStatus::NumericalFailure;
      res.detail = std::string("DC subproblem ") + std::to_string(r) + ": " +
                   conic::to_string(sol.status) + " " + sol.diagnostics;
      res.lifted = current;
      return res;
    }
    LiftedPhase next = LiftedPhase::from_matrix(sol.blocks[0]);
    res.trace.step_sq.push_back((next.V.matrix() - current.V.matrix()).squaredNorm());
    current = std::move(next);
    res.trace.objective.push_back(current.penalty);
    res.trace.penalty.push_back(current.penalty);
    res.trace.iterations = r;
    if (current.penalty <= tol) {
      res.trace.converged = true;
      break;
    }
  }
  res.lifted = current;
  if (!res.trace.converged) {
    res.status = PhaseStatus::RankNotAchieved;
    std::ostringstream os;
    os << "rank penalty " << current.penalty << " after " << res.trace.iterations << " iterations";
    res.detail = os.str();
    return res;
  }
  const EigenDecomposition ed = hermitian_eig(current.V);
  const double s1 = std::abs(ed.eigenvalues(0));
  const ComplexVector x =
      extract_rank_one(current.V, std::min(1.0, std::max(config.rank_tol, current.penalty / s1)));
  res.v = unlift_phases(x);
  const FeasibilityReport rep = phase_feasible(data, res.v, config, kFeasibleSlack);
  if (!rep.feasible) {
    res.status = PhaseStatus::ExtractionInfeasible;
    std::ostringstream os;
    os << "extracted phases violate SINR at (k=" << rep.worst_k << ", l=" << rep.worst_l
       << "), ratio " << rep.worst_ratio;
    res.detail = os.str();
    return res;
  }
  res.status = PhaseStatus::Success;
  return res;
}

PhaseResult solve_phase_sdr(const PhaseProblemData& data, const ScenarioConfig& config,
                            int n_randomizations, const RngStream& stream) {
  PhaseResult res;
  const int N = data.N;
  if (N == 0) {
    res = solve_phase_dc(data, config);
    res.exact = res.ok();
    return res;
  }
  const conic::ConicSolution relax = conic::solve(build_phase_feasibility(data, config));
  if (relax.status == conic::SolveStatus::Infeasible) {
    res.status = PhaseStatus::Infeasible;
    res.detail = "relaxed phase problem is infeasible";
    return res;
  }
  if (!relax.optimal()) {
    res.status = PhaseStatus::NumericalFailure;
    res.detail = std::string(conic::to_string(relax.status)) + " " + relax.diagnostics;
    return res;
  }
  const HermitianMatrix& V = relax.blocks[0];
  res.lifted = LiftedPhase::from_matrix(V);
  try {
    const PhaseShiftVector v = unlift_phases(extract_rank_one(V, config.rank_tol));
    if (phase_feasible(data, v, config, kFeasibleSlack).feasible) {
      res.status = PhaseStatus::Success;
      res.exact = true;
      res.v = v;
      return res;
    }
  } catch (const RankToleranceExceeded&) {
  }
  auto rng = stream.engine();
  for (int t = 0; t < n_randomizations; ++t) {
    const ComplexVector xi = gaussian_candidate(V, rng);
    if (std::abs(xi(N)) == 0.0) continue;
    const PhaseShiftVector v = unlift_phases(xi);
    if (phase_feasible(data, v, config, kFeasibleSlack).feasible) {
      res.status = PhaseStatus::Success;
      res.v = v;
      return res;
    }
  }
  res.status = PhaseStatus::RandomizationFailed;
  res.detail = "no randomized candidate satisfied the SINR constraints";
  return res;
}

PhaseShiftVector random_phase(int N, const RngStream& stream) {
  if (N < 0) throw ValidationError("random_phase: N must be >= 0");
  auto rng = stream.engine();
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  RealVector theta(N);
  for (int n = 0; n < N; ++n) theta(n) = u(rng);
  return PhaseShiftVector::from_angles(theta);
}

PhaseShiftVector quantize_phases(const PhaseShiftVector& v, int bits) {
  if (bits < 1 || bits > 30) throw ValidationError("quantize_phases: bits must lie in [1, 30]");
  const long levels = 1L << bits;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(levels);
  const RealVector theta = v.angles();
  RealVector q(theta.size());
  for (Eigen::Index n = 0; n < theta.size(); ++n) {
    const double t = theta(n) / step;
    long i = static_cast<long>(std::floor(t));
    const double frac = t - static_cast<double>(i);
    long idx = i;
    if (frac > 0.5) {
      idx = i + 1;
    } else if (frac == 0.5 && i + 1 == levels) {
      idx = 0;  // the upper neighbour wraps to angle 0, which is smaller
    }
    q(n) = step * static_cast<double>(((idx % levels) + levels) % levels);
  }
  return PhaseShiftVector::from_angles(q);
}

}  // namespace risnoma
