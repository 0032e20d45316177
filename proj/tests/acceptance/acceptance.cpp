// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   acceptance            run all criteria
//   acceptance 3 5        run only criteria 3 and 5

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "risnoma/experiments.hpp"
#include "support/instances.hpp"

using namespace risnoma;
using namespace risnoma::testing;

namespace {

// Pinned tolerances.
constexpr double kMrtRelTol = 1e-4;          // 1
constexpr double kBackSubRelTol = 1e-3;      // 2
constexpr double kRankTol = 1e-6;            // 3
constexpr double kFeasSlack = 1e-5;          // 3
constexpr double kMonotoneSlack = 1e-9;      // 4 (relative to max(1, |f|))
constexpr double kIdentityRelTol = 1e-10;    // 9
constexpr double kEmbedTol = 1e-10;          // 9
constexpr double kAgreementRate = 0.9;       // 7
constexpr int kBatchTrials = 20;
constexpr std::uint64_t kMasterSeed = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::uint64_t seed_of(int trial) { return trial_seed(kMasterSeed, trial); }

ChannelSet channels_of(const ScenarioConfig& c, std::uint64_t seed) {
  return generate_channels(c, TrialStreams(seed).channels);
}

ScenarioConfig desk(int M, int N, int K) {
  ScenarioConfig c;
  c.M = M;
  c.N = N;
  c.K = K;
  return c;
}

double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? NAN : s / static_cast<double>(x.size());
}

// ---------------------------------------------------------------------------

Outcome single_user_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int n = 0;
  for (int i = 0; i < 50; ++i) {
    const ScenarioConfig c = desk(i % 2 == 0 ? 2 : 4, 0, 1);
    const std::uint64_t seed = seed_of(i);
    const RunResult r = run_trial(c, seed, OrderingScheme::Eigen, Optimizer::DC);
    if (!r.has_solution()) return {false, fmt("instance %d infeasible: %s", i, r.detail.c_str())};
    const ChannelSet ch = channels_of(c, seed);
    const double mrt = c.gamma_min(0) * c.noise_power_mw() / ch.h_d[0].squaredNorm();
    worst = std::max(worst, std::abs(r.total_power_mw - mrt) / mrt);
    ++n;
  }
  const double secs = seconds_since(t0);
  return {worst <= kMrtRelTol && secs < 30.0,
          fmt("%d instances, max rel err %.2e (tol %.0e), %.1f s (limit 30 s)", n, worst,
              kMrtRelTol, secs)};
}

// p_k = gamma_k (sum_{j>k} p_j + s2 / min_{l>=k} |h_l|^2), last position first.
std::vector<double> back_substitution(const std::vector<ComplexVector>& rows,
                                      const std::vector<int>& order, const ScenarioConfig& c) {
  const int K = static_cast<int>(order.size());
  std::vector<double> p(K, 0.0);
  double tail = 0.0;
  for (int k = K - 1; k >= 0; --k) {
    double weakest = INFINITY;
    for (int l = k; l < K; ++l) weakest = std::min(weakest, std::norm(rows[order[l]](0)));
    p[order[k]] = c.gamma_min(order[k]) * (tail + c.noise_power_mw() / weakest);
    tail += p[order[k]];
  }
  return p;
}

Outcome scalar_noma_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 30; ++i) {
    const ScenarioConfig c = desk(1, 8, 2 + i % 2);
    const TrialStreams streams(seed_of(i));
    const ChannelSet ch = generate_channels(c, streams.channels);
    const PhaseShiftVector v = random_phase(c.N, streams.initial_phases);
    const std::vector<ComplexVector> rows = combined_channels(ch, v);
    const std::vector<int> order = order_eigen(ch, c).permutation;
    const BeamformingResult r = solve_beamformers_dc(rows, order, c);
    if (!r.ok()) return {false, fmt("instance %d: %s %s", i, to_string(r.status), r.detail.c_str())};
    const std::vector<double> p = back_substitution(rows, order, c);
    for (int k = 0; k < c.K; ++k) worst = std::max(worst, std::abs(r.bf.w[k].squaredNorm() - p[k]) / p[k]);
  }
  const double secs = seconds_since(t0);
  return {worst <= kBackSubRelTol && secs < 60.0,
          fmt("30 instances, max rel err %.2e (tol %.0e), %.1f s (limit 60 s)", worst,
              kBackSubRelTol, secs)};
}

std::vector<RunResult> dc_batch(const ScenarioConfig& c) {
  std::vector<RunResult> out;
  for (int t = 0; t < kBatchTrials; ++t)
    out.push_back(run_trial(c, seed_of(t), OrderingScheme::Eigen, Optimizer::DC));
  return out;
}

Outcome rank_one_certification() {
  const ScenarioConfig c = desk(3, 8, 4);
  const auto runs = dc_batch(c);
  int converged = 0;
  double worst_w = 0.0, worst_v = 0.0, worst_feas = INFINITY;
  std::ostringstream problems;
  for (int t = 0; t < kBatchTrials; ++t) {
    const RunResult& r = runs[t];
    if (r.termination != TerminationReason::Converged) continue;
    ++converged;
    if (!r.lifted_beamformers || !r.lifted_phase) {
      problems << " trial " << t << " lacks lifted matrices;";
      continue;
    }
    double pen = 0.0, tr = 0.0;
    for (const auto& W : r.lifted_beamformers->W) {
      pen += nuclear_minus_spectral(W);
      tr += W.trace();
    }
    worst_w = std::max(worst_w, pen / std::max(1.0, tr));
    worst_v = std::max(worst_v, nuclear_minus_spectral(r.lifted_phase->V) / (c.N + 1));
    const ChannelSet ch = channels_of(c, seed_of(t));
    const FeasibilityReport f = check_feasible(ch, r.phases, r.beamformers, c, kFeasSlack);
    worst_feas = std::min(worst_feas, f.worst_ratio);
    if (!f.feasible) problems << " trial " << t << " infeasible;";
  }
  const bool pass = converged > 0 && problems.str().empty() && worst_w <= kRankTol && worst_v <= kRankTol;
  return {pass, fmt("%d/%d converged; max W ratio %.2e, max V ratio %.2e (tol %.0e); min SINR/target %.8f%s",
                    converged, kBatchTrials, worst_w, worst_v, kRankTol, worst_feas,
                    problems.str().c_str())};
}

bool trace_ok(const DcTrace& t, int& mono_fail, int& rate_fail) {
  for (std::size_t r = 1; r < t.objective.size(); ++r) {
    if (t.objective[r] > t.objective[r - 1] + kMonotoneSlack * std::max(1.0, std::abs(t.objective[r - 1]))) {
      ++mono_fail;
      return false;
    }
  }
  // eta * sum_r ||X_r - X_{r+1}||^2 <= f_0 - f_last, i.e. the average squared
  // step is bounded by (f_0 - f_last) / (eta * steps).
  if (t.eta > 0 && t.step_sq.size() > 0) {
    double sum = 0.0;
    for (double s : t.step_sq) sum += s;
    const double slack = kMonotoneSlack * std::max(1.0, std::abs(t.objective.front())) *
                         static_cast<double>(t.objective.size());
    if (t.eta * sum > t.objective.front() - t.objective.back() + slack) {
      ++rate_fail;
      return false;
    }
  }
  return true;
}

Outcome monotonicity() {
  ScenarioConfig c = desk(3, 8, 4);
  c.eta = 1e-4;
  const auto runs = dc_batch(c);
  int traces = 0, mono_fail = 0, rate_fail = 0, outer_fail = 0;
  for (const RunResult& r : runs) {
    for (const auto& t : r.beam_traces) traces += 1, trace_ok(t, mono_fail, rate_fail);
    for (const auto& t : r.phase_traces) traces += 1, trace_ok(t, mono_fail, rate_fail);
    for (std::size_t i = 1; i < r.power_trace.size(); ++i) {
      if (r.power_trace[i] > r.power_trace[i - 1] + kMonotoneSlack * std::max(1.0, r.power_trace[i - 1])) {
        ++outer_fail;
        break;
      }
    }
  }
  return {mono_fail == 0 && rate_fail == 0 && outer_fail == 0 && traces > 0,
          fmt("%d inner traces over %d trials; monotonicity violations %d, rate-bound violations %d, "
              "outer-trace violations %d",
              traces, kBatchTrials, mono_fail, rate_fail, outer_fail)};
}

Outcome method_ordering() {
  const auto t0 = Clock::now();
  const ScenarioConfig c = desk(3, 8, 4);
  std::vector<double> dc, sdr, rnd;
  int dc_conv = 0, sdr_conv = 0, unpaired = 0;
  for (int t = 0; t < kBatchTrials; ++t) {
    const RunResult a = run_trial(c, seed_of(t), OrderingScheme::Eigen, Optimizer::DC);
    const RunResult b = run_trial(c, seed_of(t), OrderingScheme::Eigen, Optimizer::SDR);
    const RunResult d = run_trial(c, seed_of(t), OrderingScheme::Eigen, Optimizer::RandomPhase);
    dc_conv += a.termination == TerminationReason::Converged;
    sdr_conv += b.termination == TerminationReason::Converged;
    if (!a.has_solution() || !b.has_solution() || !d.has_solution()) {
      ++unpaired;
      continue;
    }
    dc.push_back(a.total_power_dbm);
    sdr.push_back(b.total_power_dbm);
    rnd.push_back(d.total_power_dbm);
  }
  const double secs = seconds_since(t0);
  const double m_dc = mean(dc), m_sdr = mean(sdr), m_rnd = mean(rnd);
  const bool pass = !dc.empty() && m_dc <= m_sdr && m_sdr <= m_rnd && dc_conv >= sdr_conv && secs < 900.0;
  return {pass, fmt("paired %zu/%d; mean dBm DC %.4f, SDR %.4f, random %.4f; converged DC %d, SDR %d; "
                    "%.1f s (limit 900 s)",
                    dc.size(), kBatchTrials, m_dc, m_sdr, m_rnd, dc_conv, sdr_conv, secs)};
}

Outcome ris_benefit() {
  std::map<int, std::vector<double>> with, without;
  int unpaired = 0;
  for (int t = 0; t < kBatchTrials; ++t) {
    std::map<int, RunResult> dc, nr;
    bool ok = true;
    for (int N : {8, 16}) {
      const ScenarioConfig c = desk(3, N, 4);
      dc[N] = run_trial(c, seed_of(t), OrderingScheme::Eigen, Optimizer::DC);
      nr[N] = run_trial(c, seed_of(t), OrderingScheme::Eigen, Optimizer::NoRIS);
      ok = ok && dc[N].has_solution() && nr[N].has_solution();
    }
    if (!ok) {
      ++unpaired;
      continue;
    }
    for (int N : {8, 16}) {
      with[N].push_back(dc[N].total_power_dbm);
      without[N].push_back(nr[N].total_power_dbm);
    }
  }
  const double w8 = mean(with[8]), w16 = mean(with[16]), n8 = mean(without[8]), n16 = mean(without[16]);
  const bool pass = !with[8].empty() && w8 < n8 && w16 < n16 && w16 <= w8;
  return {pass, fmt("paired %zu/%d; mean dBm N=8: RIS %.4f vs none %.4f; N=16: RIS %.4f vs none %.4f",
                    with[8].size(), kBatchTrials, w8, n8, w16, n16)};
}

Outcome ordering_schemes() {
  const auto t0 = Clock::now();
  const ScenarioConfig c = desk(2, 8, 4);
  std::vector<double> ex, eig, dir;
  int agree = 0;
  for (int t = 0; t < kBatchTrials; ++t) {
    const std::uint64_t seed = seed_of(t);
    const ChannelSet ch = channels_of(c, seed);
    agree += order_eigen(ch, c).permutation == order_sdr(ch, c).permutation;
    const RunResult a = run_trial(c, seed, OrderingScheme::Exhaustive, Optimizer::DC);
    const RunResult b = run_trial(c, seed, OrderingScheme::Eigen, Optimizer::DC);
    const RunResult d = run_trial(c, seed, OrderingScheme::DirectLink, Optimizer::DC);
    if (!a.has_solution() || !b.has_solution() || !d.has_solution()) continue;
    ex.push_back(a.total_power_dbm);
    eig.push_back(b.total_power_dbm);
    dir.push_back(d.total_power_dbm);
  }
  const double secs = seconds_since(t0);
  const double rate = static_cast<double>(agree) / kBatchTrials;
  const double m_ex = mean(ex), m_eig = mean(eig), m_dir = mean(dir);
  const bool pass = !ex.empty() && m_ex <= m_eig && m_eig <= m_dir && rate >= kAgreementRate && secs < 2700.0;
  return {pass, fmt("paired %zu/%d; mean dBm exhaustive %.4f, eigen %.4f, direct %.4f (eigen-direct gap %.4f dB); "
                    "eigen/SDR order agreement %d/%d; %.1f s (limit 2700 s)",
                    ex.size(), kBatchTrials, m_ex, m_eig, m_dir, m_dir - m_eig, agree, kBatchTrials, secs)};
}

Outcome quantization() {
  const ScenarioConfig c = desk(3, 12, 3);
  const std::vector<std::optional<int>> levels{1, 2, 3, std::nullopt};
  std::vector<std::vector<double>> p(levels.size());
  int unpaired = 0;
  for (int t = 0; t < kBatchTrials; ++t) {
    std::vector<double> row;
    for (const auto& b : levels) {
      const RunResult r = run_trial(c, seed_of(t), OrderingScheme::Eigen, Optimizer::DC, b);
      if (!r.has_solution()) break;
      row.push_back(r.total_power_dbm);
    }
    if (row.size() != levels.size()) {
      ++unpaired;
      continue;
    }
    for (std::size_t i = 0; i < row.size(); ++i) p[i].push_back(row[i]);
  }
  const double b1 = mean(p[0]), b2 = mean(p[1]), b3 = mean(p[2]), cont = mean(p[3]);
  const bool pass = !p[0].empty() && b1 >= b2 && b2 >= b3 && b3 >= cont && (b3 - cont) <= (b1 - cont);
  return {pass, fmt("paired %zu/%d (%d with an infeasible quantized re-solve); mean dBm B=1 %.4f, B=2 %.4f, "
                    "B=3 %.4f, continuous %.4f",
                    p[0].size(), kBatchTrials, unpaired, b1, b2, b3, cont)};
}

Outcome numerics_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int prop_fail = 0, embed_fail = 0, q_fail = 0, quant_fail = 0;

  // A PSD matrix is rank one iff its nuclear and spectral norms coincide.
  // Reference: trace minus the largest eigenvalue of the real embedding.
  for (int i = 0; i < 200; ++i) {
    const int rank = 1 + i % 4;
    const HermitianMatrix W = random_psd(4, rank, rng);
    const double gap = nuclear_minus_spectral(W);
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(real_embed(W));
    const double ref = W.trace() - es.eigenvalues().maxCoeff();
    const double scale = W.trace();
    if (std::abs(gap - ref) > 1e-10 * scale) ++prop_fail;
    if ((rank == 1) != (gap <= 1e-10 * scale)) ++prop_fail;
  }

  for (int i = 0; i < 50; ++i) {
    const ComplexMatrix a = crandn(5, 5, rng);
    const HermitianMatrix A = HermitianMatrix::from_symmetrized(a + a.adjoint());
    RealVector ev = hermitian_eig(A).eigenvalues;
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(real_embed(A));
    RealVector big = es.eigenvalues();  // ascending
    std::sort(ev.data(), ev.data() + ev.size());
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      if (std::abs(big(2 * k) - ev(k)) > kEmbedTol * std::max(1.0, std::abs(ev(k))) ||
          std::abs(big(2 * k + 1) - ev(k)) > kEmbedTol * std::max(1.0, std::abs(ev(k))))
        ++embed_fail;
    }
  }

  for (int i = 0; i < 100; ++i) {
    const ChannelSet ch = random_channels(3, 8, 1, rng);
    const PhaseShiftVector v = random_unit(8, rng);
    const ComplexVector x = lift_phases(v);
    const double direct = naive_row(ch, v, 0).squaredNorm();
    const double quad = std::real(x.dot(build_Q(ch, 0).matrix() * x));
    if (std::abs(quad - direct) > kIdentityRelTol * std::max(1.0, direct)) ++q_fail;
  }

  const double pi = std::numbers::pi;
  struct Case { double theta; int bits; double expected; };
  for (const Case& cs : {Case{0.3 * pi, 1, 0.0}, Case{0.9 * pi, 1, pi}, Case{1.9 * pi, 2, 0.0},
                         Case{0.5 * pi, 1, 0.0}, Case{1.3 * pi, 2, 1.5 * pi}, Case{0.2 * pi, 3, 0.25 * pi}}) {
    RealVector t(1);
    t << cs.theta;
    const double got = quantize_phases(PhaseShiftVector::from_angles(t), cs.bits).angles()(0);
    if (std::abs(got - cs.expected) > 1e-12) ++quant_fail;
  }
  const double secs = seconds_since(t0);
  const bool pass = prop_fail + embed_fail + q_fail + quant_fail == 0 && secs < 60.0;
  return {pass, fmt("rank-one equivalence failures %d/200, embedding duplication failures %d, "
                    "Q identity failures %d/100, quantizer table failures %d/6; %.1f s (limit 60 s)",
                    prop_fail, embed_fail, q_fail, quant_fail, secs)};
}

Outcome determinism() {
  std::vector<SweepSpec> specs;
  {
    SweepSpec s = parse_config("");
    s.axis = SweepAxis::N;
    s.values = {4, 8};
    s.n_trials = 3;
    s.schemes = {SchemeSpec{Optimizer::DC, OrderingScheme::Eigen, std::nullopt},
                 SchemeSpec{Optimizer::SDR, OrderingScheme::SDR, std::nullopt},
                 SchemeSpec{Optimizer::RandomPhase, OrderingScheme::DirectLink, std::nullopt},
                 SchemeSpec{Optimizer::NoRIS, OrderingScheme::Eigen, std::nullopt}};
    s.workers = 2;
    specs.push_back(s);
  }
  {
    SweepSpec s = parse_config("scenario:\n  K: 3\n  N: 6\n");
    s.axis = SweepAxis::B;
    s.values = {1, INFINITY};
    s.n_trials = 2;
    s.schemes = {SchemeSpec{Optimizer::DC, OrderingScheme::Exhaustive, std::nullopt}};
    specs.push_back(s);
  }
  int identical = 0;
  std::size_t bytes = 0;
  for (const auto& s : specs) {
    const std::string a = to_csv(s, run_sweep(s));
    const std::string b = to_csv(s, run_sweep(s));
    identical += a == b;
    bytes += a.size();
  }
  return {identical == static_cast<int>(specs.size()),
          fmt("%d/%zu sweeps byte-identical on rerun (%zu bytes)", identical, specs.size(), bytes)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"single-user MRT oracle", single_user_oracle},
      {"scalar NOMA back-substitution oracle", scalar_noma_oracle},
      {"rank-one certification", rank_one_certification},
      {"DC monotonicity and rate bounds", monotonicity},
      {"method ordering DC <= SDR <= random", method_ordering},
      {"RIS benefit and growth in N", ris_benefit},
      {"ordering schemes", ordering_schemes},
      {"phase quantization", quantization},
      {"numerics suite", numerics_suite},
      {"sweep determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
