#include "risnoma/conic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

namespace risnoma::conic {

namespace {

constexpr double kCertificateTol = 1e-8;
constexpr double kContractPrimal = 1e-7;
constexpr double kContractGap = 1e-6;
constexpr double kAcceptTol = 1e-8;

// Standard form used by the interior-point loop:
//   minimize sum_j <C_j, X_j> + q_j/2 ||X_j||^2  s.t.  A(X) = b,  X_j >= 0.
// Inequalities carry their own 1x1 slack block; every row is normalized.
struct StandardForm {
  std::vector<Eigen::Index> dim;
  std::vector<ComplexMatrix> cost;
  std::vector<double> quad;
  RealVector rhs;
  // entries[j]: rows touching block j with their coefficient matrix.
  std::vector<std::vector<std::pair<Eigen::Index, ComplexMatrix>>> entries;
  std::size_t user_blocks = 0;
  double objective_scale = 1.0;
  bool constant_row_violated = false;
  std::string constant_row_label;
};

StandardForm lower(const ConicProblem& p) {
  StandardForm sf;
  const auto& blocks = p.blocks();
  sf.user_blocks = blocks.size();
  double cmax = 0.0;
  for (const Block& b : blocks) {
    cmax = std::max({cmax, b.cost.norm(), b.quadratic_weight});
  }
  sf.objective_scale = std::max(1.0, cmax);
  for (const Block& b : blocks) {
    sf.dim.push_back(static_cast<Eigen::Index>(b.dim));
    sf.cost.push_back(b.cost / sf.objective_scale);
    sf.quad.push_back(b.quadratic_weight / sf.objective_scale);
  }
  sf.entries.resize(blocks.size());

  std::vector<double> rhs;
  auto add_row = [&](const std::vector<std::pair<std::size_t, ComplexMatrix>>& terms,
                     double value) {
    const auto row = static_cast<Eigen::Index>(rhs.size());
    for (const auto& [block, coeff] : terms) sf.entries[block].emplace_back(row, coeff);
    rhs.push_back(value);
    return row;
  };

  for (const Constraint& c : p.constraints()) {
    // Merge repeated blocks, then normalize the row.
    std::vector<std::pair<std::size_t, ComplexMatrix>> merged;
    for (const Term& t : c.terms) {
      auto it = std::find_if(merged.begin(), merged.end(),
                             [&](const auto& e) { return e.first == t.block; });
      if (it == merged.end()) {
        merged.emplace_back(t.block, t.coeff);
      } else {
        it->second += t.coeff;
      }
    }
    double norm2 = 0.0;
    for (const auto& e : merged) norm2 += e.second.squaredNorm();
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) {
      const double tol = 1e-12 * (1.0 + std::abs(c.rhs));
      const bool ok = (c.sense == Sense::LessEqual && 0.0 <= c.rhs + tol) ||
                      (c.sense == Sense::GreaterEqual && 0.0 >= c.rhs - tol) ||
                      (c.sense == Sense::Equal && std::abs(c.rhs) <= tol);
      if (!ok) {
        sf.constant_row_violated = true;
        sf.constant_row_label = c.label;
      }
      continue;
    }
    for (auto& e : merged) e.second /= norm;
    if (c.sense != Sense::Equal) {
      const std::size_t slack = sf.dim.size();
      sf.dim.push_back(1);
      sf.cost.push_back(ComplexMatrix::Zero(1, 1));
      sf.quad.push_back(0.0);
      sf.entries.emplace_back();
      const double sign = c.sense == Sense::LessEqual ? 1.0 : -1.0;
      merged.emplace_back(slack, ComplexMatrix::Constant(1, 1, Complex(sign, 0.0)));
    }
    add_row(merged, c.rhs / norm);
  }

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto n = static_cast<Eigen::Index>(blocks[b].dim);
    for (const DiagonalPin& pin : blocks[b].pins) {
      ComplexMatrix e = ComplexMatrix::Zero(n, n);
      e(static_cast<Eigen::Index>(pin.index), static_cast<Eigen::Index>(pin.index)) = 1.0;
      add_row({{b, std::move(e)}}, pin.value);
    }
  }
  sf.rhs = Eigen::Map<RealVector>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  return sf;
}

ComplexMatrix hermitize(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

// Per-block Nesterov-Todd scaling at the current iterate. With W = G G^H:
//   G^{-1} X G^{-H} = G^H Z G = diag(s),   W Z W = X.
// The Newton operator (I + q W(.)W)^{-1} W(.)W is diagonal in W's eigenbasis.
struct BlockScaling {
  ComplexMatrix g, g_inv;
  RealVector s;
  ComplexMatrix q;        // eigenvectors of W
  RealMatrix lw, p, k;    // omega_a omega_b, 1/(1 + quad omega_a omega_b), lw .* p
  std::vector<ComplexMatrix> b;  // Q^H A_i Q for each entry
};

bool compute_scaling(const ComplexMatrix& x, const ComplexMatrix& z, double quad,
                     const std::vector<std::pair<Eigen::Index, ComplexMatrix>>& entries,
                     BlockScaling& out) {
  Eigen::LLT<ComplexMatrix> lx(x), lz(z);
  if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
  const ComplexMatrix Lx = lx.matrixL();
  const ComplexMatrix Lz = lz.matrixL();
  Eigen::JacobiSVD<ComplexMatrix> svd(Lz.adjoint() * Lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.s = svd.singularValues();
  if (out.s.minCoeff() <= 0.0 || !out.s.allFinite()) return false;
  const RealVector is = out.s.cwiseSqrt().cwiseInverse();
  out.g = Lx * svd.matrixV() * is.asDiagonal();
  out.g_inv = is.asDiagonal() * svd.matrixU().adjoint() * Lz.adjoint();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(out.g * out.g.adjoint()));
  if (es.info() != Eigen::Success) return false;
  out.q = es.eigenvectors();
  const RealVector omega = es.eigenvalues().cwiseMax(0.0);
  out.lw = omega * omega.transpose();
  out.p = (1.0 + quad * out.lw.array()).inverse().matrix();
  out.k = out.lw.cwiseProduct(out.p);
  out.b.clear();
  out.b.reserve(entries.size());
  for (const auto& e : entries) out.b.push_back(out.q.adjoint() * e.second * out.q);
  return true;
}

// Largest alpha with S + alpha * D >= 0 (S = diag(s) > 0), +inf when unbounded.
double max_step(const RealVector& s, const ComplexMatrix& d_scaled) {
  const RealVector is = s.cwiseSqrt().cwiseInverse();
  const ComplexMatrix h = is.asDiagonal() * d_scaled * is.asDiagonal();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(h), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double max_eigenvalue(const ComplexMatrix& m) {
  if (m.rows() == 1) return m(0, 0).real();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(m.rows() - 1);
}

double min_eigenvalue(const ComplexMatrix& m) {
  if (m.rows() == 1) return m(0, 0).real();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

class InteriorPoint {
 public:
  InteriorPoint(const StandardForm& sf, const SolverOptions& opt) : sf_(sf), opt_(opt) {
    nblocks_ = sf_.dim.size();
    m_ = sf_.rhs.size();
    total_dim_ = 0;
    for (auto n : sf_.dim) total_dim_ += static_cast<double>(n);
    for (double q : sf_.quad) has_quad_ = has_quad_ || q > 0.0;
    initial_point();
  }

  struct Outcome {
    SolveStatus status = SolveStatus::NumericalFailure;
    int iterations = 0;
    double rel_primal = 0.0, rel_dual = 0.0, rel_gap = 0.0, gap = 0.0;
    std::string diagnostics;
  };

  Outcome run();
  const std::vector<ComplexMatrix>& x() const { return x_; }
  /// max(rel_primal, rel_dual, rel_gap) of the returned iterate.
  double merit() const { return best_.merit; }

 private:
  void initial_point();
  RealVector apply_a(const std::vector<ComplexMatrix>& x) const;
  ComplexMatrix apply_at(std::size_t j, const RealVector& y) const;
  void newton(const std::vector<ComplexMatrix>& target, std::vector<ComplexMatrix>& dx,
              RealVector& dy, std::vector<ComplexMatrix>& dz) const;
  bool primal_infeasible() const;
  bool dual_infeasible() const;

  // Abnormal exits fall back to the most accurate iterate seen.
  Outcome finish_best(Outcome out) {
    if (best_.x.empty()) return out;
    x_ = best_.x;
    z_ = best_.z;
    y_ = best_.y;
    Outcome b = best_.outcome;
    b.status = out.status;
    b.iterations = out.iterations;
    b.diagnostics = out.diagnostics;
    return b;
  }

  struct Snapshot {
    double merit = std::numeric_limits<double>::infinity();
    std::vector<ComplexMatrix> x, z;
    RealVector y;
    Outcome outcome;
  } best_;

  const StandardForm& sf_;
  SolverOptions opt_;
  std::size_t nblocks_ = 0;
  Eigen::Index m_ = 0;
  double total_dim_ = 0.0;
  bool has_quad_ = false;

  std::vector<ComplexMatrix> x_, z_;
  RealVector y_;
  std::vector<ComplexMatrix> rd_;
  RealVector rp_;
  std::vector<BlockScaling> sc_;
  // Schur complement, its Jacobi scaling and factorization.
  RealMatrix schur_;
  RealVector schur_scale_;
  Eigen::LDLT<RealMatrix> schur_ldlt_;

  RealVector solve_schur(const RealVector& r) const;
  bool factor_schur();
};

void InteriorPoint::initial_point() {
  x_.resize(nblocks_);
  z_.resize(nblocks_);
  y_ = RealVector::Zero(m_);
  for (std::size_t j = 0; j < nblocks_; ++j) {
    const Eigen::Index n = sf_.dim[j];
    const double rn = std::sqrt(static_cast<double>(n));
    double xi = std::max(10.0, rn), zeta = std::max({10.0, rn, sf_.cost[j].norm()});
    for (const auto& [row, a] : sf_.entries[j]) {
      const double an = a.norm();
      xi = std::max(xi, static_cast<double>(n) * (1.0 + std::abs(sf_.rhs(row))) / (1.0 + an));
      zeta = std::max(zeta, an);
    }
    zeta = std::max(zeta, sf_.quad[j] * xi);
    x_[j] = xi * ComplexMatrix::Identity(n, n);
    z_[j] = zeta * ComplexMatrix::Identity(n, n);
  }
}

RealVector InteriorPoint::apply_a(const std::vector<ComplexMatrix>& x) const {
  RealVector out = RealVector::Zero(m_);
  for (std::size_t j = 0; j < nblocks_; ++j) {
    for (const auto& [row, a] : sf_.entries[j]) out(row) += inner(a, x[j]);
  }
  return out;
}

ComplexMatrix InteriorPoint::apply_at(std::size_t j, const RealVector& y) const {
  ComplexMatrix out = ComplexMatrix::Zero(sf_.dim[j], sf_.dim[j]);
  for (const auto& [row, a] : sf_.entries[j]) out += y(row) * a;
  return out;
}

void InteriorPoint::newton(const std::vector<ComplexMatrix>& target, std::vector<ComplexMatrix>& dx,
                           RealVector& dy, std::vector<ComplexMatrix>& dz) const {
  std::vector<ComplexMatrix> t(nblocks_);
  RealVector ry = rp_;
  for (std::size_t j = 0; j < nblocks_; ++j) {
    const BlockScaling& s = sc_[j];
    const ComplexMatrix rhat = s.q.adjoint() * target[j] * s.q;
    const ComplexMatrix rdhat = s.q.adjoint() * rd_[j] * s.q;
    t[j] = (rhat - s.lw.cast<Complex>().cwiseProduct(rdhat)).cwiseProduct(s.p.cast<Complex>());
    for (std::size_t e = 0; e < s.b.size(); ++e) {
      ry(sf_.entries[j][e].first) -= inner(s.b[e], t[j]);
    }
  }
  dy = solve_schur(ry);
  dx.resize(nblocks_);
  dz.resize(nblocks_);
  for (std::size_t j = 0; j < nblocks_; ++j) {
    const BlockScaling& s = sc_[j];
    ComplexMatrix sy = ComplexMatrix::Zero(sf_.dim[j], sf_.dim[j]);
    for (std::size_t e = 0; e < s.b.size(); ++e) sy += dy(sf_.entries[j][e].first) * s.b[e];
    const ComplexMatrix dxhat = t[j] + s.k.cast<Complex>().cwiseProduct(sy);
    dx[j] = hermitize(s.q * dxhat * s.q.adjoint());
    dz[j] = hermitize(rd_[j] + sf_.quad[j] * dx[j] - apply_at(j, dy));
  }
}

bool InteriorPoint::factor_schur() {
  schur_scale_ = schur_.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
  const RealMatrix scaled = schur_scale_.asDiagonal() * schur_ * schur_scale_.asDiagonal();
  schur_ldlt_.compute(scaled);
  if (schur_ldlt_.info() == Eigen::Success && schur_ldlt_.isPositive()) return true;
  // Rank-deficient rows: regularize slightly and retry.
  RealMatrix reg = scaled;
  reg.diagonal().array() += 1e-13;
  schur_ldlt_.compute(reg);
  return schur_ldlt_.info() == Eigen::Success;
}

RealVector InteriorPoint::solve_schur(const RealVector& r) const {
  if (m_ == 0) return RealVector();
  auto once = [&](const RealVector& rhs) -> RealVector {
    return schur_scale_.asDiagonal() *
           schur_ldlt_.solve(RealVector(schur_scale_.asDiagonal() * rhs));
  };
  RealVector dy = once(r);
  dy += once(r - schur_ * dy);  // one step of iterative refinement
  return dy;
}

bool InteriorPoint::primal_infeasible() const {
  const double by = sf_.rhs.dot(y_);
  if (!(by > 0.0)) return false;
  double lmax = 0.0;
  for (std::size_t j = 0; j < nblocks_; ++j) lmax = std::max(lmax, max_eigenvalue(apply_at(j, y_)));
  return lmax <= kCertificateTol * by;
}

bool InteriorPoint::dual_infeasible() const {
  if (has_quad_) return false;
  double cx = 0.0;
  for (std::size_t j = 0; j < nblocks_; ++j) cx += inner(sf_.cost[j], x_[j]);
  if (!(cx < 0.0)) return false;
  return apply_a(x_).norm() <= kCertificateTol * -cx;
}

InteriorPoint::Outcome InteriorPoint::run() {
  Outcome out;
  const double bnorm = sf_.rhs.norm();
  double cnorm = 0.0;
  for (const auto& c : sf_.cost) cnorm += c.squaredNorm();
  cnorm = std::sqrt(cnorm);

  rd_.resize(nblocks_);
  sc_.resize(nblocks_);
  int stalls = 0;
  for (int iter = 0;; ++iter) {
    out.iterations = iter;
    rp_ = sf_.rhs - apply_a(x_);
    double pobj = 0.0, quad_term = 0.0, gap = 0.0, rd2 = 0.0;
    for (std::size_t j = 0; j < nblocks_; ++j) {
      rd_[j] = hermitize(sf_.cost[j] + sf_.quad[j] * x_[j] - apply_at(j, y_) - z_[j]);
      rd2 += rd_[j].squaredNorm();
      pobj += inner(sf_.cost[j], x_[j]);
      quad_term += 0.5 * sf_.quad[j] * x_[j].squaredNorm();
      gap += inner(x_[j], z_[j]);
    }
    pobj += quad_term;
    const double dobj = sf_.rhs.dot(y_) - quad_term;
    const double mu = gap / total_dim_;
    out.gap = gap;
    out.rel_primal = rp_.norm() / (1.0 + bnorm);
    out.rel_dual = std::sqrt(rd2) / (1.0 + cnorm);
    out.rel_gap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double merit = std::max({out.rel_primal, out.rel_dual, out.rel_gap});
    if (merit < best_.merit) {
      best_.merit = merit;
      best_.x = x_;
      best_.z = z_;
      best_.y = y_;
      best_.outcome = out;
    }
    if (out.rel_primal <= opt_.tolerance && out.rel_dual <= opt_.tolerance &&
        out.rel_gap <= opt_.tolerance) {
      out.status = SolveStatus::Optimal;
      return out;
    }
    if (primal_infeasible()) {
      out.status = SolveStatus::Infeasible;
      out.diagnostics = "primal infeasibility certificate found";
      return out;
    }
    if (dual_infeasible()) {
      out.status = SolveStatus::NumericalFailure;
      out.diagnostics = "dual infeasibility (unbounded objective) detected";
      return finish_best(out);
    }
    if (iter >= opt_.max_iterations) {
      out.status = SolveStatus::MaxIters;
      out.diagnostics = "iteration limit reached";
      return finish_best(out);
    }

    for (std::size_t j = 0; j < nblocks_; ++j) {
      if (!compute_scaling(x_[j], z_[j], sf_.quad[j], sf_.entries[j], sc_[j])) {
        out.status = SolveStatus::NumericalFailure;
        out.diagnostics = "iterate lost positive definiteness";
        return finish_best(out);
      }
    }
    RealMatrix& schur = schur_;
    schur.setZero(m_, m_);
    for (std::size_t j = 0; j < nblocks_; ++j) {
      const BlockScaling& s = sc_[j];
      const auto& ent = sf_.entries[j];
      const ComplexMatrix kc = s.k.cast<Complex>();
      for (std::size_t e2 = 0; e2 < ent.size(); ++e2) {
        const ComplexMatrix kb = kc.cwiseProduct(s.b[e2]);
        for (std::size_t e1 = 0; e1 <= e2; ++e1) {
          const double v = inner(s.b[e1], kb);
          schur(ent[e1].first, ent[e2].first) += v;
          if (e1 != e2) schur(ent[e2].first, ent[e1].first) += v;
        }
      }
    }
    if (m_ > 0 && !factor_schur()) {
      out.status = SolveStatus::NumericalFailure;
      out.diagnostics = "Schur complement factorization failed";
      return finish_best(out);
    }

    // Predictor.
    std::vector<ComplexMatrix> target(nblocks_), dx, dz;
    RealVector dy;
    for (std::size_t j = 0; j < nblocks_; ++j) target[j] = -x_[j];
    newton(target, dx, dy, dz);
    double ap = 1.0, ad = 1.0;
    std::vector<ComplexMatrix> dxs(nblocks_), dzs(nblocks_);
    for (std::size_t j = 0; j < nblocks_; ++j) {
      const BlockScaling& s = sc_[j];
      dxs[j] = hermitize(s.g_inv * dx[j] * s.g_inv.adjoint());
      dzs[j] = hermitize(s.g.adjoint() * dz[j] * s.g);
      ap = std::min(ap, max_step(s.s, dxs[j]));
      ad = std::min(ad, max_step(s.s, dzs[j]));
    }
    if (has_quad_) ap = ad = std::min(ap, ad);
    double gap_aff = 0.0;
    for (std::size_t j = 0; j < nblocks_; ++j) {
      gap_aff += inner(x_[j] + ap * dx[j], z_[j] + ad * dz[j]);
    }
    const double ratio = std::clamp(gap_aff / gap, 0.0, 1.0);
    const double sigma = ratio * ratio * ratio;

    // Corrector in the scaled space, where the Lyapunov operator is diagonal.
    for (std::size_t j = 0; j < nblocks_; ++j) {
      const BlockScaling& s = sc_[j];
      const Eigen::Index n = sf_.dim[j];
      ComplexMatrix rhs = -hermitize(dxs[j] * dzs[j]);
      for (Eigen::Index i = 0; i < n; ++i) rhs(i, i) += sigma * mu - s.s(i) * s.s(i);
      ComplexMatrix d(n, n);
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) d(a, b) = 2.0 * rhs(a, b) / (s.s(a) + s.s(b));
      }
      target[j] = hermitize(s.g * d * s.g.adjoint());
    }
    newton(target, dx, dy, dz);
    ap = 1.0 / opt_.step_fraction;
    ad = ap;
    for (std::size_t j = 0; j < nblocks_; ++j) {
      const BlockScaling& s = sc_[j];
      ap = std::min(ap, max_step(s.s, hermitize(s.g_inv * dx[j] * s.g_inv.adjoint())));
      ad = std::min(ad, max_step(s.s, hermitize(s.g.adjoint() * dz[j] * s.g)));
    }
    ap = std::min(1.0, opt_.step_fraction * ap);
    ad = std::min(1.0, opt_.step_fraction * ad);
    if (has_quad_) ap = ad = std::min(ap, ad);
    for (std::size_t j = 0; j < nblocks_; ++j) {
      x_[j] = hermitize(x_[j] + ap * dx[j]);
      z_[j] = hermitize(z_[j] + ad * dz[j]);
    }
    y_ += ad * dy;

    if (std::max(ap, ad) < 1e-9) {
      if (++stalls >= 3) {
        out.status = SolveStatus::NumericalFailure;
        out.diagnostics = "step length stalled";
        return finish_best(out);
      }
    } else {
      stalls = 0;
    }
  }
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

std::size_t ConicProblem::add_block(std::size_t dim) {
  if (dim == 0) throw ValidationError("ConicProblem: block dimension must be positive");
  const auto n = static_cast<Eigen::Index>(dim);
  blocks_.push_back(Block{dim, ComplexMatrix::Zero(n, n), 0.0, {}});
  return blocks_.size() - 1;
}

void ConicProblem::check_block(std::size_t block) const {
  if (block >= blocks_.size()) throw ValidationError("ConicProblem: block index out of range");
}

void ConicProblem::set_linear_cost(std::size_t block, ComplexMatrix cost) {
  check_block(block);
  blocks_[block].cost = std::move(cost);
}

void ConicProblem::set_quadratic_weight(std::size_t block, double weight) {
  check_block(block);
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw ValidationError("ConicProblem: quadratic weight must be finite and nonnegative");
  }
  blocks_[block].quadratic_weight = weight;
}

void ConicProblem::pin_diagonal(std::size_t block, std::size_t index, double value) {
  check_block(block);
  if (index >= blocks_[block].dim) throw ValidationError("ConicProblem: pin index out of range");
  blocks_[block].pins.push_back({index, value});
}

void ConicProblem::add_constraint(Constraint c) { constraints_.push_back(std::move(c)); }

void ConicProblem::validate() const {
  auto check_hermitian = [](const ComplexMatrix& m, Eigen::Index n, const std::string& what) {
    if (m.rows() != n || m.cols() != n) throw ValidationError(what + ": dimension mismatch");
    (void)HermitianMatrix(m);
  };
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto n = static_cast<Eigen::Index>(blocks_[b].dim);
    check_hermitian(blocks_[b].cost, n, "cost of block " + std::to_string(b));
    for (const DiagonalPin& pin : blocks_[b].pins) {
      if (!std::isfinite(pin.value)) throw ValidationError("ConicProblem: non-finite pin value");
    }
  }
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    const Constraint& c = constraints_[i];
    if (!std::isfinite(c.rhs)) throw ValidationError("ConicProblem: non-finite rhs");
    for (const Term& t : c.terms) {
      check_block(t.block);
      check_hermitian(t.coeff, static_cast<Eigen::Index>(blocks_[t.block].dim),
                      "constraint " + std::to_string(i));
    }
  }
}

double ConicProblem::evaluate_objective(const std::vector<HermitianMatrix>& x) const {
  double obj = 0.0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    obj += inner(blocks_[b].cost, x[b].matrix()) +
           0.5 * blocks_[b].quadratic_weight * x[b].matrix().squaredNorm();
  }
  return obj;
}

double ConicProblem::primal_violation(const std::vector<HermitianMatrix>& x) const {
  double v2 = 0.0;
  for (const Constraint& c : constraints_) {
    double lhs = 0.0;
    for (const Term& t : c.terms) lhs += inner(t.coeff, x[t.block].matrix());
    double v = 0.0;
    switch (c.sense) {
      case Sense::LessEqual: v = std::max(0.0, lhs - c.rhs); break;
      case Sense::GreaterEqual: v = std::max(0.0, c.rhs - lhs); break;
      case Sense::Equal: v = lhs - c.rhs; break;
    }
    v2 += v * v;
  }
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    for (const DiagonalPin& pin : blocks_[b].pins) {
      const auto i = static_cast<Eigen::Index>(pin.index);
      const double v = x[b](i, i).real() - pin.value;
      v2 += v * v;
    }
  }
  return std::sqrt(v2);
}

ConicProblem ConicProblem::without_objective() const {
  ConicProblem p = *this;
  for (Block& b : p.blocks_) {
    b.cost.setZero();
    b.quadratic_weight = 0.0;
  }
  return p;
}

ConicSolution solve(const ConicProblem& problem, const SolverOptions& options) {
  problem.validate();
  const StandardForm sf = lower(problem);
  ConicSolution sol;
  if (sf.constant_row_violated) {
    sol.status = SolveStatus::Infeasible;
    sol.diagnostics = "constant constraint violated: " + sf.constant_row_label;
    return sol;
  }
  InteriorPoint ipm(sf, options);
  InteriorPoint::Outcome out = ipm.run();

  sol.iterations = out.iterations;
  sol.diagnostics = out.diagnostics;
  sol.dual_residual = out.rel_dual;
  sol.blocks.reserve(sf.user_blocks);
  for (std::size_t b = 0; b < sf.user_blocks; ++b) {
    sol.blocks.push_back(HermitianMatrix::from_symmetrized(ipm.x()[b]));
  }
  double rhs2 = 0.0;
  for (const Constraint& c : problem.constraints()) rhs2 += c.rhs * c.rhs;
  for (const Block& b : problem.blocks()) {
    for (const DiagonalPin& pin : b.pins) rhs2 += pin.value * pin.value;
  }
  sol.objective = problem.evaluate_objective(sol.blocks);
  sol.primal_residual = problem.primal_violation(sol.blocks);
  sol.complementarity_gap = out.gap * sf.objective_scale;
  for (const HermitianMatrix& x : sol.blocks) {
    sol.psd_violation = std::max(sol.psd_violation, -min_eigenvalue(x.matrix()));
  }

  // A stalled run counts only if its best iterate is accurate in the scaled
  // problem and also meets the residual contract in original units.
  const bool contract = sol.primal_residual <= kContractPrimal * (1.0 + std::sqrt(rhs2)) &&
                        sol.psd_violation <= kContractPrimal &&
                        sol.complementarity_gap <= kContractGap * (1.0 + std::abs(sol.objective));
  sol.status = out.status;
  if ((out.status == SolveStatus::MaxIters || out.status == SolveStatus::NumericalFailure) &&
      ipm.merit() <= kAcceptTol && contract) {
    sol.status = SolveStatus::Optimal;
  }
  if (out.status == SolveStatus::Optimal && !contract) {
    sol.status = SolveStatus::NumericalFailure;
    sol.diagnostics = "converged in scaled units but residual contract not met";
  }
  return sol;
}

bool feasibility_probe(const ConicProblem& problem, const SolverOptions& options) {
  return solve(problem.without_objective(), options).optimal();
}

std::string debug_dump(const ConicProblem& problem) {
  using nlohmann::json;
  auto mat = [](const ComplexMatrix& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json rr = json::array(), ri = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        rr.push_back(m(i, j).real());
        ri.push_back(m(i, j).imag());
      }
      re.push_back(rr);
      im.push_back(ri);
    }
    return json{{"re", re}, {"im", im}};
  };
  json j;
  j["format"] = "risnoma-conic-problem";
  j["version"] = 1;
  j["blocks"] = json::array();
  for (const Block& b : problem.blocks()) {
    json pins = json::array();
    for (const DiagonalPin& p : b.pins) pins.push_back({{"index", p.index}, {"value", p.value}});
    j["blocks"].push_back({{"dim", b.dim},
                           {"cost", mat(b.cost)},
                           {"quadratic_weight", b.quadratic_weight},
                           {"diag_fixed", pins}});
  }
  j["constraints"] = json::array();
  for (const Constraint& c : problem.constraints()) {
    json terms = json::array();
    for (const Term& t : c.terms) terms.push_back({{"block", t.block}, {"coeff", mat(t.coeff)}});
    const char* sense = c.sense == Sense::LessEqual  ? "<="
                        : c.sense == Sense::Equal    ? "=="
                                                     : ">=";
    j["constraints"].push_back(
        {{"label", c.label}, {"sense", sense}, {"rhs", c.rhs}, {"terms", terms}});
  }
  return j.dump(2);
}

void write_debug_dump(const ConicProblem& problem, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << debug_dump(problem) << '\n';
}

}  // namespace risnoma::conic
