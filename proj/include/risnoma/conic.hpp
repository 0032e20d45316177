#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "risnoma/numerics.hpp"

namespace risnoma::conic {

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Term {
  std::size_t block;
  ComplexMatrix coeff;  // Hermitian, block dim x block dim
};

/// sum_b Re Tr(A_b^H X_b)  (sense)  rhs
struct Constraint {
  std::vector<Term> terms;
  Sense sense = Sense::GreaterEqual;
  double rhs = 0.0;
  std::string label;
};

struct DiagonalPin {
  std::size_t index;
  double value;
};

struct Block {
  std::size_t dim = 0;
  ComplexMatrix cost;             // C_b, Hermitian
  double quadratic_weight = 0.0;  // q_b, adds q_b/2 ||X_b||_F^2
  std::vector<DiagonalPin> pins;
};

/// Declarative convex problem over Hermitian PSD blocks:
///
///   minimize   sum_b Re Tr(C_b^H X_b) + q_b/2 ||X_b||_F^2
///   subject to linear trace constraints, diagonal pins, X_b >= 0.
class ConicProblem {
 public:
  std::size_t add_block(std::size_t dim);
  void set_linear_cost(std::size_t block, ComplexMatrix cost);
  void set_quadratic_weight(std::size_t block, double weight);
  void pin_diagonal(std::size_t block, std::size_t index, double value);
  void add_constraint(Constraint c);

  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  const std::vector<Constraint>& constraints() const noexcept { return constraints_; }

  /// Throws ValidationError on dimension mismatch, non-Hermitian coefficients,
  /// non-finite data, or out-of-range pins.
  void validate() const;

  double evaluate_objective(const std::vector<HermitianMatrix>& x) const;
  /// Signed violation of every constraint and pin (0 when satisfied).
  double primal_violation(const std::vector<HermitianMatrix>& x) const;

  /// Same constraints with zero objective.
  ConicProblem without_objective() const;

 private:
  void check_block(std::size_t block) const;

  std::vector<Block> blocks_;
  std::vector<Constraint> constraints_;
};

enum class SolveStatus { Optimal, Infeasible, MaxIters, NumericalFailure };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double tolerance = 1e-10;  // relative primal/dual/gap target
  int max_iterations = 120;
  double step_fraction = 0.98;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<HermitianMatrix> blocks;
  double objective = 0.0;
  double primal_residual = 0.0;  // absolute, original units
  double dual_residual = 0.0;    // relative, scaled problem
  double psd_violation = 0.0;    // max(0, -lambda_min) over blocks
  double complementarity_gap = 0.0;
  int iterations = 0;
  std::string diagnostics;

  bool optimal() const noexcept { return status == SolveStatus::Optimal; }
};

ConicSolution solve(const ConicProblem& problem, const SolverOptions& options = {});

/// Solves the zero-objective version; true iff the status is Optimal.
bool feasibility_probe(const ConicProblem& problem, const SolverOptions& options = {});

/// Writes the problem as JSON for offline inspection.
void write_debug_dump(const ConicProblem& problem, const std::filesystem::path& path);
std::string debug_dump(const ConicProblem& problem);

}  // namespace risnoma::conic
