#pragma once

#include "fracpm/solvers/problem.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fracpm::solvers
{

enum class SolverKind
{
  GNM,
  IRM,
  GNM_RM,
};

enum class Status
{
  Converged,
  NC,   ///< iteration cap of one nonlinear system reached
  Div,  ///< residual blow-up, non-finite values or a failed linear solve
  NCO,  ///< IRM outer cap reached
};

std::string to_string( SolverKind kind );
std::string to_string( Status status );
/// Accepts "GNM", "IRM", "GNM_RM" and "GNM-RM" (case-insensitive).
std::optional<SolverKind> parse_solver_kind( std::string const & text );

struct SolverConfig
{
  SolverKind kind = SolverKind::GNM;
  /// Augmentation parameter in internal units (GPa/m for the default mass scale).
  double c = 1.0;
  double tol = 1e-8;
  int max_inner = 100;
  double div_threshold = 1e5;
  int max_outer = 150;

  void validate() const;
};

struct SolveReport
{
  Status status = Status::NC;
  int total_linear_solves = 0;
  int outer_iterations = 0;
  /// One entry per linear solve: scaled residual norm after the update.
  std::vector<double> residual_history;
  std::vector<double> increment_history;
  std::vector<Census> state_census;
  double wall_time = 0.0;
  int clamps = 0;
  std::string message;

  bool converged() const { return status == Status::Converged; }
};

/// Direct sparse LU solve of A dx = b with row/column equilibration.
/// Throws NumericalError when the factorization fails or the backward error exceeds 1e-10.
Vector linear_solve( SparseMatrix const & A, Vector const & b );

/// Project every contact cell of x onto the friction cone (return map, cell-wise).
void project_tractions( NonlinearProblem const & problem, Vector & x );

/// GNM, IRM and GNM with return map. The state is updated in place and may be passed on to another solver.
SolveReport gnm_solve( NonlinearProblem const & problem, Vector & x, SolverConfig const & cfg );
SolveReport irm_solve( NonlinearProblem const & problem, Vector & x, SolverConfig const & cfg );
SolveReport gnmrm_solve( NonlinearProblem const & problem, Vector & x, SolverConfig const & cfg );
SolveReport solve( NonlinearProblem const & problem, Vector & x, SolverConfig const & cfg );

} // namespace fracpm::solvers
