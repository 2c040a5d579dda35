#pragma once

#include "fracpm/assembly/model.hpp"
#include "fracpm/solvers/solvers.hpp"

#include <optional>
#include <vector>

namespace fracpm::solvers
{

struct Initialization
{
  Vector state;
  SolveReport report;
};

/**
 * Purely mechanical initialization: pressure frozen at the background value, no well,
 * mechanics and contact solved by GNM. The result is both the initial guess and the
 * previous-step snapshot of the first time step. Throws NumericalError if GNM fails.
 * Starts from the model's initial state unless `start` is given.
 */
Initialization initialize( assembly::PoromechanicsModel & model,
                           SolverConfig const & cfg,
                           Vector const * start = nullptr );

/// Implicit Euler steps with the model's well. Each step uses the state it starts from as the previous
/// snapshot, which stays in place afterwards so contact states of the final step can be
/// classified. Stops after the first non-converged step.
std::vector<SolveReport> time_loop( assembly::PoromechanicsModel & model,
                                    Vector & state,
                                    SolverConfig const & cfg,
                                    int num_steps );

} // namespace fracpm::solvers
