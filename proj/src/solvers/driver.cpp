#include "fracpm/solvers/driver.hpp"

namespace fracpm::solvers
{

Initialization initialize( assembly::PoromechanicsModel & model, SolverConfig const & cfg, Vector const * start )
{
  auto const well = model.setup().well;
  bool const mech_only = model.setup().mechanics_only;
  model.set_well( std::nullopt );
  model.set_mechanics_only( true );
  Initialization out;
  out.state = start ? *start : model.initial_state();
  model.set_previous( start ? *start : model.initial_state() );
  SolverConfig init = cfg;
  init.kind = SolverKind::GNM;
  out.report = gnm_solve( model, out.state, init );
  model.set_well( well );
  model.set_mechanics_only( mech_only );
  if( !out.report.converged() )
  {
    throw NumericalError( "mechanical initialization did not converge (" + to_string( out.report.status ) + ": " +
                          out.report.message + ")" );
  }
  model.set_previous( out.state );
  return out;
}

std::vector<SolveReport> time_loop( assembly::PoromechanicsModel & model,
                                    Vector & state,
                                    SolverConfig const & cfg,
                                    int num_steps )
{
  std::vector<SolveReport> reports;
  for( int step = 0; step < num_steps; ++step )
  {
    model.set_previous( state );
    reports.push_back( solve( model, state, cfg ) );
    if( !reports.back().converged() )
    {
      break;
    }
  }
  return reports;
}

} // namespace fracpm::solvers
