#include "doctest.h"

#include "support/state_checks.hpp"

#include "fracpm/cli/runner.hpp"

using namespace fracpm;
using namespace fracpm::cli;
using solvers::SolverKind;

namespace
{

std::string bundled( std::string const & name )
{
  return std::string( FRACPM_SCENARIO_DIR ) + "/" + name + ".toml";
}

struct Swept
{
  Scenario scenario;
  mdgeom::MdMesh mesh;
  SweepResult result;
};

Swept sweep( std::string const & name )
{
  Scenario sc = load_scenario( bundled( name ) );
  mdgeom::MdMesh mesh = build_mesh( sc );
  SweepResult res = execute( sc, mesh );
  return { std::move( sc ), std::move( mesh ), std::move( res ) };
}

Swept const & single_fracture()
{
  static Swept const s = sweep( "single_fracture_2d" );
  return s;
}

Swept const & stick_dominant()
{
  static Swept const s = sweep( "stick_dominant_2d" );
  return s;
}

assembly::PoromechanicsModel model_for( Swept const & s, RunPoint const & p )
{
  return assembly::PoromechanicsModel( s.mesh, setup_for( s.scenario, s.mesh, p ) );
}

} // namespace

TEST_CASE( "single fracture: GNM converged states do not depend on c" )
{
  auto const & s = single_fracture();
  std::vector<RunOutcome const *> gnm;
  for( auto const & r : s.result.runs )
  {
    if( r.point.solver == SolverKind::GNM )
    {
      CAPTURE( r.point.c );
      CHECK( r.converged() );
      gnm.push_back( &r );
    }
  }
  REQUIRE( gnm.size() == 3 );
  auto const model = model_for( s, gnm[0]->point );
  for( std::size_t i = 0; i < gnm.size(); ++i )
  {
    for( std::size_t j = i + 1; j < gnm.size(); ++j )
    {
      auto const d = oracle::relative_difference( model, gnm[i]->state, gnm[j]->state );
      CAPTURE( gnm[i]->point.c );
      CAPTURE( gnm[j]->point.c );
      CHECK( d.pressure < 1e-6 );
      CHECK( d.displacement < 1e-6 );
      CHECK( d.traction < 1e-6 );
    }
  }
}

TEST_CASE( "single fracture: solvers agree where they converge" )
{
  auto const & s = single_fracture();
  std::map<SolverKind, int> converged;
  RunOutcome const * ref = nullptr;
  for( auto const & r : s.result.runs )
  {
    if( !r.converged() )
    {
      continue;
    }
    ++converged[r.point.solver];
    if( !ref )
    {
      ref = &r;
      continue;
    }
    auto const d = oracle::relative_difference( model_for( s, r.point ), ref->state, r.state );
    CAPTURE( r.point.run_id );
    CHECK( d.max() < 1e-6 );
  }
  CHECK( converged[SolverKind::GNM] > 0 );
  CHECK( converged[SolverKind::IRM] > 0 );
  CHECK( converged[SolverKind::GNM_RM] > 0 );
}

TEST_CASE( "converged runs satisfy the physical contact conditions" )
{
  for( auto const * s : { &single_fracture(), &stick_dominant() } )
  {
    bool const strict = s == &single_fracture();
    for( auto const & r : s->result.runs )
    {
      if( !r.converged() )
      {
        continue;
      }
      CAPTURE( s->scenario.name );
      CAPTURE( r.point.run_id );
      auto const v = oracle::physical_contact_violation( model_for( *s, r.point ), r.state, r.previous );
      // A closed cell contributes -c d to the exact residual, so only d < tol / c is implied.
      double const bound = strict ? 1e-8 : s->scenario.solver.tol * std::max( 1.0, 1.0 / r.point.c );
      CHECK( v.cells > 0 );
      CHECK( v.nonpenetration < bound );
      CHECK( v.friction < bound );
      CHECK( r.residuals.back() < s->scenario.solver.tol );
      CHECK( r.increments.back() < s->scenario.solver.tol );
    }
  }
}

TEST_CASE( "IRM needs fewer outer iterations for larger c on a stick-dominant problem" )
{
  auto const & s = stick_dominant();
  std::map<double, RunOutcome const *> by_c;
  for( auto const & r : s.result.runs )
  {
    by_c[r.point.c] = &r;
    CHECK( r.final_census.open == 0 );
  }
  REQUIRE( by_c.count( 0.1 ) );
  REQUIRE( by_c.count( 10.0 ) );
  CHECK( by_c[0.1]->converged() );
  CHECK( by_c[10.0]->converged() );
  CHECK( by_c[0.1]->outer_iterations >= by_c[10.0]->outer_iterations );
  // Stick everywhere.
  CHECK( by_c[10.0]->final_census.slip == 0 );
}

TEST_CASE( "mechanical initialization closes every fracture cell" )
{
  for( auto const * name : { "single_fracture_2d", "stick_dominant_2d", "network_2d" } )
  {
    CAPTURE( name );
    auto const sc = load_scenario( bundled( name ) );
    auto const mesh = build_mesh( sc );
    for( double psi : sc.sweep.dilation )
    {
      auto const init = initialize_scenario( sc, mesh, psi );
      CHECK( init.init.report.converged() );
      CHECK( init.census.open == 0 );
      CHECK( init.census.unreachable == 0 );
      CHECK( init.census.stick + init.census.slip > 0 );
    }
  }
}

TEST_CASE( "bookkeeping of the sweep reports" )
{
  for( auto const * s : { &single_fracture(), &stick_dominant() } )
  {
    auto const grid = run_grid( s->scenario );
    REQUIRE( s->result.runs.size() == grid.size() );
    for( std::size_t i = 0; i < grid.size(); ++i )
    {
      auto const & r = s->result.runs[i];
      CHECK( r.point.run_id == grid[i].run_id );
      CHECK( r.total_linear_solves == static_cast< int >( r.residuals.size() ) );
      CHECK( r.census.size() == r.residuals.size() );
      CHECK( ( r.point.solver == SolverKind::IRM ) == ( r.outer_iterations > 0 ) );
    }
  }
}
