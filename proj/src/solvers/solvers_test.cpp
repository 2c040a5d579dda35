#include "doctest.h"

#include "support/toy_problems.hpp"

#include "fracpm/solvers/driver.hpp"
#include "fracpm/solvers/solvers.hpp"

#include <cmath>

using namespace fracpm;
using namespace fracpm::solvers;
using fracpm::toy::ScalarProblem;
using fracpm::toy::SpringWall;

namespace
{

bool feasible( Vector const & x, double F )
{
  return x[2] <= 0.0 && std::abs( x[3] ) <= -F * x[2] * ( 1.0 + 1e-14 );
}

void check_bookkeeping( SolveReport const & r )
{
  CHECK( r.total_linear_solves == static_cast< int >( r.residual_history.size() ) );
  CHECK( r.increment_history.size() == r.residual_history.size() );
  CHECK( r.state_census.size() == r.residual_history.size() );
}

} // namespace

TEST_CASE( "scaled norm" )
{
  CHECK( scaled_norm( Vector::Zero( 3 ), Vector::Ones( 3 ) ) == 0.0 );
  Vector v = Vector::Constant( 1, -3.0 );
  CHECK( scaled_norm( v, Vector::Constant( 1, 4.0 ) ) == doctest::Approx( 6.0 ) );
  Vector w( 3 );
  w << 0.5, 2.0, 7.0;
  Vector u( 3 );
  u << 1.0, -2.0, 0.25;
  CHECK( scaled_norm( u, 2.0 * w ) == doctest::Approx( std::sqrt( 2.0 ) * scaled_norm( u, w ) ).epsilon( 1e-15 ) );
}

TEST_CASE( "linear solve" )
{
  SUBCASE( "identity" )
  {
    SparseMatrix I( 3, 3 );
    I.setIdentity();
    Vector b( 3 );
    b << 1.0, -2.0, 3.5;
    CHECK( ( linear_solve( I, b ) - b ).norm() == 0.0 );
  }
  SUBCASE( "2x2 by hand" )
  {
    // [2 1; 1 3] x = [3; 5]: det 5, x = (9 - 5, 10 - 3) / 5.
    SparseMatrix A( 2, 2 );
    A.insert( 0, 0 ) = 2.0;
    A.insert( 0, 1 ) = 1.0;
    A.insert( 1, 0 ) = 1.0;
    A.insert( 1, 1 ) = 3.0;
    Vector b( 2 );
    b << 3.0, 5.0;
    Vector const x = linear_solve( A, b );
    CHECK( x[0] == doctest::Approx( 0.8 ).epsilon( 1e-15 ) );
    CHECK( x[1] == doctest::Approx( 1.4 ).epsilon( 1e-15 ) );
  }
  SUBCASE( "badly scaled rows" )
  {
    SparseMatrix A( 2, 2 );
    A.insert( 0, 0 ) = 1e12;
    A.insert( 0, 1 ) = 1e12;
    A.insert( 1, 0 ) = 1e-9;
    A.insert( 1, 1 ) = -1e-9;
    Vector b( 2 );
    b << 2e12, 0.0;
    Vector const x = linear_solve( A, b );
    CHECK( x[0] == doctest::Approx( 1.0 ).epsilon( 1e-14 ) );
    CHECK( x[1] == doctest::Approx( 1.0 ).epsilon( 1e-14 ) );
  }
  SUBCASE( "singular" )
  {
    SparseMatrix A( 2, 2 );
    A.insert( 0, 0 ) = 1.0;
    A.insert( 0, 1 ) = 1.0;
    A.insert( 1, 0 ) = 1.0;
    A.insert( 1, 1 ) = 1.0;
    CHECK_THROWS_AS( linear_solve( A, Vector::Ones( 2 ) ), NumericalError );
    SparseMatrix Z( 2, 2 );
    Z.insert( 0, 0 ) = 1.0;
    CHECK_THROWS_AS( linear_solve( Z, Vector::Ones( 2 ) ), NumericalError );
  }
}

TEST_CASE( "solver config validation" )
{
  SolverConfig cfg;
  CHECK_NOTHROW( cfg.validate() );
  cfg.c = 0.0;
  CHECK_THROWS_AS( cfg.validate(), ValidationError );
  cfg = {};
  cfg.max_inner = 0;
  CHECK_THROWS_AS( cfg.validate(), ValidationError );
  cfg = {};
  cfg.tol = -1.0;
  CHECK_THROWS_AS( cfg.validate(), ValidationError );
  CHECK( parse_solver_kind( "gnm-rm" ) == SolverKind::GNM_RM );
  CHECK( parse_solver_kind( "IRM" ) == SolverKind::IRM );
  CHECK_FALSE( parse_solver_kind( "newton" ).has_value() );
}

TEST_CASE( "NC exactly at the inner cap" )
{
  // Newton on sign(x) sqrt|x| maps x to -x forever.
  ScalarProblem const prob( []( double x ) { return std::copysign( std::sqrt( std::abs( x ) ), x ); },
                            []( double x ) { return 0.5 / std::sqrt( std::abs( x ) ); } );
  for( auto kind : { SolverKind::GNM, SolverKind::GNM_RM } )
  {
    Vector x = Vector::Ones( 1 );
    SolverConfig cfg;
    cfg.kind = kind;
    auto const r = solve( prob, x, cfg );
    CHECK( r.status == Status::NC );
    CHECK( r.total_linear_solves == 100 );
    check_bookkeeping( r );
    cfg.max_inner = 7;
    x = Vector::Ones( 1 );
    CHECK( solve( prob, x, cfg ).total_linear_solves == 7 );
  }
}

TEST_CASE( "Div exactly when the residual first exceeds the threshold" )
{
  // Newton on cbrt(x) maps x to -2x, so the residual after k steps is 2^(k/3).
  ScalarProblem const prob( []( double x ) { return std::cbrt( x ); },
                            []( double x ) { return 1.0 / ( 3.0 * std::cbrt( x ) * std::cbrt( x ) ); } );
  int expected = 1;
  while( std::pow( 2.0, expected / 3.0 ) <= 1e5 )
  {
    ++expected;
  }
  Vector x = Vector::Ones( 1 );
  auto const r = gnm_solve( prob, x, {} );
  CHECK( r.status == Status::Div );
  CHECK( r.total_linear_solves == expected );
  REQUIRE( r.residual_history.size() >= 2 );
  CHECK( r.residual_history.back() > 1e5 );
  CHECK( r.residual_history[r.residual_history.size() - 2] <= 1e5 );
  check_bookkeeping( r );

  SolverConfig low;
  low.div_threshold = 10.0;
  x = Vector::Ones( 1 );
  CHECK( gnm_solve( prob, x, low ).total_linear_solves == 10 );
}

TEST_CASE( "failed linear solve is reported as Div" )
{
  ScalarProblem const prob( []( double x ) { return x * x + 1.0; }, []( double ) { return 0.0; } );
  Vector x = Vector::Ones( 1 );
  auto const r = gnm_solve( prob, x, {} );
  CHECK( r.status == Status::Div );
  CHECK_FALSE( r.message.empty() );
  check_bookkeeping( r );
}

TEST_CASE( "spring on a wall: all solvers find the root" )
{
  for( double T : { 0.3, 2.0, -2.0 } )
  {
    SpringWall const prob( 1.0, 1.0, T, 0.5 );
    for( auto kind : { SolverKind::GNM, SolverKind::IRM, SolverKind::GNM_RM } )
    {
      for( double c : { 0.5, 1.0, 10.0 } )
      {
        CAPTURE( T );
        CAPTURE( to_string( kind ) );
        CAPTURE( c );
        Vector x = Vector::Zero( 4 );
        SolverConfig cfg;
        cfg.kind = kind;
        cfg.c = c;
        auto const r = solve( prob, x, cfg );
        REQUIRE( r.status == Status::Converged );
        CHECK( ( x - prob.root() ).cwiseAbs().maxCoeff() < 10 * cfg.tol );
        CHECK( r.residual_history.back() < cfg.tol );
        CHECK( r.increment_history.back() < cfg.tol );
        CHECK( ( kind == SolverKind::IRM ) == ( r.outer_iterations > 0 ) );
        check_bookkeeping( r );
      }
    }
  }
}

TEST_CASE( "start at the root" )
{
  SpringWall const prob( 1.0, 1.0, 2.0, 0.5 );
  for( auto kind : { SolverKind::GNM, SolverKind::IRM, SolverKind::GNM_RM } )
  {
    Vector x = prob.root();
    SolverConfig cfg;
    cfg.kind = kind;
    auto const r = solve( prob, x, cfg );
    CHECK( r.status == Status::Converged );
    CHECK( r.total_linear_solves <= 1 );
    CHECK( r.increment_history.back() == 0.0 );
    CHECK( x == prob.root() );
    if( kind == SolverKind::IRM )
    {
      CHECK( r.outer_iterations == 1 );
    }
  }
}

TEST_CASE( "GNM-RM keeps tractions feasible after every non-final iteration" )
{
  SpringWall const prob( 1.0, 1.0, 3.0, 0.5 );
  SolverConfig cfg;
  cfg.kind = SolverKind::GNM_RM;
  cfg.c = 10.0;
  Vector x = Vector::Zero( 4 );
  auto const full = solve( prob, x, cfg );
  REQUIRE( full.status == Status::Converged );
  for( int cap = 1; cap < full.total_linear_solves; ++cap )
  {
    cfg.max_inner = cap;
    Vector y = Vector::Zero( 4 );
    y[3] = 5.0;
    y[2] = 1.0;
    auto const r = solve( prob, y, cfg );
    if( r.status == Status::NC )
    {
      CHECK( feasible( y, 0.5 ) );
    }
  }
}

TEST_CASE( "IRM outer cap" )
{
  // The regularized normal update contracts the error by k / (k + c) per outer iteration.
  SpringWall const prob( 1.0, 1.0, 0.0, 0.5 );
  SolverConfig cfg;
  cfg.kind = SolverKind::IRM;
  cfg.c = 1e-3;
  Vector x = Vector::Zero( 4 );
  auto const r = solve( prob, x, cfg );
  CHECK( r.status == Status::NCO );
  CHECK( r.outer_iterations == 150 );
  check_bookkeeping( r );

  cfg.c = 1.0;
  cfg.max_outer = 1;
  x = Vector::Zero( 4 );
  auto const one = solve( prob, x, cfg );
  CHECK( one.status == Status::NCO );
  CHECK( one.outer_iterations == 1 );

  cfg.max_outer = 150;
  cfg.c = 1.0;
  x = Vector::Zero( 4 );
  auto const ok = solve( prob, x, cfg );
  CHECK( ok.status == Status::Converged );
  CHECK( ok.outer_iterations < r.outer_iterations );
}

TEST_CASE( "IRM outer iterations fall as c grows" )
{
  SpringWall const prob( 1.0, 1.0, 0.2, 0.5 );
  int prev = 1 << 30;
  for( double c : { 0.2, 1.0, 10.0 } )
  {
    SolverConfig cfg;
    cfg.kind = SolverKind::IRM;
    cfg.c = c;
    Vector x = Vector::Zero( 4 );
    auto const r = solve( prob, x, cfg );
    REQUIRE( r.status == Status::Converged );
    CHECK( r.outer_iterations <= prev );
    prev = r.outer_iterations;
  }
}

TEST_CASE( "warm start from another solver" )
{
  SpringWall const prob( 1.0, 1.0, 3.0, 0.5 );
  SolverConfig cfg;
  cfg.max_inner = 1;
  Vector x = Vector::Zero( 4 );
  CHECK( gnm_solve( prob, x, cfg ).status == Status::NC );
  cfg.max_inner = 100;
  cfg.kind = SolverKind::GNM_RM;
  auto const r = solve( prob, x, cfg );
  CHECK( r.status == Status::Converged );
  CHECK( ( x - prob.root() ).cwiseAbs().maxCoeff() < 1e-10 );
}

TEST_CASE( "reports are deterministic" )
{
  SpringWall const prob( 1.0, 1.0, 3.0, 0.5 );
  SolverConfig cfg;
  cfg.kind = SolverKind::IRM;
  cfg.c = 0.5;
  Vector a = Vector::Zero( 4 );
  Vector b = Vector::Zero( 4 );
  auto const ra = solve( prob, a, cfg );
  auto const rb = solve( prob, b, cfg );
  CHECK( ra.residual_history == rb.residual_history );
  CHECK( ra.increment_history == rb.increment_history );
  CHECK( a == b );
}

// ---------------------------------------------------------------------------------------
// Driver on the poromechanics model

namespace
{

using namespace fracpm::assembly;

mdgeom::MdMesh small_mesh()
{
  mdgeom::FractureNetwork net{ { { 40, 40 }, { 120, 40 } } };
  return mdgeom::build_structured_mesh( { 160, 80 }, net, 20.0 );
}

ModelSetup confined_setup( double confinement )
{
  ModelSetup s;
  double const p = s.background_pressure;
  double const total = -( s.material.biot_coefficient * p + confinement );
  s.bc.background_stress = { total, total, 0.0 };
  for( auto tag : { "bottom", "right", "top", "left" } )
  {
    s.bc.flow[tag] = { FlowBoundary::Kind::Pressure, p };
    s.bc.mechanics[tag] = { MechanicsBoundary::Kind::Stress, {} };
  }
  s.bc.mechanics["left"] = { MechanicsBoundary::Kind::Roller, {} };
  s.bc.mechanics["bottom"] = { MechanicsBoundary::Kind::Roller, {} };
  return s;
}

} // namespace

TEST_CASE( "initialization reproduces the uniform confined state" )
{
  auto const mesh = small_mesh();
  double const s = 10e6;
  ModelSetup const setup = confined_setup( s );
  PoromechanicsModel model( mesh, setup );
  auto const & prm = model.params();
  SolverConfig cfg;
  cfg.c = 0.1;
  auto const init = initialize( model, cfg );
  REQUIRE( init.report.converged() );
  Vector const & x = init.state;

  // Effective stress -s I from a uniform isotropic strain.
  double const eps = -prm.stress( s ) / ( 2.0 * ( prm.lame_lambda + prm.shear_modulus ) );
  auto const & d = model.dofs();
  auto const & mech = mesh.mechanics();
  double err = 0.0;
  for( Index n = 0; n < mech.num_nodes(); ++n )
  {
    Vec2 const q = mesh.nodes()[static_cast< std::size_t >( mech.node_origin[static_cast< std::size_t >( n )] )];
    err = std::max( err, std::abs( x[d.node( n, 0 )] - eps * q.x ) );
    err = std::max( err, std::abs( x[d.node( n, 1 )] - eps * q.y ) );
  }
  CHECK( err < 1e-10 * std::abs( eps ) * 160.0 );

  double const p = prm.stress( setup.background_pressure );
  double const lambda_n = -( prm.alpha * p + prm.stress( s ) ) + p;
  for( auto const & k : model.kinematics( x, 0 ) )
  {
    CHECK( k.lambda_n == doctest::Approx( lambda_n ).epsilon( 1e-9 ) );
    CHECK( std::abs( k.lambda_tau ) < 1e-9 * std::abs( lambda_n ) );
    CHECK( std::abs( k.jump_n ) < 1e-12 );
  }
  auto const census = init.report.state_census.back();
  CHECK( census.open == 0 );
  CHECK( census.stick == mesh.subdomain( 1 ).num_cells() );
  CHECK( model.previous() == x );
}

TEST_CASE( "initialization is idempotent" )
{
  auto const mesh = small_mesh();
  ModelSetup setup = confined_setup( 10e6 );
  setup.bc.background_stress = { -30e6, -50e6, 5e6 };
  setup.bc.mechanics["top"] = { MechanicsBoundary::Kind::Stress, {} };
  setup.bc.mechanics["bottom"] = { MechanicsBoundary::Kind::Fixed, {} };
  setup.bc.mechanics["left"] = { MechanicsBoundary::Kind::Stress, {} };
  PoromechanicsModel model( mesh, setup );
  SolverConfig cfg;
  cfg.c = 0.1;
  auto const first = initialize( model, cfg );
  REQUIRE( first.report.converged() );
  auto const again = initialize( model, cfg, &first.state );
  CHECK( again.report.converged() );
  CHECK( again.report.total_linear_solves <= 1 );
  CHECK( ( again.state - first.state ).cwiseAbs().maxCoeff() < 1e-12 );
  CHECK( first.report.state_census.back().open == 0 );
}

TEST_CASE( "stick-only mechanics is linear" )
{
  auto const mesh = small_mesh();
  ModelSetup setup = confined_setup( 10e6 );
  setup.bc.background_stress = { -30e6, -50e6, 5e6 };
  setup.bc.mechanics["top"] = { MechanicsBoundary::Kind::Stress, {} };
  setup.bc.mechanics["right"] = { MechanicsBoundary::Kind::Stress, {} };
  setup.material.friction_coefficient = 1e3;
  PoromechanicsModel model( mesh, setup );
  SolverConfig cfg;
  auto const init = initialize( model, cfg );
  REQUIRE( init.report.converged() );
  REQUIRE( init.report.state_census.back().stick == mesh.subdomain( 1 ).num_cells() );

  // Load increment with the contact states unchanged: one Newton step is exact.
  ModelSetup more = setup;
  for( double & v : more.bc.background_stress )
  {
    v *= 1.2;
  }
  more.mechanics_only = true;
  PoromechanicsModel loaded( mesh, more );
  loaded.set_previous( init.state );
  Vector x = init.state;
  auto const r = gnm_solve( loaded, x, cfg );
  CHECK( r.status == Status::Converged );
  CHECK( r.total_linear_solves <= 2 );
}

TEST_CASE( "time loop" )
{
  auto const mesh = small_mesh();
  ModelSetup setup = confined_setup( 10e6 );
  setup.well = Well{ 1, 1, setup.background_pressure + 1e6 };
  PoromechanicsModel model( mesh, setup );
  SolverConfig cfg;
  cfg.c = 0.1;
  auto const init = initialize( model, cfg );
  REQUIRE( model.setup().well.has_value() );
  CHECK_FALSE( model.setup().mechanics_only );

  Vector x = init.state;
  CHECK( time_loop( model, x, cfg, 0 ).empty() );
  CHECK( x == init.state );

  auto const one = time_loop( model, x, cfg, 1 );
  REQUIRE( one.size() == 1 );
  REQUIRE( one[0].converged() );
  CHECK( model.previous() == init.state );
  Vector const after_one = x;
  auto const two = time_loop( model, x, cfg, 1 );
  REQUIRE( two.size() == 1 );
  CHECK( two[0].converged() );
  CHECK( model.previous() == after_one );

  // Pressure rises towards the well over consecutive steps.
  Index const cell = model.dofs().pressure( 1, 0 );
  CHECK( x[cell] > after_one[cell] );
  CHECK( after_one[cell] > init.state[cell] );

  SolverConfig capped = cfg;
  capped.max_inner = 1;
  Vector y = init.state;
  auto const stopped = time_loop( model, y, capped, 3 );
  CHECK( stopped.size() == 1 );
  CHECK( stopped[0].status == Status::NC );
}
