#include "fracpm/solvers/solvers.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>

namespace fracpm::solvers
{

double scaled_norm( Vector const & v, Vector const & weights )
{
  return std::sqrt( ( weights.array() * v.array().square() ).sum() );
}

std::string to_string( SolverKind kind )
{
  switch( kind )
  {
    case SolverKind::GNM: return "GNM";
    case SolverKind::IRM: return "IRM";
    case SolverKind::GNM_RM: return "GNM_RM";
  }
  return "?";
}

std::string to_string( Status status )
{
  switch( status )
  {
    case Status::Converged: return "Converged";
    case Status::NC: return "NC";
    case Status::Div: return "Div";
    case Status::NCO: return "NCO";
  }
  return "?";
}

std::optional<SolverKind> parse_solver_kind( std::string const & text )
{
  std::string t;
  for( char ch : text )
  {
    t += ch == '-' ? '_' : static_cast< char >( std::toupper( static_cast< unsigned char >( ch ) ) );
  }
  if( t == "GNM" )
  {
    return SolverKind::GNM;
  }
  if( t == "IRM" )
  {
    return SolverKind::IRM;
  }
  if( t == "GNM_RM" )
  {
    return SolverKind::GNM_RM;
  }
  return std::nullopt;
}

void SolverConfig::validate() const
{
  if( !( c > 0.0 ) || !std::isfinite( c ) )
  {
    throw ValidationError( "augmentation parameter c must be positive" );
  }
  if( !( tol > 0.0 ) )
  {
    throw ValidationError( "tolerance must be positive" );
  }
  if( max_inner < 1 || max_outer < 1 )
  {
    throw ValidationError( "iteration caps must be at least 1" );
  }
  if( !( div_threshold > 0.0 ) )
  {
    throw ValidationError( "divergence threshold must be positive" );
  }
}

Vector linear_solve( SparseMatrix const & A, Vector const & b )
{
  if( A.rows() != A.cols() || A.rows() != b.size() )
  {
    throw NumericalError( "linear system is not square" );
  }
  Index const n = A.rows();
  if( n == 0 )
  {
    return Vector();
  }
  double const bmax = b.cwiseAbs().maxCoeff();
  if( !std::isfinite( bmax ) )
  {
    throw NumericalError( "non-finite right-hand side" );
  }
  if( bmax == 0.0 )
  {
    return Vector::Zero( n );
  }

  // Equilibrate rows, then columns, by their largest entries.
  Vector row( n );
  Vector col = Vector::Zero( n );
  for( Index i = 0; i < n; ++i )
  {
    double m = 0.0;
    for( SparseMatrix::InnerIterator it( A, i ); it; ++it )
    {
      m = std::max( m, std::abs( it.value() ) );
    }
    if( m == 0.0 || !std::isfinite( m ) )
    {
      throw NumericalError( "singular matrix: empty or non-finite row " + std::to_string( i ) );
    }
    row[i] = 1.0 / m;
  }
  for( Index i = 0; i < n; ++i )
  {
    for( SparseMatrix::InnerIterator it( A, i ); it; ++it )
    {
      col[it.col()] = std::max( col[it.col()], std::abs( it.value() ) * row[i] );
    }
  }
  for( Index j = 0; j < n; ++j )
  {
    if( col[j] == 0.0 )
    {
      throw NumericalError( "singular matrix: empty column " + std::to_string( j ) );
    }
    col[j] = 1.0 / col[j];
  }
  Eigen::SparseMatrix<double> S = row.asDiagonal() * A * col.asDiagonal();
  S.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern( S );
  lu.factorize( S );
  if( lu.info() != Eigen::Success )
  {
    throw NumericalError( "sparse LU factorization failed: " + lu.lastErrorMessage() );
  }
  Vector const rb = row.asDiagonal() * b;
  Vector y = lu.solve( rb );
  // One step of iterative refinement.
  Vector r = rb - S * y;
  y += lu.solve( r );
  r = rb - S * y;
  double const norm_s = [&] {
    double m = 0.0;
    for( Index k = 0; k < S.outerSize(); ++k )
    {
      for( Eigen::SparseMatrix<double>::InnerIterator it( S, k ); it; ++it )
      {
        m = std::max( m, std::abs( it.value() ) );
      }
    }
    return m;
  }();
  double const backward = r.cwiseAbs().maxCoeff() / ( norm_s * y.cwiseAbs().maxCoeff() + rb.cwiseAbs().maxCoeff() );
  if( !std::isfinite( backward ) || backward > 1e-10 )
  {
    throw NumericalError( "linear solve is inaccurate (backward error " + std::to_string( backward ) + ")" );
  }
  return col.asDiagonal() * y;
}

void project_tractions( NonlinearProblem const & problem, Vector & x )
{
  for( auto const & cc : problem.contact_cells() )
  {
    auto const t = contact::return_map<1>( x[cc.lambda_n], { x[cc.lambda_tau] }, cc.friction );
    x[cc.lambda_n] = t.normal;
    x[cc.lambda_tau] = t.tangential[0];
  }
}

namespace
{

using Clock = std::chrono::steady_clock;

ContactClosure exact_closure( double c )
{
  ContactClosure cl;
  cl.kind = ContactClosure::Kind::Exact;
  cl.c = c;
  return cl;
}

bool finite( Vector const & v )
{
  return v.allFinite();
}

/// Newton on one closed system. Records every linear solve in the report.
/// With `project` set, the trial state is checked and then projected onto the friction cone.
Status newton( NonlinearProblem const & problem,
               Vector & x,
               ContactClosure const & closure,
               SolverConfig const & cfg,
               bool project,
               SolveReport & report )
{
  Vector const & w = problem.norm_weights();
  Evaluation ev;
  try
  {
    ev = problem.evaluate( x, closure, true );
  }
  catch( NumericalError const & e )
  {
    report.message = e.what();
    return Status::Div;
  }
  report.clamps += ev.clamps;
  for( int it = 0; it < cfg.max_inner; ++it )
  {
    Vector dx;
    try
    {
      if( !finite( ev.residual ) )
      {
        throw NumericalError( "non-finite residual" );
      }
      dx = linear_solve( ev.jacobian, -ev.residual );
    }
    catch( NumericalError const & e )
    {
      report.message = e.what();
      return Status::Div;
    }
    x += dx;
    ++report.total_linear_solves;
    double res = 0.0;
    try
    {
      ev = problem.evaluate( x, closure, true );
      report.clamps += ev.clamps;
      res = finite( ev.residual ) ? scaled_norm( ev.residual, w ) : std::numeric_limits<double>::infinity();
    }
    catch( NumericalError const & e )
    {
      report.message = e.what();
      res = std::numeric_limits<double>::infinity();
    }
    double const inc = scaled_norm( dx, w );
    report.residual_history.push_back( res );
    report.increment_history.push_back( inc );
    report.state_census.push_back( std::isfinite( res ) ? problem.census( x, closure ) : Census{} );
    if( !std::isfinite( res ) || res > cfg.div_threshold || !std::isfinite( inc ) )
    {
      if( report.message.empty() )
      {
        report.message = "residual norm " + std::to_string( res ) + " exceeds the divergence threshold";
      }
      return Status::Div;
    }
    if( res < cfg.tol && inc < cfg.tol )
    {
      return Status::Converged;
    }
    if( project )
    {
      Vector const before = x;
      project_tractions( problem, x );
      if( x != before )
      {
        try
        {
          ev = problem.evaluate( x, closure, true );
          report.clamps += ev.clamps;
        }
        catch( NumericalError const & e )
        {
          report.message = e.what();
          return Status::Div;
        }
      }
    }
  }
  report.message = "no convergence within " + std::to_string( cfg.max_inner ) + " iterations";
  return Status::NC;
}

template< typename F >
SolveReport timed( F && body )
{
  auto const start = Clock::now();
  SolveReport report = body();
  report.wall_time = std::chrono::duration<double>( Clock::now() - start ).count();
  return report;
}

} // namespace

SolveReport gnm_solve( NonlinearProblem const & problem, Vector & x, SolverConfig const & cfg )
{
  cfg.validate();
  return timed( [&] {
    SolveReport report;
    report.status = newton( problem, x, exact_closure( cfg.c ), cfg, false, report );
    return report;
  } );
}

SolveReport gnmrm_solve( NonlinearProblem const & problem, Vector & x, SolverConfig const & cfg )
{
  cfg.validate();
  return timed( [&] {
    SolveReport report;
    report.status = newton( problem, x, exact_closure( cfg.c ), cfg, true, report );
    return report;
  } );
}

SolveReport irm_solve( NonlinearProblem const & problem, Vector & x, SolverConfig const & cfg )
{
  cfg.validate();
  return timed( [&] {
    SolveReport report;
    Vector const & w = problem.norm_weights();
    auto const & cells = problem.contact_cells();
    project_tractions( problem, x );
    ContactClosure closure;
    closure.kind = ContactClosure::Kind::Regularized;
    closure.c = cfg.c;
    ContactClosure const exact = exact_closure( cfg.c );
    for( int k = 0; k < cfg.max_outer; ++k )
    {
      closure.anchor.clear();
      for( auto const & cc : cells )
      {
        closure.anchor.push_back( { x[cc.lambda_n], { x[cc.lambda_tau] } } );
      }
      Vector const start = x;
      ++report.outer_iterations;
      Status const inner = newton( problem, x, closure, cfg, false, report );
      if( inner != Status::Converged )
      {
        report.status = inner;
        return report;
      }
      // Outer check on the exact system and the outer increment.
      double res = 0.0;
      try
      {
        auto const ev = problem.evaluate( x, exact, false );
        res = finite( ev.residual ) ? scaled_norm( ev.residual, w ) : std::numeric_limits<double>::infinity();
      }
      catch( NumericalError const & e )
      {
        report.message = e.what();
        report.status = Status::Div;
        return report;
      }
      double const inc = scaled_norm( x - start, w );
      if( res < cfg.tol && inc < cfg.tol )
      {
        report.status = Status::Converged;
        report.message.clear();
        return report;
      }
      if( !std::isfinite( res ) || res > cfg.div_threshold )
      {
        report.message = "outer residual norm " + std::to_string( res ) + " exceeds the divergence threshold";
        report.status = Status::Div;
        return report;
      }
      project_tractions( problem, x );
    }
    report.message = "no outer convergence within " + std::to_string( cfg.max_outer ) + " iterations";
    report.status = Status::NCO;
    return report;
  } );
}

SolveReport solve( NonlinearProblem const & problem, Vector & x, SolverConfig const & cfg )
{
  switch( cfg.kind )
  {
    case SolverKind::GNM: return gnm_solve( problem, x, cfg );
    case SolverKind::IRM: return irm_solve( problem, x, cfg );
    case SolverKind::GNM_RM: return gnmrm_solve( problem, x, cfg );
  }
  throw Error( "unknown solver kind" );
}

} // namespace fracpm::solvers
