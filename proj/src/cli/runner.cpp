#include "fracpm/cli/runner.hpp"

#include <json.hpp>

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#ifndef FRACPM_VERSION
#define FRACPM_VERSION "0.0.0"
#endif

namespace fracpm::cli
{

using solvers::Census;
using solvers::Status;

InitRecord initialize_scenario( Scenario const & scenario, mdgeom::MdMesh const & mesh, double dilation )
{
  RunPoint p;
  p.dilation = dilation;
  assembly::ModelSetup setup = setup_for( scenario, mesh, p );
  assembly::PoromechanicsModel model( mesh, setup );
  solvers::SolverConfig cfg = scenario.solver;
  cfg.kind = solvers::SolverKind::GNM;
  cfg.c = scenario.init_c;
  InitRecord rec;
  rec.dilation = dilation;
  rec.init = solvers::initialize( model, cfg );
  solvers::ContactClosure exact;
  exact.c = scenario.init_c;
  rec.census = model.census( rec.init.state, exact );
  return rec;
}

RunOutcome execute_point( Scenario const & scenario, mdgeom::MdMesh const & mesh, RunPoint const & point, InitRecord const & init )
{
  RunOutcome out;
  out.point = point;
  assembly::PoromechanicsModel model( mesh, setup_for( scenario, mesh, point ) );
  model.set_previous( init.init.state );
  solvers::SolverConfig cfg = scenario.solver;
  cfg.kind = point.solver;
  cfg.c = point.c;
  Vector x = init.init.state;
  auto const reports = solvers::time_loop( model, x, cfg, scenario.num_steps );
  out.status = Status::Converged;
  for( auto const & r : reports )
  {
    out.total_linear_solves += r.total_linear_solves;
    out.outer_iterations += r.outer_iterations;
    out.residuals.insert( out.residuals.end(), r.residual_history.begin(), r.residual_history.end() );
    out.increments.insert( out.increments.end(), r.increment_history.begin(), r.increment_history.end() );
    out.census.insert( out.census.end(), r.state_census.begin(), r.state_census.end() );
    out.clamps += r.clamps;
    out.wall_time += r.wall_time;
    if( r.converged() )
    {
      ++out.steps_completed;
    }
    else
    {
      out.status = r.status;
      out.message = r.message;
    }
  }
  solvers::ContactClosure exact;
  exact.c = point.c;
  if( x.allFinite() )
  {
    out.final_census = model.census( x, exact );
  }
  out.state = std::move( x );
  out.previous = model.previous();
  return out;
}

SweepResult execute( Scenario const & scenario, mdgeom::MdMesh const & mesh, RunOptions const & options )
{
  SweepResult result;
  auto const grid = run_grid( scenario );
  for( double psi : scenario.sweep.dilation )
  {
    bool seen = false;
    for( auto const & r : result.inits )
    {
      seen = seen || r.dilation == psi;
    }
    if( !seen )
    {
      result.inits.push_back( initialize_scenario( scenario, mesh, psi ) );
    }
  }
  auto const init_for = [&]( double psi ) -> InitRecord const & {
    for( auto const & r : result.inits )
    {
      if( r.dilation == psi )
      {
        return r;
      }
    }
    throw Error( "missing initialization" );
  };

  result.runs.resize( grid.size() );
  std::atomic<std::size_t> next{ 0 };
  std::mutex lock;
  std::exception_ptr failure;
  auto const worker = [&] {
    while( true )
    {
      std::size_t const i = next++;
      if( i >= grid.size() )
      {
        return;
      }
      try
      {
        RunOutcome r = execute_point( scenario, mesh, grid[i], init_for( grid[i].dilation ) );
        std::lock_guard<std::mutex> g( lock );
        if( options.on_done )
        {
          options.on_done( r );
        }
        result.runs[i] = std::move( r );
      }
      catch( ... )
      {
        std::lock_guard<std::mutex> g( lock );
        if( !failure )
        {
          failure = std::current_exception();
        }
        next = grid.size();
      }
    }
  };
  int const jobs = std::max( 1, std::min<int>( options.jobs, static_cast< int >( grid.size() ) ) );
  if( jobs == 1 )
  {
    worker();
  }
  else
  {
    std::vector<std::thread> pool;
    for( int j = 0; j < jobs; ++j )
    {
      pool.emplace_back( worker );
    }
    for( auto & t : pool )
    {
      t.join();
    }
  }
  if( failure )
  {
    std::rethrow_exception( failure );
  }
  return result;
}

std::filesystem::path output_directory( Scenario const & scenario )
{
  char const * root = std::getenv( "FRACPM_OUTPUT_ROOT" );
  std::filesystem::path base = ( root && *root ) ? std::filesystem::path( root ) : std::filesystem::path( "runs" );
  return base / scenario.name;
}

void write_atomic( std::filesystem::path const & path, std::string const & content )
{
  auto const tmp = path.string() + ".tmp";
  {
    std::ofstream f( tmp, std::ios::binary | std::ios::trunc );
    if( !f )
    {
      throw Error( "cannot write '" + tmp + "'" );
    }
    f << content;
    f.close();
    if( !f )
    {
      throw Error( "failed writing '" + tmp + "'" );
    }
  }
  std::filesystem::rename( tmp, path );
}

std::string format_double( double v )
{
  char buf[64];
  auto const res = std::to_chars( buf, buf + sizeof buf, v );
  return std::string( buf, res.ptr );
}

std::string summary_csv( Scenario const & scenario, std::vector<RunOutcome> const & runs )
{
  std::string s = "run_id,scenario_hash,solver,c,psi,overpressure,status,total_linear_solves,outer_iterations,"
                  "final_residual,n_open,n_stick,n_slip\n";
  for( auto const & r : runs )
  {
    s += r.point.run_id + "," + scenario.hash + "," + solvers::to_string( r.point.solver ) + "," + format_double( r.point.c ) +
         "," + format_double( r.point.dilation ) + "," + format_double( r.point.overpressure ) + "," +
         solvers::to_string( r.status ) + "," + std::to_string( r.total_linear_solves ) + "," +
         std::to_string( r.outer_iterations ) + "," + ( r.residuals.empty() ? "" : format_double( r.residuals.back() ) ) +
         "," + std::to_string( r.final_census.open ) + "," + std::to_string( r.final_census.stick ) + "," +
         std::to_string( r.final_census.slip ) + "\n";
  }
  return s;
}

std::string residuals_csv( RunOutcome const & run )
{
  std::string s = "iteration,residual_norm,increment_norm\n";
  for( std::size_t i = 0; i < run.residuals.size(); ++i )
  {
    s += std::to_string( i + 1 ) + "," + format_double( run.residuals[i] ) + "," + format_double( run.increments[i] ) + "\n";
  }
  return s;
}

std::string states_csv( RunOutcome const & run )
{
  std::string s = "iteration,n_open,n_stick,n_slip\n";
  for( std::size_t i = 0; i < run.census.size(); ++i )
  {
    auto const & c = run.census[i];
    s += std::to_string( i + 1 ) + "," + std::to_string( c.open ) + "," + std::to_string( c.stick ) + "," +
         std::to_string( c.slip ) + "\n";
  }
  return s;
}

namespace
{

nlohmann::ordered_json to_json( Value const & v )
{
  if( v.is_string() )
  {
    return v.as_string();
  }
  if( v.is_bool() )
  {
    return v.as_bool();
  }
  if( v.is_number() )
  {
    return v.as_number();
  }
  auto arr = nlohmann::ordered_json::array();
  for( auto const & item : v.as_array() )
  {
    arr.push_back( to_json( item ) );
  }
  return arr;
}

nlohmann::ordered_json census_json( Census const & c )
{
  return { { "open", c.open }, { "stick", c.stick }, { "slip", c.slip } };
}

std::string compiler_version()
{
#if defined( __clang__ )
  return std::string( "clang " ) + __clang_version__;
#elif defined( __GNUC__ )
  return std::string( "gcc " ) + __VERSION__;
#else
  return "unknown";
#endif
}

nlohmann::ordered_json mesh_json( mdgeom::MdMesh const & mesh )
{
  Index fracture_cells = 0;
  for( Index k = 0; k < mesh.num_fractures(); ++k )
  {
    fracture_cells += mesh.subdomain( mesh.fracture_subdomain( k ) ).num_cells();
  }
  return { { "matrix_cells", mesh.matrix().num_cells() },
           { "fractures", mesh.num_fractures() },
           { "fracture_cells", fracture_cells },
           { "intersections", mesh.num_intersections() },
           { "interfaces", mesh.interfaces().size() },
           { "total_cells", mesh.total_cells() },
           { "unknowns", assembly::DofMap( mesh ).size() } };
}

} // namespace

std::string run_json( Scenario const & scenario, mdgeom::MdMesh const & mesh, SweepResult const & result, int jobs )
{
  nlohmann::ordered_json j;
  j["scenario"] = scenario.name;
  j["scenario_hash"] = scenario.hash;
  auto cfg = nlohmann::ordered_json::object();
  for( auto const & [section, table] : scenario.config.sections )
  {
    auto obj = nlohmann::ordered_json::object();
    for( auto const & [key, v] : table )
    {
      obj[key] = to_json( v );
    }
    if( section.empty() )
    {
      for( auto const & [k, v] : obj.items() )
      {
        cfg[k] = v;
      }
    }
    else
    {
      cfg[section] = obj;
    }
  }
  j["config"] = cfg;
  j["seed"] = scenario.seed ? nlohmann::ordered_json( *scenario.seed ) : nlohmann::ordered_json( nullptr );
  j["jobs"] = jobs;
  j["mesh"] = mesh_json( mesh );
  j["versions"] = { { "fracpm", FRACPM_VERSION },
                    { "eigen",
                      std::to_string( EIGEN_WORLD_VERSION ) + "." + std::to_string( EIGEN_MAJOR_VERSION ) + "." +
                        std::to_string( EIGEN_MINOR_VERSION ) },
                    { "compiler", compiler_version() } };
  auto inits = nlohmann::ordered_json::array();
  for( auto const & r : result.inits )
  {
    inits.push_back( { { "psi", r.dilation },
                       { "status", solvers::to_string( r.init.report.status ) },
                       { "total_linear_solves", r.init.report.total_linear_solves },
                       { "wall_time", r.init.report.wall_time },
                       { "census", census_json( r.census ) } } );
  }
  j["initialization"] = inits;
  auto runs = nlohmann::ordered_json::array();
  for( auto const & r : result.runs )
  {
    runs.push_back( { { "run_id", r.point.run_id },
                      { "solver", solvers::to_string( r.point.solver ) },
                      { "c", r.point.c },
                      { "psi", r.point.dilation },
                      { "overpressure", r.point.overpressure },
                      { "status", solvers::to_string( r.status ) },
                      { "total_linear_solves", r.total_linear_solves },
                      { "outer_iterations", r.outer_iterations },
                      { "steps_completed", r.steps_completed },
                      { "aperture_clamps", r.clamps },
                      { "final_census", census_json( r.final_census ) },
                      { "wall_time", r.wall_time },
                      { "message", r.message } } );
  }
  j["runs"] = runs;
  return j.dump( 2 ) + "\n";
}

void write_run_files( std::filesystem::path const & dir, RunOutcome const & run )
{
  std::filesystem::create_directories( dir / "residuals" );
  std::filesystem::create_directories( dir / "states" );
  write_atomic( dir / "residuals" / ( run.point.run_id + ".csv" ), residuals_csv( run ) );
  write_atomic( dir / "states" / ( run.point.run_id + ".csv" ), states_csv( run ) );
}

void write_outputs( std::filesystem::path const & dir,
                    Scenario const & scenario,
                    mdgeom::MdMesh const & mesh,
                    SweepResult const & result,
                    int jobs )
{
  std::filesystem::create_directories( dir );
  for( auto const & r : result.runs )
  {
    write_run_files( dir, r );
  }
  write_atomic( dir / "summary.csv", summary_csv( scenario, result.runs ) );
  write_atomic( dir / "run.json", run_json( scenario, mesh, result, jobs ) );
}

namespace
{

struct Loaded
{
  Scenario scenario;
  mdgeom::MdMesh mesh;
};

/// Parse, build the mesh and run the mesh-dependent checks. Prints every problem and
/// returns nullopt on failure.
std::optional<Loaded> load( std::string const & path, CommandOptions const & opts, std::ostream & err, std::vector<std::string> * warnings )
{
  try
  {
    Scenario sc = load_scenario( path, opts.seed );
    mdgeom::MdMesh mesh = build_mesh( sc, warnings );
    auto const problems = check_against_mesh( sc, mesh );
    if( !problems.empty() )
    {
      for( auto const & p : problems )
      {
        err << "error: " << p << "\n";
      }
      return std::nullopt;
    }
    return Loaded{ std::move( sc ), std::move( mesh ) };
  }
  catch( ValidationError const & e )
  {
    std::istringstream lines( e.what() );
    for( std::string line; std::getline( lines, line ); )
    {
      err << "error: " << line << "\n";
    }
    return std::nullopt;
  }
}

std::string describe( RunPoint const & p )
{
  return p.run_id + " " + solvers::to_string( p.solver ) + " c=" + format_double( p.c ) + " psi=" + format_double( p.dilation ) +
         " overpressure=" + format_double( p.overpressure );
}

void print_mesh( mdgeom::MdMesh const & mesh, std::ostream & out )
{
  auto const j = mesh_json( mesh );
  out << "matrix cells: " << j["matrix_cells"] << "\n"
      << "fractures: " << j["fractures"] << " (" << j["fracture_cells"] << " cells)\n"
      << "intersections: " << j["intersections"] << "\n"
      << "interfaces: " << j["interfaces"] << "\n"
      << "total cells: " << j["total_cells"] << "\n"
      << "unknowns: " << j["unknowns"] << "\n";
}

} // namespace

int command_validate( std::string const & config_path, CommandOptions const & opts, std::ostream & out, std::ostream & err )
{
  std::vector<std::string> warnings;
  auto const loaded = load( config_path, opts, err, &warnings );
  if( !loaded )
  {
    return 1;
  }
  for( auto const & w : warnings )
  {
    err << "warning: " << w << "\n";
  }
  auto const & sc = loaded->scenario;
  out << "scenario " << sc.name << " (" << sc.hash << ")\n";
  print_mesh( loaded->mesh, out );
  auto const grid = run_grid( sc );
  for( auto const & p : grid )
  {
    out << "  " << describe( p ) << "\n";
  }
  out << "OK, " << grid.size() << " runs\n";
  return 0;
}

int command_mesh_info( std::string const & config_path, CommandOptions const & opts, std::ostream & out, std::ostream & err )
{
  std::vector<std::string> warnings;
  auto const loaded = load( config_path, opts, err, &warnings );
  if( !loaded )
  {
    return 1;
  }
  for( auto const & w : warnings )
  {
    err << "warning: " << w << "\n";
  }
  out << "scenario " << loaded->scenario.name << "\n";
  print_mesh( loaded->mesh, out );
  auto const & mesh = loaded->mesh;
  for( Index k = 0; k < mesh.num_fractures(); ++k )
  {
    auto const & sd = mesh.subdomain( mesh.fracture_subdomain( k ) );
    out << "fracture " << sd.label << ": " << sd.num_cells() << " cells, length " << format_double( sd.total_measure() )
        << ", centermost cell " << centermost_cell( mesh, mesh.fracture_subdomain( k ) ) << "\n";
  }
  return 0;
}

int command_run( std::string const & config_path, CommandOptions const & opts, std::ostream & out, std::ostream & err )
{
  std::vector<std::string> warnings;
  auto const loaded = load( config_path, opts, err, &warnings );
  if( !loaded )
  {
    return 1;
  }
  for( auto const & w : warnings )
  {
    err << "warning: " << w << "\n";
  }
  auto const & sc = loaded->scenario;
  auto const dir = opts.output_dir ? *opts.output_dir : output_directory( sc );
  try
  {
    std::filesystem::create_directories( dir );
    RunOptions ropt;
    ropt.jobs = opts.jobs;
    ropt.on_done = [&]( RunOutcome const & r ) {
      write_run_files( dir, r );
      out << describe( r.point ) << ": " << solvers::to_string( r.status ) << " (" << r.total_linear_solves
          << " linear solves)\n";
      out.flush();
    };
    auto const result = execute( sc, loaded->mesh, ropt );
    write_outputs( dir, sc, loaded->mesh, result, opts.jobs );
    out << "wrote " << ( dir / "summary.csv" ).string() << "\n";
  }
  catch( std::exception const & e )
  {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

} // namespace fracpm::cli
