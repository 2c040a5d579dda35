#include "doctest.h"

#include "fracpm/cli/runner.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace fracpm;
using namespace fracpm::cli;
namespace fs = std::filesystem;

namespace
{

std::string const kTiny = R"(name = "tiny_run"

[mesh]
width = 80.0
height = 40.0
h = 10.0
fractures = [[20.0, 20.0, 60.0, 20.0], [40.0, 10.0, 40.0, 30.0]]

[bc.flow]
bottom = ["pressure", 2.0e7]
right = ["pressure", 2.0e7]
top = ["pressure", 2.0e7]
left = ["flux", 0.0]

[bc.mechanics]
background_stress = [-30.0e6, -50.0e6, 0.0]
bottom = "fixed"
right = "stress"
top = "stress"
left = "stress"

[injection]
fracture = 1

[sweep]
solvers = ["GNM", "IRM", "GNM_RM"]
c = [10.0, 0.1, 1.0]
overpressure = [1.0e6]
max_outer = 20
)";

std::string read( fs::path const & p )
{
  std::ifstream in( p, std::ios::binary );
  REQUIRE( in );
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv( std::string const & text )
{
  std::vector<std::vector<std::string>> rows;
  std::istringstream in( text );
  for( std::string line; std::getline( in, line ); )
  {
    std::vector<std::string> cells;
    std::istringstream ls( line );
    for( std::string cell; std::getline( ls, cell, ',' ); )
    {
      cells.push_back( cell );
    }
    if( !line.empty() && line.back() == ',' )
    {
      cells.emplace_back();
    }
    rows.push_back( cells );
  }
  return rows;
}

struct TempDir
{
  fs::path path;
  explicit TempDir( std::string const & name ) : path( fs::temp_directory_path() / name )
  {
    fs::remove_all( path );
    fs::create_directories( path );
  }
  ~TempDir() { fs::remove_all( path ); }
};

fs::path write_config( fs::path const & dir, std::string const & name, std::string const & text )
{
  auto const p = dir / name;
  std::ofstream( p ) << text;
  return p;
}

} // namespace

TEST_CASE( "run writes consistent outputs and is reproducible" )
{
  TempDir tmp( "fracpm_cli_run_test" );
  auto const cfg = write_config( tmp.path, "tiny.toml", kTiny );
  ::setenv( "FRACPM_OUTPUT_ROOT", ( tmp.path / "root" ).c_str(), 1 );

  std::ostringstream out;
  std::ostringstream err;
  REQUIRE( command_run( cfg.string(), {}, out, err ) == 0 );
  CHECK( err.str().empty() );
  auto const dir = tmp.path / "root" / "tiny_run";
  REQUIRE( fs::exists( dir / "summary.csv" ) );
  REQUIRE( fs::exists( dir / "run.json" ) );

  auto const summary = read( dir / "summary.csv" );
  auto const rows = csv( summary );
  REQUIRE( rows.size() == 10 );
  CHECK( rows[0] == std::vector<std::string>{ "run_id", "scenario_hash", "solver", "c", "psi", "overpressure", "status",
                                              "total_linear_solves", "outer_iterations", "final_residual", "n_open",
                                              "n_stick", "n_slip" } );
  std::vector<std::string> const c_axis{ "10", "0.1", "1" };
  int converged = 0;
  for( std::size_t i = 1; i < rows.size(); ++i )
  {
    auto const & row = rows[i];
    REQUIRE( row.size() == 13 );
    CAPTURE( row[0] );
    CHECK( row[3] == c_axis[( i - 1 ) % 3] );
    auto const res = csv( read( dir / "residuals" / ( row[0] + ".csv" ) ) );
    auto const states = csv( read( dir / "states" / ( row[0] + ".csv" ) ) );
    CHECK( res[0] == std::vector<std::string>{ "iteration", "residual_norm", "increment_norm" } );
    CHECK( states[0] == std::vector<std::string>{ "iteration", "n_open", "n_stick", "n_slip" } );
    CHECK( static_cast< int >( res.size() ) - 1 == std::stoi( row[7] ) );
    CHECK( states.size() == res.size() );
    if( row[6] == "Converged" )
    {
      ++converged;
      CHECK( std::stod( res.back()[1] ) < 1e-8 );
      CHECK( std::stod( res.back()[2] ) < 1e-8 );
      CHECK( res.back()[1] == row[9] );
    }
    CHECK( ( row[2] == "IRM" ) == ( std::stoi( row[8] ) > 0 ) );
  }
  CHECK( converged > 0 );

  auto const j = nlohmann::json::parse( read( dir / "run.json" ) );
  CHECK( j["runs"].size() == 9 );
  CHECK( j["config"]["sweep"]["max_outer"] == 20.0 );
  CHECK( j["mesh"]["fractures"] == 2 );
  CHECK( j["mesh"]["intersections"] == 1 );
  for( auto const & r : j["runs"] )
  {
    CHECK( r["wall_time"].get<double>() >= 0.0 );
  }

  // Same config with a worker pool: byte-identical tables.
  CommandOptions par;
  par.jobs = 3;
  par.output_dir = tmp.path / "parallel";
  std::ostringstream out2;
  REQUIRE( command_run( cfg.string(), par, out2, err ) == 0 );
  CHECK( read( tmp.path / "parallel" / "summary.csv" ) == summary );
  for( std::size_t i = 1; i < rows.size(); ++i )
  {
    for( auto const * sub : { "residuals", "states" } )
    {
      CHECK( read( tmp.path / "parallel" / sub / ( rows[i][0] + ".csv" ) ) == read( dir / sub / ( rows[i][0] + ".csv" ) ) );
    }
  }
  // And a rerun into the first directory.
  REQUIRE( command_run( cfg.string(), {}, out2, err ) == 0 );
  CHECK( read( dir / "summary.csv" ) == summary );
  ::unsetenv( "FRACPM_OUTPUT_ROOT" );
}

TEST_CASE( "validate and mesh-info" )
{
  TempDir tmp( "fracpm_cli_validate_test" );
  auto const good = write_config( tmp.path, "good.toml", kTiny );
  std::ostringstream out;
  std::ostringstream err;
  CHECK( command_validate( good.string(), {}, out, err ) == 0 );
  CHECK( out.str().find( "OK, 9 runs\n" ) != std::string::npos );
  CHECK( out.str().find( "run_0008 GNM_RM c=1 psi=5 overpressure=1e+06" ) != std::string::npos );
  CHECK( out.str().find( "unknowns:" ) != std::string::npos );
  CHECK_FALSE( fs::exists( tmp.path / "runs" ) );

  std::string text = kTiny;
  text.replace( text.find( "left = [\"flux\", 0.0]\n" ), 21, "" );
  text.replace( text.find( "c = [10.0, 0.1, 1.0]" ), 20, "c = [10.0, -0.1]" );
  auto const bad = write_config( tmp.path, "bad.toml", text );
  std::ostringstream out2;
  std::ostringstream err2;
  CHECK( command_validate( bad.string(), {}, out2, err2 ) == 1 );
  CHECK( err2.str().find( "error: bc.flow: missing boundary side 'left'" ) != std::string::npos );
  CHECK( err2.str().find( "augmentation parameter c must be positive" ) != std::string::npos );
  CHECK( command_run( bad.string(), {}, out2, err2 ) == 1 );

  std::ostringstream info;
  CHECK( command_mesh_info( good.string(), {}, info, err ) == 0 );
  CHECK( info.str().find( "fracture 1: 2 cells, length 20, centermost cell 0" ) != std::string::npos );
  CommandOptions seeded;
  seeded.seed = 7;
  std::ostringstream info2;
  CHECK( command_mesh_info( good.string(), seeded, info2, err ) == 0 );
  CHECK( command_validate( ( tmp.path / "missing.toml" ).string(), {}, out2, err2 ) == 1 );
}

TEST_CASE( "bundled single-fracture scenario with one solver gives one row per c" )
{
  TempDir tmp( "fracpm_cli_bundled_test" );
  std::string text = read( std::string( FRACPM_SCENARIO_DIR ) + "/single_fracture_2d.toml" );
  auto const pos = text.find( "solvers = [\"GNM\", \"IRM\", \"GNM_RM\"]" );
  REQUIRE( pos != std::string::npos );
  text.replace( pos, 34, "solvers = [\"GNM\"]" );
  auto const cfg = write_config( tmp.path, "one.toml", text );
  CommandOptions opts;
  opts.output_dir = tmp.path / "out";
  std::ostringstream out;
  std::ostringstream err;
  REQUIRE( command_run( cfg.string(), opts, out, err ) == 0 );
  auto const rows = csv( read( tmp.path / "out" / "summary.csv" ) );
  REQUIRE( rows.size() == 4 );
  CHECK( rows[1][3] == "0.01" );
  CHECK( rows[2][3] == "1" );
  CHECK( rows[3][3] == "100" );
}
