#include "fracpm/cli/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main( int argc, char ** argv )
{
  using namespace fracpm::cli;

  CLI::App app{ "Fractured poromechanics with frictional contact: scenario runner" };
  app.require_subcommand( 1 );

  CommandOptions opts;
  std::string config;
  std::string out_dir;
  unsigned long seed = 0;

  auto add_common = [&]( CLI::App * cmd ) {
    cmd->add_option( "config", config, "Scenario file" )->required()->check( CLI::ExistingFile );
    cmd->add_option( "--seed", seed, "Jitter interior mesh nodes with this seed (built-in meshes)" );
  };

  auto * run = app.add_subcommand( "run", "Run every grid point and write summary.csv, residuals/, states/ and run.json" );
  add_common( run );
  run->add_option( "--jobs,-j", opts.jobs, "Worker threads" )->check( CLI::PositiveNumber );
  run->add_option( "--output,-o", out_dir, "Output directory (default $FRACPM_OUTPUT_ROOT/<name>)" );

  auto * validate = app.add_subcommand( "validate", "Check a scenario without running it" );
  add_common( validate );

  auto * info = app.add_subcommand( "mesh-info", "Print mesh statistics" );
  add_common( info );

  CLI11_PARSE( app, argc, argv );

  for( auto * cmd : { run, validate, info } )
  {
    if( cmd->parsed() && cmd->count( "--seed" ) )
    {
      opts.seed = seed;
    }
  }
  if( !out_dir.empty() )
  {
    opts.output_dir = out_dir;
  }
  if( run->parsed() )
  {
    return command_run( config, opts, std::cout, std::cerr );
  }
  if( validate->parsed() )
  {
    return command_validate( config, opts, std::cout, std::cerr );
  }
  return command_mesh_info( config, opts, std::cout, std::cerr );
}
