#pragma once

#include "fracpm/cli/scenario.hpp"
#include "fracpm/solvers/driver.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fracpm::cli
{

using solvers::Vector;

struct RunOutcome
{
  RunPoint point;
  solvers::Status status = solvers::Status::NC;
  int total_linear_solves = 0;
  int outer_iterations = 0;
  int steps_completed = 0;
  /// Concatenated over time steps, one entry per linear solve.
  std::vector<double> residuals;
  std::vector<double> increments;
  std::vector<solvers::Census> census;
  /// Contact states of the final state under the exact closure.
  solvers::Census final_census;
  int clamps = 0;
  double wall_time = 0.0;
  std::string message;
  Vector state;
  /// Previous-step snapshot of the last step taken.
  Vector previous;

  bool converged() const { return status == solvers::Status::Converged; }
};

/// Mechanical initialization shared by every run with the same dilation angle.
struct InitRecord
{
  double dilation = 0.0;
  solvers::Initialization init;
  solvers::Census census;
};

InitRecord initialize_scenario( Scenario const & scenario, mdgeom::MdMesh const & mesh, double dilation );

/// initialize -> time_loop for one grid point, starting from `init`.
RunOutcome execute_point( Scenario const & scenario, mdgeom::MdMesh const & mesh, RunPoint const & point, InitRecord const & init );

struct RunOptions
{
  int jobs = 1;
  /// Called under a lock as each run finishes.
  std::function<void( RunOutcome const & )> on_done;
};

struct SweepResult
{
  std::vector<InitRecord> inits;
  std::vector<RunOutcome> runs;
};

/// All grid points of the scenario, in grid order regardless of the number of jobs.
SweepResult execute( Scenario const & scenario, mdgeom::MdMesh const & mesh, RunOptions const & options = {} );

/// FRACPM_OUTPUT_ROOT (default "runs") / scenario name.
std::filesystem::path output_directory( Scenario const & scenario );

/// Write to a sibling temporary file, then rename over `path`.
void write_atomic( std::filesystem::path const & path, std::string const & content );

/// Shortest decimal text that reads back to the same double.
std::string format_double( double v );

std::string summary_csv( Scenario const & scenario, std::vector<RunOutcome> const & runs );
std::string residuals_csv( RunOutcome const & run );
std::string states_csv( RunOutcome const & run );
std::string run_json( Scenario const & scenario, mdgeom::MdMesh const & mesh, SweepResult const & result, int jobs );

/// residuals/<run_id>.csv and states/<run_id>.csv of one run.
void write_run_files( std::filesystem::path const & dir, RunOutcome const & run );
void write_outputs( std::filesystem::path const & dir,
                    Scenario const & scenario,
                    mdgeom::MdMesh const & mesh,
                    SweepResult const & result,
                    int jobs );

struct CommandOptions
{
  int jobs = 1;
  std::optional<unsigned long> seed;
  /// Overrides output_directory() when set.
  std::optional<std::filesystem::path> output_dir;
};

/// Exit codes: 0 success (also when runs fail to converge), 1 invalid input, 2 runtime failure.
int command_run( std::string const & config_path, CommandOptions const & opts, std::ostream & out, std::ostream & err );
int command_validate( std::string const & config_path, CommandOptions const & opts, std::ostream & out, std::ostream & err );
int command_mesh_info( std::string const & config_path, CommandOptions const & opts, std::ostream & out, std::ostream & err );

} // namespace fracpm::cli
