#pragma once

#include "fracpm/assembly/model.hpp"
#include "fracpm/cli/config.hpp"
#include "fracpm/mdgeom/mesh.hpp"
#include "fracpm/solvers/solvers.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fracpm::cli
{

struct MeshSource
{
  /// Path of a JSON mesh file, resolved against the config directory. Empty for the built-in mesher.
  std::string file;
  mdgeom::Rectangle domain;
  double h = 0.0;
  mdgeom::FractureNetwork fractures;
};

struct Sweep
{
  std::vector<solvers::SolverKind> solvers;
  /// Augmentation parameters in GPa/m.
  std::vector<double> c;
  /// Dilation angles in degrees.
  std::vector<double> dilation;
  /// Injection overpressure above the background pressure, Pa.
  std::vector<double> overpressure;
};

struct Injection
{
  Index fracture = 0;
};

struct Scenario
{
  std::string name;
  MeshSource mesh;
  std::optional<unsigned long> seed;
  /// Material, boundary data, dt and background pressure shared by all runs.
  assembly::ModelSetup setup;
  std::optional<Injection> injection;
  int num_steps = 1;
  Sweep sweep;
  /// Tolerance and caps; kind and c are set per run.
  solvers::SolverConfig solver;
  /// Augmentation parameter of the mechanical initialization.
  double init_c = 0.1;
  /// FNV-1a of the config text and the seed, 16 hex digits.
  std::string hash;
  Config config;
};

struct RunPoint
{
  int index = 0;
  std::string run_id;
  solvers::SolverKind solver = solvers::SolverKind::GNM;
  double c = 1.0;
  double dilation = 0.0;
  double overpressure = 0.0;
};

/// Build a scenario from parsed config. All problems are collected and thrown at once
/// as one ValidationError, one per line. `base_dir` resolves relative mesh paths.
Scenario parse_scenario( Config const & cfg,
                         std::string const & text,
                         std::string const & base_dir,
                         std::optional<unsigned long> seed = std::nullopt );
Scenario load_scenario( std::string const & path, std::optional<unsigned long> seed = std::nullopt );

mdgeom::MdMesh build_mesh( Scenario const & scenario, std::vector<std::string> * warnings = nullptr );

/// Checks that need the mesh: every boundary tag has one flow and one mechanics condition,
/// the injection fracture exists. Returns the problems found.
std::vector<std::string> check_against_mesh( Scenario const & scenario, mdgeom::MdMesh const & mesh );

/// Overpressure-major, then dilation, solver and c, each in config order.
std::vector<RunPoint> run_grid( Scenario const & scenario );

/// Fracture cell whose center is closest to the fracture midpoint; lowest index on ties.
Index centermost_cell( mdgeom::MdMesh const & mesh, Index fracture_subdomain );

/// Setup of one grid point: dilation angle and the injection well applied.
assembly::ModelSetup setup_for( Scenario const & scenario, mdgeom::MdMesh const & mesh, RunPoint const & point );

std::string fnv1a_hex( std::string const & bytes );

} // namespace fracpm::cli
