#include "fracpm/cli/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fracpm::cli
{

namespace
{

using assembly::FlowBoundary;
using assembly::MechanicsBoundary;

std::vector<std::string> const kSides{ "bottom", "right", "top", "left" };

std::set<std::string> const kSections{ "", "mesh", "materials", "bc.flow", "bc.mechanics", "injection", "time", "sweep" };

/// Collects problems with a location prefix instead of throwing at the first one.
class Errors
{
public:
  void add( std::string const & where, Value const * v, std::string const & what )
  {
    std::string loc = where;
    if( v && v->line > 0 )
    {
      loc += " (line " + std::to_string( v->line ) + ")";
    }
    m_list.push_back( loc + ": " + what );
  }
  void add( std::string const & msg ) { m_list.push_back( msg ); }
  bool empty() const { return m_list.empty(); }
  std::vector<std::string> const & list() const { return m_list; }

private:
  std::vector<std::string> m_list;
};

std::string key_path( std::string const & section, std::string const & key )
{
  return section.empty() ? key : section + "." + key;
}

std::optional<double> number( Table const & t, std::string const & section, std::string const & key, Errors & err )
{
  auto it = t.find( key );
  if( it == t.end() )
  {
    return std::nullopt;
  }
  if( !it->second.is_number() )
  {
    err.add( key_path( section, key ), &it->second, "expected a number" );
    return std::nullopt;
  }
  return it->second.as_number();
}

std::optional<std::vector<double>> numbers( Table const & t, std::string const & section, std::string const & key, Errors & err )
{
  auto it = t.find( key );
  if( it == t.end() )
  {
    return std::nullopt;
  }
  Value const & v = it->second;
  if( v.is_number() )
  {
    return std::vector<double>{ v.as_number() };
  }
  if( !v.is_array() )
  {
    err.add( key_path( section, key ), &v, "expected a number or an array of numbers" );
    return std::nullopt;
  }
  std::vector<double> out;
  for( auto const & x : v.as_array() )
  {
    if( !x.is_number() )
    {
      err.add( key_path( section, key ), &v, "expected an array of numbers" );
      return std::nullopt;
    }
    out.push_back( x.as_number() );
  }
  return out;
}

std::optional<long long> integer( Table const & t, std::string const & section, std::string const & key, Errors & err )
{
  auto const v = number( t, section, key, err );
  if( !v )
  {
    return std::nullopt;
  }
  if( std::floor( *v ) != *v || std::abs( *v ) > 1e15 )
  {
    err.add( key_path( section, key ), &t.at( key ), "expected an integer" );
    return std::nullopt;
  }
  return static_cast< long long >( *v );
}

void unknown_keys( Table const & t, std::string const & section, std::set<std::string> const & allowed, Errors & err )
{
  for( auto const & [key, v] : t )
  {
    if( !allowed.count( key ) )
    {
      err.add( key_path( section, key ), &v, "unknown key" );
    }
  }
}

void parse_mesh( Config const & cfg, std::string const & base_dir, Scenario & sc, Errors & err )
{
  if( !cfg.has( "mesh" ) )
  {
    err.add( "missing section [mesh]" );
    return;
  }
  Table const & t = cfg.section( "mesh" );
  std::string const sec = "mesh";
  if( auto it = t.find( "file" ); it != t.end() )
  {
    unknown_keys( t, sec, { "file" }, err );
    if( !it->second.is_string() || it->second.as_string().empty() )
    {
      err.add( "mesh.file", &it->second, "expected a file path" );
      return;
    }
    std::filesystem::path p( it->second.as_string() );
    if( p.is_relative() )
    {
      p = std::filesystem::path( base_dir ) / p;
    }
    sc.mesh.file = p.lexically_normal().string();
    return;
  }
  unknown_keys( t, sec, { "width", "height", "h", "fractures" }, err );
  auto const w = number( t, sec, "width", err );
  auto const h = number( t, sec, "height", err );
  auto const dh = number( t, sec, "h", err );
  if( !w || !h || !dh )
  {
    err.add( "mesh: the built-in mesher needs width, height and h (or give mesh.file)" );
    return;
  }
  if( !( *w > 0 ) || !( *h > 0 ) || !( *dh > 0 ) )
  {
    err.add( "mesh: width, height and h must be positive" );
    return;
  }
  sc.mesh.domain = { *w, *h };
  sc.mesh.h = *dh;
  auto it = t.find( "fractures" );
  if( it == t.end() )
  {
    return;
  }
  if( !it->second.is_array() )
  {
    err.add( "mesh.fractures", &it->second, "expected an array of [x0, y0, x1, y1]" );
    return;
  }
  for( auto const & f : it->second.as_array() )
  {
    bool ok = f.is_array() && f.as_array().size() == 4;
    std::array<double, 4> xy{};
    for( std::size_t i = 0; ok && i < 4; ++i )
    {
      ok = f.as_array()[i].is_number();
      if( ok )
      {
        xy[i] = f.as_array()[i].as_number();
      }
    }
    if( !ok )
    {
      err.add( "mesh.fractures", &it->second, "each fracture is [x0, y0, x1, y1]" );
      return;
    }
    sc.mesh.fractures.push_back( { { xy[0], xy[1] }, { xy[2], xy[3] } } );
  }
}

void parse_materials( Config const & cfg, Scenario & sc, Errors & err )
{
  auto & m = sc.setup.material;
  for( auto const & [key, v] : cfg.section( "materials" ) )
  {
    std::string const where = "materials." + key;
    if( key == "gravity" )
    {
      if( !v.is_array() || v.as_array().size() != 2 || !v.as_array()[0].is_number() || !v.as_array()[1].is_number() )
      {
        err.add( where, &v, "expected [gx, gy]" );
        continue;
      }
      m.gravity = { v.as_array()[0].as_number(), v.as_array()[1].as_number() };
      continue;
    }
    if( !v.is_number() )
    {
      err.add( where, &v, "expected a number" );
      continue;
    }
    if( !m.set( key, v.as_number() ) )
    {
      err.add( where, &v, "unknown material parameter" );
    }
  }
  try
  {
    m.validate();
  }
  catch( ValidationError const & e )
  {
    err.add( std::string( "materials: " ) + e.what() );
  }
}

void parse_flow_bc( Config const & cfg, Scenario & sc, Errors & err )
{
  if( !cfg.has( "bc.flow" ) )
  {
    err.add( "missing section [bc.flow]" );
    return;
  }
  for( auto const & [key, v] : cfg.section( "bc.flow" ) )
  {
    std::string const where = "bc.flow." + key;
    if( key == "background_pressure" )
    {
      if( !v.is_number() || !( v.as_number() > 0 ) )
      {
        err.add( where, &v, "expected a positive pressure in Pa" );
      }
      else
      {
        sc.setup.background_pressure = v.as_number();
      }
      continue;
    }
    bool ok = v.is_array() && v.as_array().size() == 2 && v.as_array()[0].is_string() && v.as_array()[1].is_number();
    FlowBoundary b;
    if( ok )
    {
      std::string const kind = v.as_array()[0].as_string();
      b.value = v.as_array()[1].as_number();
      if( kind == "pressure" )
      {
        b.kind = FlowBoundary::Kind::Pressure;
      }
      else if( kind == "flux" )
      {
        b.kind = FlowBoundary::Kind::Flux;
      }
      else
      {
        ok = false;
      }
    }
    if( !ok )
    {
      err.add( where, &v, "expected [\"pressure\", Pa] or [\"flux\", kg/(m^2 s)]" );
      continue;
    }
    sc.setup.bc.flow[key] = b;
  }
}

void parse_mechanics_bc( Config const & cfg, Scenario & sc, Errors & err )
{
  if( !cfg.has( "bc.mechanics" ) )
  {
    err.add( "missing section [bc.mechanics]" );
    return;
  }
  for( auto const & [key, v] : cfg.section( "bc.mechanics" ) )
  {
    std::string const where = "bc.mechanics." + key;
    if( key == "background_stress" )
    {
      bool ok = v.is_array() && v.as_array().size() == 3;
      for( std::size_t i = 0; ok && i < 3; ++i )
      {
        ok = v.as_array()[i].is_number();
        if( ok )
        {
          sc.setup.bc.background_stress[i] = v.as_array()[i].as_number();
        }
      }
      if( !ok )
      {
        err.add( where, &v, "expected [sxx, syy, sxy] in Pa" );
      }
      continue;
    }
    MechanicsBoundary b;
    std::string kind;
    if( v.is_string() )
    {
      kind = v.as_string();
    }
    else if( v.is_array() && !v.as_array().empty() && v.as_array()[0].is_string() )
    {
      kind = v.as_array()[0].as_string();
    }
    bool ok = true;
    if( kind == "fixed" && v.is_string() )
    {
      b.kind = MechanicsBoundary::Kind::Fixed;
    }
    else if( kind == "roller" && v.is_string() )
    {
      b.kind = MechanicsBoundary::Kind::Roller;
    }
    else if( kind == "stress" && v.is_string() )
    {
      b.kind = MechanicsBoundary::Kind::Stress;
    }
    else if( kind == "traction" && v.is_array() && v.as_array().size() == 3 && v.as_array()[1].is_number() &&
             v.as_array()[2].is_number() )
    {
      b.kind = MechanicsBoundary::Kind::Traction;
      b.traction = { v.as_array()[1].as_number(), v.as_array()[2].as_number() };
    }
    else
    {
      ok = false;
    }
    if( !ok )
    {
      err.add( where, &v, "expected \"fixed\", \"roller\", \"stress\" or [\"traction\", tx, ty]" );
      continue;
    }
    sc.setup.bc.mechanics[key] = b;
  }
}

void parse_injection( Config const & cfg, Scenario & sc, Errors & err )
{
  if( !cfg.has( "injection" ) )
  {
    return;
  }
  Table const & t = cfg.section( "injection" );
  unknown_keys( t, "injection", { "fracture", "cell" }, err );
  Injection inj;
  if( auto const id = integer( t, "injection", "fracture", err ) )
  {
    if( *id < 0 )
    {
      err.add( "injection.fracture", &t.at( "fracture" ), "fracture id must be nonnegative" );
    }
    inj.fracture = static_cast< Index >( *id );
  }
  else if( !t.count( "fracture" ) )
  {
    err.add( "injection: missing key 'fracture'" );
  }
  if( auto it = t.find( "cell" ); it != t.end() && !( it->second.is_string() && it->second.as_string() == "centermost" ) )
  {
    err.add( "injection.cell", &it->second, "only \"centermost\" is supported" );
  }
  sc.injection = inj;
}

void parse_time( Config const & cfg, Scenario & sc, Errors & err )
{
  Table const & t = cfg.section( "time" );
  unknown_keys( t, "time", { "dt", "num_steps" }, err );
  if( auto dt = number( t, "time", "dt", err ) )
  {
    if( !( *dt > 0 ) || !std::isfinite( *dt ) )
    {
      err.add( "time.dt", &t.at( "dt" ), "time step must be positive" );
    }
    sc.setup.dt = *dt;
  }
  if( auto n = integer( t, "time", "num_steps", err ) )
  {
    if( *n < 0 || *n > 100000 )
    {
      err.add( "time.num_steps", &t.at( "num_steps" ), "expected 0 <= num_steps <= 100000" );
    }
    sc.num_steps = static_cast< int >( *n );
  }
}

void parse_sweep( Config const & cfg, Scenario & sc, Errors & err )
{
  if( !cfg.has( "sweep" ) )
  {
    err.add( "missing section [sweep]" );
    return;
  }
  Table const & t = cfg.section( "sweep" );
  std::string const sec = "sweep";
  unknown_keys( t,
                sec,
                { "solvers", "c", "dilation_angle", "overpressure", "tol", "max_inner", "max_outer", "div_threshold", "init_c" },
                err );
  if( auto it = t.find( "solvers" ); it != t.end() )
  {
    std::vector<Value> items = it->second.is_array() ? it->second.as_array() : std::vector<Value>{ it->second };
    for( auto const & item : items )
    {
      auto const kind = item.is_string() ? solvers::parse_solver_kind( item.as_string() ) : std::nullopt;
      if( !kind )
      {
        err.add( "sweep.solvers", &it->second, "unknown solver (expected GNM, IRM or GNM_RM)" );
        continue;
      }
      sc.sweep.solvers.push_back( *kind );
    }
  }
  else
  {
    err.add( "sweep: missing key 'solvers'" );
  }
  if( auto c = numbers( t, sec, "c", err ) )
  {
    sc.sweep.c = *c;
    for( double v : *c )
    {
      if( !( v > 0 ) || !std::isfinite( v ) )
      {
        err.add( "sweep.c", &t.at( "c" ), "augmentation parameter c must be positive, got " + to_text( Value{ v, 0 } ) );
      }
    }
  }
  else if( !t.count( "c" ) )
  {
    err.add( "sweep: missing key 'c'" );
  }
  if( auto psi = numbers( t, sec, "dilation_angle", err ) )
  {
    sc.sweep.dilation = *psi;
    for( double v : *psi )
    {
      if( !( v >= 0 && v < 90 ) )
      {
        err.add( "sweep.dilation_angle", &t.at( "dilation_angle" ), "dilation angle must lie in [0, 90) degrees" );
      }
    }
  }
  else
  {
    sc.sweep.dilation = { sc.setup.material.dilation_angle };
  }
  if( auto over = numbers( t, sec, "overpressure", err ) )
  {
    sc.sweep.overpressure = *over;
    if( !sc.injection )
    {
      err.add( "sweep.overpressure", &t.at( "overpressure" ), "overpressures need an [injection] section" );
    }
    for( double v : *over )
    {
      if( !std::isfinite( v ) || sc.setup.background_pressure + v <= 0 )
      {
        err.add( "sweep.overpressure", &t.at( "overpressure" ), "injection pressure must stay positive" );
      }
    }
  }
  else
  {
    if( sc.injection )
    {
      err.add( "sweep: missing key 'overpressure' (required with [injection])" );
    }
    sc.sweep.overpressure = { 0.0 };
  }
  if( auto v = number( t, sec, "tol", err ) )
  {
    sc.solver.tol = *v;
  }
  if( auto v = integer( t, sec, "max_inner", err ) )
  {
    sc.solver.max_inner = static_cast< int >( *v );
  }
  if( auto v = integer( t, sec, "max_outer", err ) )
  {
    sc.solver.max_outer = static_cast< int >( *v );
  }
  if( auto v = number( t, sec, "div_threshold", err ) )
  {
    sc.solver.div_threshold = *v;
  }
  if( auto v = number( t, sec, "init_c", err ) )
  {
    if( !( *v > 0 ) )
    {
      err.add( "sweep.init_c", &t.at( "init_c" ), "augmentation parameter must be positive" );
    }
    sc.init_c = *v;
  }
  solvers::SolverConfig check = sc.solver;
  check.c = 1.0;
  try
  {
    check.validate();
  }
  catch( ValidationError const & e )
  {
    err.add( std::string( "sweep: " ) + e.what() );
  }
  for( auto const & [name, list] : { std::pair{ "solvers", sc.sweep.solvers.size() }, std::pair{ "c", sc.sweep.c.size() },
                                     std::pair{ "dilation_angle", sc.sweep.dilation.size() },
                                     std::pair{ "overpressure", sc.sweep.overpressure.size() } } )
  {
    if( list == 0 && t.count( name ) )
    {
      err.add( std::string( "sweep." ) + name + ": list is empty" );
    }
  }
}

void check_sides( Scenario const & sc, std::vector<std::string> const & tags, Errors & err )
{
  std::set<std::string> const known( tags.begin(), tags.end() );
  for( auto const & tag : tags )
  {
    if( !sc.setup.bc.flow.count( tag ) )
    {
      err.add( "bc.flow: missing boundary side '" + tag + "'" );
    }
    if( !sc.setup.bc.mechanics.count( tag ) )
    {
      err.add( "bc.mechanics: missing boundary side '" + tag + "'" );
    }
  }
  for( auto const & [tag, b] : sc.setup.bc.flow )
  {
    if( !known.count( tag ) )
    {
      err.add( "bc.flow." + tag + ": no such boundary side" );
    }
  }
  for( auto const & [tag, b] : sc.setup.bc.mechanics )
  {
    if( !known.count( tag ) )
    {
      err.add( "bc.mechanics." + tag + ": no such boundary side" );
    }
  }
}

std::vector<std::string> boundary_tags( mdgeom::MdMesh const & mesh )
{
  std::set<std::string> tags;
  for( auto const & f : mesh.matrix().faces )
  {
    if( f.kind == mdgeom::FaceKind::ExternalBoundary )
    {
      tags.insert( f.tag );
    }
  }
  return { tags.begin(), tags.end() };
}

} // namespace

std::string fnv1a_hex( std::string const & bytes )
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for( unsigned char ch : bytes )
  {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf( buf, sizeof buf, "%016llx", static_cast< unsigned long long >( h ) );
  return buf;
}

Scenario parse_scenario( Config const & cfg,
                         std::string const & text,
                         std::string const & base_dir,
                         std::optional<unsigned long> seed )
{
  Scenario sc;
  sc.config = cfg;
  sc.seed = seed;
  Errors err;
  for( auto const & [name, table] : cfg.sections )
  {
    if( !kSections.count( name ) )
    {
      err.add( "unknown section [" + name + "]" );
    }
  }
  Table const & top = cfg.section( "" );
  unknown_keys( top, "", { "name" }, err );
  if( auto it = top.find( "name" ); it != top.end() && it->second.is_string() && !it->second.as_string().empty() )
  {
    sc.name = it->second.as_string();
    for( char ch : sc.name )
    {
      if( !( std::isalnum( static_cast< unsigned char >( ch ) ) || ch == '_' || ch == '-' || ch == '.' ) )
      {
        err.add( "name", &it->second, "scenario name may only use letters, digits, '_', '-' and '.'" );
        break;
      }
    }
  }
  else
  {
    err.add( "missing top-level key 'name'" );
  }
  parse_mesh( cfg, base_dir, sc, err );
  parse_materials( cfg, sc, err );
  parse_flow_bc( cfg, sc, err );
  parse_mechanics_bc( cfg, sc, err );
  parse_injection( cfg, sc, err );
  parse_time( cfg, sc, err );
  parse_sweep( cfg, sc, err );
  if( sc.mesh.file.empty() )
  {
    check_sides( sc, kSides, err );
    if( sc.injection && sc.injection->fracture >= static_cast< Index >( sc.mesh.fractures.size() ) )
    {
      err.add( "injection.fracture: fracture " + std::to_string( sc.injection->fracture ) + " does not exist (" +
               std::to_string( sc.mesh.fractures.size() ) + " fractures)" );
    }
  }
  else if( seed )
  {
    err.add( "--seed applies to the built-in mesher only" );
  }
  if( !err.empty() )
  {
    std::string msg;
    for( auto const & e : err.list() )
    {
      msg += ( msg.empty() ? "" : "\n" ) + e;
    }
    throw ValidationError( msg );
  }
  sc.hash = fnv1a_hex( text + "\nseed=" + ( seed ? std::to_string( *seed ) : std::string( "none" ) ) );
  return sc;
}

Scenario load_scenario( std::string const & path, std::optional<unsigned long> seed )
{
  std::ifstream in( path, std::ios::binary );
  if( !in )
  {
    throw ValidationError( "cannot open config file '" + path + "'" );
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string const text = ss.str();
  auto const dir = std::filesystem::path( path ).parent_path().string();
  return parse_scenario( parse_config( text, path ), text, dir.empty() ? "." : dir, seed );
}

mdgeom::MdMesh build_mesh( Scenario const & scenario, std::vector<std::string> * warnings )
{
  if( !scenario.mesh.file.empty() )
  {
    return mdgeom::load_mesh( scenario.mesh.file );
  }
  mdgeom::BuildOptions opt;
  opt.jitter_seed = scenario.seed;
  return mdgeom::build_structured_mesh( scenario.mesh.domain, scenario.mesh.fractures, scenario.mesh.h, warnings, opt );
}

std::vector<std::string> check_against_mesh( Scenario const & scenario, mdgeom::MdMesh const & mesh )
{
  Errors err;
  check_sides( scenario, boundary_tags( mesh ), err );
  if( scenario.injection && !mesh.find_fracture( scenario.injection->fracture ) )
  {
    err.add( "injection.fracture: fracture " + std::to_string( scenario.injection->fracture ) + " does not exist in the mesh" );
  }
  return err.list();
}

std::vector<RunPoint> run_grid( Scenario const & scenario )
{
  std::vector<RunPoint> out;
  for( double over : scenario.sweep.overpressure )
  {
    for( double psi : scenario.sweep.dilation )
    {
      for( auto kind : scenario.sweep.solvers )
      {
        for( double c : scenario.sweep.c )
        {
          RunPoint p;
          p.index = static_cast< int >( out.size() );
          char buf[16];
          std::snprintf( buf, sizeof buf, "run_%04d", p.index );
          p.run_id = buf;
          p.solver = kind;
          p.c = c;
          p.dilation = psi;
          p.overpressure = over;
          out.push_back( p );
        }
      }
    }
  }
  return out;
}

Index centermost_cell( mdgeom::MdMesh const & mesh, Index fracture_subdomain )
{
  auto const & sd = mesh.subdomain( fracture_subdomain );
  if( sd.num_cells() == 0 )
  {
    throw ValidationError( "fracture subdomain has no cells" );
  }
  // Fracture endpoints are the nodes used by exactly one cell.
  std::map<Index, int> uses;
  for( auto const & cn : sd.cell_nodes )
  {
    for( Index n : cn )
    {
      ++uses[n];
    }
  }
  std::vector<Vec2> ends;
  for( auto const & [n, k] : uses )
  {
    if( k == 1 )
    {
      ends.push_back( mesh.nodes()[static_cast< std::size_t >( n )] );
    }
  }
  Vec2 mid;
  if( ends.size() == 2 )
  {
    mid = 0.5 * ( ends[0] + ends[1] );
  }
  else
  {
    double total = 0.0;
    for( Index c = 0; c < sd.num_cells(); ++c )
    {
      mid = mid + sd.cell_measures[static_cast< std::size_t >( c )] * sd.cell_centers[static_cast< std::size_t >( c )];
      total += sd.cell_measures[static_cast< std::size_t >( c )];
    }
    mid = mid / total;
  }
  double const slack = 1e-9 * sd.cell_measures.front();
  Index best = 0;
  double best_d = norm( sd.cell_centers.front() - mid );
  for( Index c = 1; c < sd.num_cells(); ++c )
  {
    double const d = norm( sd.cell_centers[static_cast< std::size_t >( c )] - mid );
    if( d < best_d - slack )
    {
      best = c;
      best_d = d;
    }
  }
  return best;
}

assembly::ModelSetup setup_for( Scenario const & scenario, mdgeom::MdMesh const & mesh, RunPoint const & point )
{
  assembly::ModelSetup s = scenario.setup;
  s.material.dilation_angle = point.dilation;
  if( scenario.injection )
  {
    auto const sd = mesh.find_fracture( scenario.injection->fracture );
    if( !sd )
    {
      throw ValidationError( "injection fracture " + std::to_string( scenario.injection->fracture ) + " does not exist" );
    }
    s.well = assembly::Well{ *sd, centermost_cell( mesh, *sd ), s.background_pressure + point.overpressure };
  }
  return s;
}

} // namespace fracpm::cli
