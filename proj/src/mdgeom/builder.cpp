#include "fracpm/mdgeom/mesh.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace fracpm::mdgeom
{

namespace
{

struct Lattice
{
  Index nx = 0;
  Index ny = 0;
  double h = 1.0;

  Index corner( Index i, Index j ) const { return j * ( nx + 1 ) + i; }
  Index center( Index i, Index j ) const { return ( nx + 1 ) * ( ny + 1 ) + j * nx + i; }
};

Index lattice_count( double length, double h, char const * what )
{
  double const n = length / h;
  auto const rounded = static_cast< Index >( std::llround( n ) );
  if( rounded < 1 || std::abs( n - static_cast< double >( rounded ) ) > 1e-9 * std::max( 1.0, n ) )
  {
    std::ostringstream msg;
    msg << "domain " << what << " " << length << " is not a positive multiple of h = " << h;
    throw ValidationError( msg.str() );
  }
  return rounded;
}

std::array<Index, 2> snap( Vec2 const & p, Lattice const & lat, Rectangle const & domain, std::size_t fracture,
                           std::vector<std::string> * warnings )
{
  double const tol = 1e-9 * lat.h;
  if( p.x < -tol || p.y < -tol || p.x > domain.width + tol || p.y > domain.height + tol )
  {
    std::ostringstream msg;
    msg << "fracture " << fracture << " endpoint (" << p.x << ", " << p.y << ") lies outside the domain";
    throw ValidationError( msg.str() );
  }
  auto const i = static_cast< Index >( std::llround( p.x / lat.h ) );
  auto const j = static_cast< Index >( std::llround( p.y / lat.h ) );
  Vec2 const snapped{ static_cast< double >( i ) * lat.h, static_cast< double >( j ) * lat.h };
  double const dist = norm( snapped - p );
  if( dist > 0.5 * lat.h )
  {
    std::ostringstream msg;
    msg << "fracture " << fracture << " endpoint (" << p.x << ", " << p.y << ") is " << dist
        << " m from the nearest lattice node (more than h/2)";
    throw ValidationError( msg.str() );
  }
  if( dist > tol && warnings )
  {
    std::ostringstream msg;
    msg << "fracture " << fracture << " endpoint (" << p.x << ", " << p.y << ") snapped to (" << snapped.x << ", "
        << snapped.y << ")";
    warnings->push_back( msg.str() );
  }
  return { i, j };
}

} // namespace

MdMesh build_structured_mesh( Rectangle const & domain,
                              FractureNetwork const & fractures,
                              double h,
                              std::vector<std::string> * warnings,
                              BuildOptions const & options )
{
  if( !( h > 0.0 ) )
  {
    throw ValidationError( "cell size h must be positive" );
  }
  Lattice lat{ lattice_count( domain.width, h, "width" ), lattice_count( domain.height, h, "height" ), h };

  MeshPrimitives prim;
  for( Index j = 0; j <= lat.ny; ++j )
  {
    for( Index i = 0; i <= lat.nx; ++i )
    {
      prim.nodes.push_back( { static_cast< double >( i ) * h, static_cast< double >( j ) * h } );
    }
  }
  for( Index j = 0; j < lat.ny; ++j )
  {
    for( Index i = 0; i < lat.nx; ++i )
    {
      prim.nodes.push_back( { ( static_cast< double >( i ) + 0.5 ) * h, ( static_cast< double >( j ) + 0.5 ) * h } );
    }
  }
  for( Index j = 0; j < lat.ny; ++j )
  {
    for( Index i = 0; i < lat.nx; ++i )
    {
      Index const c = lat.center( i, j );
      Index const n00 = lat.corner( i, j );
      Index const n10 = lat.corner( i + 1, j );
      Index const n11 = lat.corner( i + 1, j + 1 );
      Index const n01 = lat.corner( i, j + 1 );
      prim.cells_2d.push_back( { n00, n10, c } );
      prim.cells_2d.push_back( { n10, n11, c } );
      prim.cells_2d.push_back( { n11, n01, c } );
      prim.cells_2d.push_back( { n01, n00, c } );
    }
  }

  std::set<std::array<Index, 2>> used_edges;
  for( std::size_t f = 0; f < fractures.size(); ++f )
  {
    auto const a = snap( fractures[f].start, lat, domain, f, warnings );
    auto const b = snap( fractures[f].end, lat, domain, f, warnings );
    Index const di = b[0] - a[0];
    Index const dj = b[1] - a[1];
    bool const axis = ( di == 0 ) != ( dj == 0 );
    bool const diagonal = di != 0 && std::abs( di ) == std::abs( dj );
    if( !axis && !diagonal )
    {
      throw ValidationError( "fracture " + std::to_string( f ) +
                             " is neither axis-aligned nor along a 45-degree lattice diagonal; "
                             "generate a conforming mesh externally and use load_mesh" );
    }
    Index const si = ( di > 0 ) - ( di < 0 );
    Index const sj = ( dj > 0 ) - ( dj < 0 );
    Index const steps = std::max( std::abs( di ), std::abs( dj ) );
    auto const add = [&]( Index n0, Index n1 ) {
      std::array<Index, 2> key{ std::min( n0, n1 ), std::max( n0, n1 ) };
      if( !used_edges.insert( key ).second )
      {
        throw ValidationError( "fracture " + std::to_string( f ) + " overlaps another fracture" );
      }
      prim.fracture_facets.push_back( { { n0, n1 }, static_cast< Index >( f ) } );
    };
    for( Index s = 0; s < steps; ++s )
    {
      Index const i0 = a[0] + s * si;
      Index const j0 = a[1] + s * sj;
      Index const i1 = i0 + si;
      Index const j1 = j0 + sj;
      if( axis )
      {
        add( lat.corner( i0, j0 ), lat.corner( i1, j1 ) );
      }
      else
      {
        Index const c = lat.center( std::min( i0, i1 ), std::min( j0, j1 ) );
        add( lat.corner( i0, j0 ), c );
        add( c, lat.corner( i1, j1 ) );
      }
    }
  }

  auto const edges = edge_list( prim.cells_2d );
  for( std::size_t e = 0; e < edges.size(); ++e )
  {
    Vec2 const & p = prim.nodes[static_cast< std::size_t >( edges[e][0] )];
    Vec2 const & q = prim.nodes[static_cast< std::size_t >( edges[e][1] )];
    double const tol = 1e-9 * h;
    if( std::abs( p.y ) < tol && std::abs( q.y ) < tol )
    {
      prim.boundary_tags[static_cast< Index >( e )] = "bottom";
    }
    else if( std::abs( p.x - domain.width ) < tol && std::abs( q.x - domain.width ) < tol )
    {
      prim.boundary_tags[static_cast< Index >( e )] = "right";
    }
    else if( std::abs( p.y - domain.height ) < tol && std::abs( q.y - domain.height ) < tol )
    {
      prim.boundary_tags[static_cast< Index >( e )] = "top";
    }
    else if( std::abs( p.x ) < tol && std::abs( q.x ) < tol )
    {
      prim.boundary_tags[static_cast< Index >( e )] = "left";
    }
  }

  if( options.jitter_seed )
  {
    std::set<Index> pinned;
    for( auto const & facet : prim.fracture_facets )
    {
      pinned.insert( facet.nodes.begin(), facet.nodes.end() );
    }
    std::mt19937_64 rng( *options.jitter_seed );
    std::uniform_real_distribution<double> dist( -0.1 * h, 0.1 * h );
    for( std::size_t n = 0; n < prim.nodes.size(); ++n )
    {
      auto & p = prim.nodes[n];
      bool const on_boundary = p.x < 1e-9 * h || p.y < 1e-9 * h || p.x > domain.width - 1e-9 * h ||
                               p.y > domain.height - 1e-9 * h;
      double const dx = dist( rng );
      double const dy = dist( rng );
      if( !on_boundary && !pinned.count( static_cast< Index >( n ) ) )
      {
        p = p + Vec2{ dx, dy };
      }
    }
  }

  return MdMesh::from_primitives( std::move( prim ) );
}

} // namespace fracpm::mdgeom
