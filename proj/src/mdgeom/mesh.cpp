#include "fracpm/mdgeom/mesh.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace fracpm::mdgeom
{

namespace
{

using Edge = std::array<Index, 2>;

Edge make_edge( Index a, Index b ) { return a < b ? Edge{ a, b } : Edge{ b, a }; }

double signed_area( Vec2 const & a, Vec2 const & b, Vec2 const & c )
{
  return 0.5 * cross( b - a, c - a );
}

struct DisjointSet
{
  std::vector<std::size_t> parent;
  explicit DisjointSet( std::size_t n ) : parent( n ) { std::iota( parent.begin(), parent.end(), 0 ); }
  std::size_t find( std::size_t i )
  {
    while( parent[i] != i )
    {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite( std::size_t a, std::size_t b )
  {
    a = find( a );
    b = find( b );
    if( a != b )
    {
      parent[std::max( a, b )] = std::min( a, b );
    }
  }
};

std::string node_str( Index n ) { return "node " + std::to_string( n ); }

} // namespace

double Subdomain::total_measure() const
{
  return std::accumulate( cell_measures.begin(), cell_measures.end(), 0.0 );
}

std::vector<std::array<Index, 2>> edge_list( std::span<std::array<Index, 3> const> cells )
{
  std::vector<Edge> edges;
  edges.reserve( 3 * cells.size() );
  for( auto const & c : cells )
  {
    for( int e = 0; e < 3; ++e )
    {
      edges.push_back( make_edge( c[e], c[( e + 1 ) % 3] ) );
    }
  }
  std::sort( edges.begin(), edges.end() );
  edges.erase( std::unique( edges.begin(), edges.end() ), edges.end() );
  return edges;
}

std::optional<Index> MdMesh::find_fracture( Index fracture_id ) const
{
  for( Index k = 0; k < m_num_fractures; ++k )
  {
    if( m_subdomains[static_cast< std::size_t >( 1 + k )].label == fracture_id )
    {
      return 1 + k;
    }
  }
  return std::nullopt;
}

std::vector<Index> MdMesh::interfaces_below( Index i ) const
{
  std::vector<Index> out;
  for( auto const & intf : m_interfaces )
  {
    if( intf.lower == i )
    {
      out.push_back( intf.id );
    }
  }
  return out;
}

std::vector<Index> MdMesh::interfaces_above( Index i ) const
{
  std::vector<Index> out;
  for( auto const & intf : m_interfaces )
  {
    if( intf.higher == i )
    {
      out.push_back( intf.id );
    }
  }
  return out;
}

Index MdMesh::total_cells() const
{
  Index n = 0;
  for( auto const & sd : m_subdomains )
  {
    n += sd.num_cells();
  }
  return n;
}

MdMesh MdMesh::from_primitives( MeshPrimitives prim )
{
  auto const num_nodes = static_cast< Index >( prim.nodes.size() );
  if( prim.cells_2d.empty() )
  {
    throw ValidationError( "mesh has an empty cell list" );
  }
  if( num_nodes == 0 )
  {
    throw ValidationError( "mesh has no nodes" );
  }

  // Triangles: references, orientation, area.
  std::vector<char> node_used( prim.nodes.size(), 0 );
  for( std::size_t t = 0; t < prim.cells_2d.size(); ++t )
  {
    auto & c = prim.cells_2d[t];
    for( Index n : c )
    {
      if( n < 0 || n >= num_nodes )
      {
        throw ValidationError( "cell " + std::to_string( t ) + " references dangling " + node_str( n ) );
      }
      node_used[static_cast< std::size_t >( n )] = 1;
    }
    if( c[0] == c[1] || c[1] == c[2] || c[0] == c[2] )
    {
      throw ValidationError( "cell " + std::to_string( t ) + " repeats a node" );
    }
    double const area = signed_area( prim.nodes[c[0]], prim.nodes[c[1]], prim.nodes[c[2]] );
    if( area < 0.0 )
    {
      std::swap( c[1], c[2] );
    }
    else if( !( area > 0.0 ) )
    {
      throw ValidationError( "degenerate element: cell " + std::to_string( t ) + " has nonpositive area" );
    }
  }
  for( Index n = 0; n < num_nodes; ++n )
  {
    if( !node_used[static_cast< std::size_t >( n )] )
    {
      throw ValidationError( "dangling " + node_str( n ) + " is not referenced by any cell" );
    }
  }

  auto const edges = edge_list( prim.cells_2d );
  std::map<Edge, Index> edge_index;
  for( std::size_t e = 0; e < edges.size(); ++e )
  {
    edge_index.emplace( edges[e], static_cast< Index >( e ) );
  }
  std::vector<std::vector<Index>> edge_cells( edges.size() );
  for( std::size_t t = 0; t < prim.cells_2d.size(); ++t )
  {
    auto const & c = prim.cells_2d[t];
    for( int e = 0; e < 3; ++e )
    {
      edge_cells[static_cast< std::size_t >( edge_index.at( make_edge( c[e], c[( e + 1 ) % 3] ) ) )].push_back(
        static_cast< Index >( t ) );
    }
  }
  for( std::size_t e = 0; e < edges.size(); ++e )
  {
    if( edge_cells[e].size() > 2 )
    {
      throw ValidationError( "non-manifold edge " + std::to_string( edges[e][0] ) + "-" + std::to_string( edges[e][1] ) );
    }
  }

  // Fracture facets.
  std::vector<Index> edge_facet( edges.size(), -1 );
  for( std::size_t f = 0; f < prim.fracture_facets.size(); ++f )
  {
    auto const & facet = prim.fracture_facets[f];
    for( Index n : facet.nodes )
    {
      if( n < 0 || n >= num_nodes )
      {
        throw ValidationError( "fracture facet " + std::to_string( f ) + " references dangling " + node_str( n ) );
      }
    }
    auto it = edge_index.find( make_edge( facet.nodes[0], facet.nodes[1] ) );
    if( it == edge_index.end() )
    {
      throw ValidationError( "fracture facet " + std::to_string( f ) + " does not coincide with a mesh face" );
    }
    auto const e = static_cast< std::size_t >( it->second );
    if( edge_cells[e].size() != 2 )
    {
      throw ValidationError( "unpaired fracture facet " + std::to_string( f ) +
                             ": it must be shared by exactly two matrix faces" );
    }
    if( edge_facet[e] >= 0 )
    {
      throw ValidationError( "fracture facet " + std::to_string( f ) + " duplicates facet " +
                             std::to_string( edge_facet[e] ) );
    }
    edge_facet[e] = static_cast< Index >( f );
  }

  for( auto const & [face, tag] : prim.boundary_tags )
  {
    if( face < 0 || face >= static_cast< Index >( edges.size() ) )
    {
      throw ValidationError( "boundary tag references dangling face " + std::to_string( face ) );
    }
    auto const e = static_cast< std::size_t >( face );
    if( edge_cells[e].size() != 1 || edge_facet[e] >= 0 )
    {
      throw ValidationError( "boundary tag on face " + std::to_string( face ) + " which is not an external boundary" );
    }
  }

  // Group facets by fracture id and find intersection nodes.
  std::vector<Index> fracture_ids;
  for( auto const & facet : prim.fracture_facets )
  {
    fracture_ids.push_back( facet.fracture_id );
  }
  std::sort( fracture_ids.begin(), fracture_ids.end() );
  fracture_ids.erase( std::unique( fracture_ids.begin(), fracture_ids.end() ), fracture_ids.end() );
  auto const fracture_pos = [&]( Index id ) {
    return static_cast< Index >( std::lower_bound( fracture_ids.begin(), fracture_ids.end(), id ) - fracture_ids.begin() );
  };
  auto const nf = static_cast< Index >( fracture_ids.size() );

  std::vector<std::vector<Index>> fracture_facets( static_cast< std::size_t >( nf ) );
  for( std::size_t f = 0; f < prim.fracture_facets.size(); ++f )
  {
    fracture_facets[static_cast< std::size_t >( fracture_pos( prim.fracture_facets[f].fracture_id ) )].push_back(
      static_cast< Index >( f ) );
  }

  std::map<Index, std::set<Index>> node_fractures;
  std::map<std::pair<Index, Index>, int> node_fracture_count;
  for( auto const & facet : prim.fracture_facets )
  {
    Index const k = fracture_pos( facet.fracture_id );
    for( Index n : facet.nodes )
    {
      node_fractures[n].insert( k );
      if( ++node_fracture_count[{ n, k }] > 2 )
      {
        throw ValidationError( "fracture " + std::to_string( facet.fracture_id ) + " branches at " + node_str( n ) );
      }
    }
  }
  std::vector<Index> intersection_nodes;
  for( auto const & [n, ks] : node_fractures )
  {
    if( ks.size() >= 2 )
    {
      intersection_nodes.push_back( n );
    }
  }

  std::vector<char> node_on_boundary( prim.nodes.size(), 0 );
  std::vector<std::string> node_boundary_tag( prim.nodes.size() );
  for( std::size_t e = edges.size(); e-- > 0; )
  {
    if( edge_cells[e].size() == 1 )
    {
      auto tag_it = prim.boundary_tags.find( static_cast< Index >( e ) );
      for( Index n : edges[e] )
      {
        node_on_boundary[static_cast< std::size_t >( n )] = 1;
        if( tag_it != prim.boundary_tags.end() )
        {
          node_boundary_tag[static_cast< std::size_t >( n )] = tag_it->second;
        }
      }
    }
  }

  MdMesh mesh;
  mesh.m_num_fractures = nf;

  // Matrix subdomain.
  Subdomain matrix;
  matrix.id = 0;
  matrix.dim = 2;
  for( auto const & c : prim.cells_2d )
  {
    Vec2 const & a = prim.nodes[c[0]];
    Vec2 const & b = prim.nodes[c[1]];
    Vec2 const & d = prim.nodes[c[2]];
    matrix.cell_centers.push_back( ( a + b + d ) / 3.0 );
    matrix.cell_measures.push_back( signed_area( a, b, d ) );
    matrix.cell_nodes.push_back( { c[0], c[1], c[2] } );
  }
  matrix.cell_faces.resize( prim.cells_2d.size() );

  // Matrix faces; fracture edges produce one face per side.
  std::vector<std::array<Index, 2>> facet_faces( prim.fracture_facets.size(), { -1, -1 } );
  for( std::size_t e = 0; e < edges.size(); ++e )
  {
    Vec2 const & a = prim.nodes[edges[e][0]];
    Vec2 const & b = prim.nodes[edges[e][1]];
    Vec2 const center = 0.5 * ( a + b );
    double const length = norm( b - a );
    Vec2 const unit_normal = perp( b - a ) / length;
    auto const outward = [&]( Index cell ) {
      Vec2 const to_face = center - matrix.cell_centers[static_cast< std::size_t >( cell )];
      return dot( to_face, unit_normal ) >= 0.0 ? unit_normal : -unit_normal;
    };
    auto const push_face = [&]( Face face ) {
      auto const idx = static_cast< Index >( matrix.faces.size() );
      for( Index cell : face.cells )
      {
        if( cell >= 0 )
        {
          matrix.cell_faces[static_cast< std::size_t >( cell )].push_back( idx );
        }
      }
      matrix.faces.push_back( std::move( face ) );
      return idx;
    };

    auto const & cells = edge_cells[e];
    if( edge_facet[e] >= 0 )
    {
      for( std::size_t s = 0; s < 2; ++s )
      {
        Face face{ center, length, outward( cells[s] ), { cells[s], -1 }, FaceKind::InternalBoundary, "", -1, -1 };
        facet_faces[static_cast< std::size_t >( edge_facet[e] )][s] = push_face( std::move( face ) );
      }
    }
    else if( cells.size() == 2 )
    {
      push_face( Face{ center, length, outward( cells[0] ), { cells[0], cells[1] }, FaceKind::Interior, "", -1, -1 } );
    }
    else
    {
      auto tag_it = prim.boundary_tags.find( static_cast< Index >( e ) );
      push_face( Face{ center, length, outward( cells[0] ), { cells[0], -1 }, FaceKind::ExternalBoundary,
                       tag_it == prim.boundary_tags.end() ? std::string{} : tag_it->second, -1, -1 } );
    }
  }
  mesh.m_subdomains.push_back( std::move( matrix ) );

  // Fracture subdomains and their matrix interfaces.
  std::vector<std::vector<std::pair<Index, Index>>> fracture_point_faces( static_cast< std::size_t >( nf ) );
  for( Index k = 0; k < nf; ++k )
  {
    Subdomain frac;
    frac.id = 1 + k;
    frac.dim = 1;
    frac.label = fracture_ids[static_cast< std::size_t >( k )];
    Interface side_j{ 2 * k, 0, 1 + k, Side::J, {} };
    Interface side_k{ 2 * k + 1, 0, 1 + k, Side::K, {} };

    auto const & facets = fracture_facets[static_cast< std::size_t >( k )];
    std::map<Index, std::vector<Index>> node_cells;
    std::vector<Index> node_order;
    for( std::size_t m = 0; m < facets.size(); ++m )
    {
      auto const & facet = prim.fracture_facets[static_cast< std::size_t >( facets[m] )];
      Vec2 const & a = prim.nodes[facet.nodes[0]];
      Vec2 const & b = prim.nodes[facet.nodes[1]];
      double const length = norm( b - a );
      Vec2 const tangent = ( b - a ) / length;
      Vec2 normal = perp( tangent );
      if( normal.y < -1e-12 || ( std::abs( normal.y ) <= 1e-12 && normal.x < 0.0 ) )
      {
        normal = -normal;
      }
      Vec2 const center = 0.5 * ( a + b );
      frac.cell_centers.push_back( center );
      frac.cell_measures.push_back( length );
      frac.cell_nodes.push_back( { facet.nodes[0], facet.nodes[1] } );
      frac.cell_normals.push_back( normal );
      frac.cell_tangents.push_back( perp( normal ) * -1.0 );

      auto const & sides = facet_faces[static_cast< std::size_t >( facets[m] )];
      auto const & f0 = mesh.m_subdomains[0].faces[static_cast< std::size_t >( sides[0] )];
      // The j face has outward normal +n_l.
      bool const first_is_j = dot( f0.normal, normal ) > 0.0;
      Index const jf = first_is_j ? sides[0] : sides[1];
      Index const kf = first_is_j ? sides[1] : sides[0];
      auto & mfaces = mesh.m_subdomains[0].faces;
      mfaces[static_cast< std::size_t >( jf )].normal = normal;
      mfaces[static_cast< std::size_t >( kf )].normal = -normal;
      mfaces[static_cast< std::size_t >( jf )].interface = side_j.id;
      mfaces[static_cast< std::size_t >( jf )].mortar = static_cast< Index >( m );
      mfaces[static_cast< std::size_t >( kf )].interface = side_k.id;
      mfaces[static_cast< std::size_t >( kf )].mortar = static_cast< Index >( m );
      side_j.cells.push_back( { jf, static_cast< Index >( m ), length } );
      side_k.cells.push_back( { kf, static_cast< Index >( m ), length } );

      for( Index n : facet.nodes )
      {
        if( node_cells.find( n ) == node_cells.end() )
        {
          node_order.push_back( n );
        }
        node_cells[n].push_back( static_cast< Index >( m ) );
      }
    }

    frac.cell_faces.resize( facets.size() );
    for( Index n : node_order )
    {
      auto const & cells = node_cells[n];
      Vec2 const & p = prim.nodes[static_cast< std::size_t >( n )];
      auto const toward_node = [&]( Index cell ) {
        Vec2 const d = p - frac.cell_centers[static_cast< std::size_t >( cell )];
        return d / norm( d );
      };
      auto const push_face = [&]( Face face ) {
        auto const idx = static_cast< Index >( frac.faces.size() );
        for( Index cell : face.cells )
        {
          if( cell >= 0 )
          {
            frac.cell_faces[static_cast< std::size_t >( cell )].push_back( idx );
          }
        }
        frac.faces.push_back( std::move( face ) );
        return idx;
      };
      bool const is_intersection = std::binary_search( intersection_nodes.begin(), intersection_nodes.end(), n );
      if( is_intersection )
      {
        for( Index cell : cells )
        {
          Index const idx = push_face( Face{ p, 1.0, toward_node( cell ), { cell, -1 }, FaceKind::InternalBoundary, "", -1, -1 } );
          fracture_point_faces[static_cast< std::size_t >( k )].push_back( { n, idx } );
        }
      }
      else if( cells.size() == 2 )
      {
        push_face( Face{ p, 1.0, toward_node( cells[0] ), { cells[0], cells[1] }, FaceKind::Interior, "", -1, -1 } );
      }
      else if( node_on_boundary[static_cast< std::size_t >( n )] )
      {
        push_face( Face{ p, 1.0, toward_node( cells[0] ), { cells[0], -1 }, FaceKind::ExternalBoundary,
                         node_boundary_tag[static_cast< std::size_t >( n )], -1, -1 } );
      }
      else
      {
        push_face( Face{ p, 1.0, toward_node( cells[0] ), { cells[0], -1 }, FaceKind::ImmersedTip, "", -1, -1 } );
      }
    }
    mesh.m_subdomains.push_back( std::move( frac ) );
    mesh.m_interfaces.push_back( std::move( side_j ) );
    mesh.m_interfaces.push_back( std::move( side_k ) );
  }

  // Intersection points and fracture-point interfaces.
  for( std::size_t q = 0; q < intersection_nodes.size(); ++q )
  {
    Index const n = intersection_nodes[q];
    Subdomain point;
    point.id = 1 + nf + static_cast< Index >( q );
    point.dim = 0;
    point.label = n;
    point.cell_centers.push_back( prim.nodes[static_cast< std::size_t >( n )] );
    point.cell_measures.push_back( 1.0 );
    point.cell_nodes.push_back( { n } );
    mesh.m_subdomains.push_back( std::move( point ) );
  }
  for( Index k = 0; k < nf; ++k )
  {
    for( std::size_t q = 0; q < intersection_nodes.size(); ++q )
    {
      Index const n = intersection_nodes[q];
      Interface intf{ static_cast< Index >( mesh.m_interfaces.size() ), 1 + k, 1 + nf + static_cast< Index >( q ), Side::None, {} };
      for( auto const & [node, face] : fracture_point_faces[static_cast< std::size_t >( k )] )
      {
        if( node != n )
        {
          continue;
        }
        auto & f = mesh.m_subdomains[static_cast< std::size_t >( 1 + k )].faces[static_cast< std::size_t >( face )];
        f.interface = intf.id;
        f.mortar = intf.num_cells();
        intf.cells.push_back( { face, 0, 1.0 } );
      }
      if( !intf.cells.empty() )
      {
        mesh.m_interfaces.push_back( std::move( intf ) );
      }
    }
  }

  // Displacement nodes: split each geometric node into the connected fans of its triangles,
  // where fans are separated by fracture facets.
  auto & layout = mesh.m_mechanics;
  std::vector<std::vector<Index>> node_tris( prim.nodes.size() );
  for( std::size_t t = 0; t < prim.cells_2d.size(); ++t )
  {
    for( Index n : prim.cells_2d[t] )
    {
      node_tris[static_cast< std::size_t >( n )].push_back( static_cast< Index >( t ) );
    }
  }
  layout.cell_nodes.assign( prim.cells_2d.size(), { -1, -1, -1 } );
  for( Index n = 0; n < num_nodes; ++n )
  {
    auto const & tris = node_tris[static_cast< std::size_t >( n )];
    DisjointSet ds( tris.size() );
    if( node_fractures.count( n ) )
    {
      for( std::size_t a = 0; a < tris.size(); ++a )
      {
        for( std::size_t b = a + 1; b < tris.size(); ++b )
        {
          auto const & ta = prim.cells_2d[static_cast< std::size_t >( tris[a] )];
          auto const & tb = prim.cells_2d[static_cast< std::size_t >( tris[b] )];
          for( Index m : ta )
          {
            if( m == n || std::find( tb.begin(), tb.end(), m ) == tb.end() )
            {
              continue;
            }
            if( edge_facet[static_cast< std::size_t >( edge_index.at( make_edge( n, m ) ) )] < 0 )
            {
              ds.unite( a, b );
            }
          }
        }
      }
    }
    else
    {
      for( std::size_t a = 1; a < tris.size(); ++a )
      {
        ds.unite( 0, a );
      }
    }
    std::map<std::size_t, Index> root_copy;
    for( std::size_t a = 0; a < tris.size(); ++a )
    {
      std::size_t const root = ds.find( a );
      auto it = root_copy.find( root );
      if( it == root_copy.end() )
      {
        it = root_copy.emplace( root, layout.num_nodes() ).first;
        layout.node_origin.push_back( n );
      }
      auto const & tri = prim.cells_2d[static_cast< std::size_t >( tris[a] )];
      auto const local = std::find( tri.begin(), tri.end(), n ) - tri.begin();
      layout.cell_nodes[static_cast< std::size_t >( tris[a] )][static_cast< std::size_t >( local )] = it->second;
    }
  }
  auto const & mfaces = mesh.m_subdomains[0].faces;
  layout.face_bubble.assign( mfaces.size(), -1 );
  for( std::size_t f = 0; f < mfaces.size(); ++f )
  {
    if( mfaces[f].kind == FaceKind::InternalBoundary )
    {
      layout.face_bubble[f] = layout.num_bubbles();
      layout.bubble_face.push_back( static_cast< Index >( f ) );
    }
  }

  mesh.m_primitives = std::move( prim );
  return mesh;
}

} // namespace fracpm::mdgeom
