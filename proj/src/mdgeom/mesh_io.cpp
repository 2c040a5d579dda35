#include "fracpm/mdgeom/mesh.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace fracpm::mdgeom
{

using nlohmann::json;

MdMesh parse_mesh_json( std::string const & text )
{
  json doc;
  try
  {
    doc = json::parse( text );
  }
  catch( json::exception const & e )
  {
    throw ValidationError( std::string( "malformed mesh file: " ) + e.what() );
  }

  MeshPrimitives prim;
  try
  {
    for( auto const & node : doc.at( "nodes" ) )
    {
      if( node.size() != 2 )
      {
        throw ValidationError( "malformed mesh file: node entries must be [x, y]" );
      }
      prim.nodes.push_back( { node.at( 0 ).get<double>(), node.at( 1 ).get<double>() } );
    }
    for( auto const & cell : doc.at( "cells_2d" ) )
    {
      if( cell.size() != 3 )
      {
        throw ValidationError( "malformed mesh file: cells_2d entries must list three nodes" );
      }
      prim.cells_2d.push_back( { cell.at( 0 ).get<Index>(), cell.at( 1 ).get<Index>(), cell.at( 2 ).get<Index>() } );
    }
    if( doc.contains( "fracture_facets" ) )
    {
      for( auto const & facet : doc.at( "fracture_facets" ) )
      {
        auto const & nodes = facet.at( "nodes" );
        if( nodes.size() != 2 )
        {
          throw ValidationError( "malformed mesh file: fracture facets have two nodes" );
        }
        prim.fracture_facets.push_back(
          { { nodes.at( 0 ).get<Index>(), nodes.at( 1 ).get<Index>() }, facet.at( "fracture_id" ).get<Index>() } );
      }
    }
    if( doc.contains( "boundary_tags" ) )
    {
      for( auto const & [key, value] : doc.at( "boundary_tags" ).items() )
      {
        std::size_t used = 0;
        Index face = -1;
        try
        {
          face = std::stoll( key, &used );
        }
        catch( std::exception const & )
        {
          used = 0;
        }
        if( used != key.size() )
        {
          throw ValidationError( "malformed mesh file: boundary tag key '" + key + "' is not a face index" );
        }
        prim.boundary_tags[face] = value.get<std::string>();
      }
    }
  }
  catch( json::exception const & e )
  {
    throw ValidationError( std::string( "malformed mesh file: " ) + e.what() );
  }
  return MdMesh::from_primitives( std::move( prim ) );
}

MdMesh load_mesh( std::string const & path )
{
  std::ifstream in( path );
  if( !in )
  {
    throw ValidationError( "cannot open mesh file " + path );
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_mesh_json( buffer.str() );
}

std::string mesh_to_json( MdMesh const & mesh )
{
  auto const & prim = mesh.primitives();
  json doc;
  doc["nodes"] = json::array();
  for( auto const & p : prim.nodes )
  {
    doc["nodes"].push_back( { p.x, p.y } );
  }
  doc["cells_2d"] = json::array();
  for( auto const & c : prim.cells_2d )
  {
    doc["cells_2d"].push_back( { c[0], c[1], c[2] } );
  }
  doc["fracture_facets"] = json::array();
  for( auto const & f : prim.fracture_facets )
  {
    doc["fracture_facets"].push_back( { { "nodes", { f.nodes[0], f.nodes[1] } }, { "fracture_id", f.fracture_id } } );
  }
  doc["boundary_tags"] = json::object();
  for( auto const & [face, tag] : prim.boundary_tags )
  {
    doc["boundary_tags"][std::to_string( face )] = tag;
  }
  return doc.dump();
}

void save_mesh( MdMesh const & mesh, std::string const & path )
{
  std::ofstream out( path );
  if( !out )
  {
    throw Error( "cannot write mesh file " + path );
  }
  out << mesh_to_json( mesh ) << '\n';
}

} // namespace fracpm::mdgeom
