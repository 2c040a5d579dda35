#include "fracpm/mdgeom/operators.hpp"

#include <cmath>

namespace fracpm::mdgeom
{

std::vector<double> project_from_lower( Interface const & intf, std::span<double const> cell_field )
{
  std::vector<double> out( intf.cells.size() );
  for( std::size_t m = 0; m < intf.cells.size(); ++m )
  {
    out[m] = cell_field[static_cast< std::size_t >( intf.cells[m].lower_cell )];
  }
  return out;
}

std::vector<double> project_from_higher( Interface const & intf, std::span<double const> face_field )
{
  std::vector<double> out( intf.cells.size() );
  for( std::size_t m = 0; m < intf.cells.size(); ++m )
  {
    out[m] = face_field[static_cast< std::size_t >( intf.cells[m].higher_face )];
  }
  return out;
}

std::vector<double> transfer_to_lower( Interface const & intf,
                                       std::span<double const> mortar_field,
                                       Index num_lower_cells )
{
  if( mortar_field.size() != intf.cells.size() )
  {
    throw Error( "transfer_to_lower: mortar field size does not match interface" );
  }
  std::vector<double> out( static_cast< std::size_t >( num_lower_cells ), 0.0 );
  for( std::size_t m = 0; m < intf.cells.size(); ++m )
  {
    out[static_cast< std::size_t >( intf.cells[m].lower_cell )] += mortar_field[m];
  }
  return out;
}

std::vector<Vec2> displacement_jump( std::span<Vec2 const> u_j, std::span<Vec2 const> u_k )
{
  if( u_j.size() != u_k.size() )
  {
    throw Error( "displacement_jump: mismatched mortar cardinalities (" + std::to_string( u_j.size() ) +
                 " vs " + std::to_string( u_k.size() ) + ")" );
  }
  std::vector<Vec2> jump( u_j.size() );
  for( std::size_t i = 0; i < u_j.size(); ++i )
  {
    jump[i] = u_k[i] - u_j[i];
  }
  return jump;
}

Decomposition decompose( Vec2 const & v, Vec2 const & n )
{
  double const vn = dot( v, n );
  return { vn, v - vn * n };
}

double specific_volume( int dim, double aperture )
{
  if( dim >= kAmbientDim )
  {
    return 1.0;
  }
  if( !( aperture > 0.0 ) )
  {
    throw Error( "specific_volume: nonpositive aperture " + std::to_string( aperture ) +
                 " on a " + std::to_string( dim ) + "D cell" );
  }
  return std::pow( aperture, kAmbientDim - dim );
}

} // namespace fracpm::mdgeom
