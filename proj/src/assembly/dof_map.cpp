#include "fracpm/assembly/dof_map.hpp"

#include <algorithm>

namespace fracpm::assembly
{

DofMap::DofMap( mdgeom::MdMesh const & mesh )
{
  Index next = 0;
  m_begin.push_back( next );
  for( auto const & sd : mesh.subdomains() )
  {
    m_p_offset.push_back( next );
    next += sd.num_cells();
  }
  m_begin.push_back( next );
  auto const & mech = mesh.mechanics();
  m_bubble_begin = next + 2 * mech.num_nodes();
  next = m_bubble_begin + 2 * mech.num_bubbles();
  m_begin.push_back( next );
  for( auto const & intf : mesh.interfaces() )
  {
    if( mesh.subdomain( intf.lower ).dim == 1 )
    {
      m_uj_offset.push_back( next );
      next += 2 * intf.num_cells();
    }
    else
    {
      m_uj_offset.push_back( -1 );
    }
  }
  m_begin.push_back( next );
  for( auto const & intf : mesh.interfaces() )
  {
    m_vj_offset.push_back( next );
    next += intf.num_cells();
  }
  m_begin.push_back( next );
  for( Index k = 0; k < mesh.num_fractures(); ++k )
  {
    m_lambda_offset.push_back( next );
    next += 2 * mesh.subdomain( mesh.fracture_subdomain( k ) ).num_cells();
  }
  m_begin.push_back( next );
  m_size = next;
}

DofMap::Block DofMap::block_of( Index dof ) const
{
  if( dof < 0 || dof >= m_size )
  {
    throw Error( "dof index out of range" );
  }
  auto const it = std::upper_bound( m_begin.begin(), m_begin.end(), dof );
  return static_cast< Block >( ( it - m_begin.begin() ) - 1 );
}

} // namespace fracpm::assembly
