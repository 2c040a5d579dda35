#pragma once

#include "fracpm/mdgeom/mesh.hpp"

#include <vector>

namespace fracpm::assembly
{

/**
 * Block layout of the unknown vector: p | u | u_j | v_j | lambda.
 *
 * p: one per cell of every subdomain. u: two components per displacement node followed by
 * two per face bubble. u_j: two Cartesian components per mortar cell of each matrix-fracture
 * interface. v_j: one per mortar cell of every interface. lambda: (normal, tangential)
 * components per fracture cell.
 */
class DofMap
{
public:
  enum class Block
  {
    Pressure,
    Displacement,
    InterfaceDisplacement,
    InterfaceFlux,
    Traction,
  };

  explicit DofMap( mdgeom::MdMesh const & mesh );

  Index size() const { return m_size; }
  Index block_begin( Block b ) const { return m_begin[static_cast< std::size_t >( b )]; }
  Index block_end( Block b ) const { return m_begin[static_cast< std::size_t >( b ) + 1]; }
  Block block_of( Index dof ) const;

  Index pressure( Index subdomain, Index cell ) const { return m_p_offset[static_cast< std::size_t >( subdomain )] + cell; }
  Index node( Index node, int comp ) const { return block_begin( Block::Displacement ) + 2 * node + comp; }
  Index bubble( Index bubble, int comp ) const { return m_bubble_begin + 2 * bubble + comp; }
  /// -1 for interfaces without displacement (fracture-point).
  Index interface_displacement( Index intf, Index mortar, int comp ) const
  {
    Index const off = m_uj_offset[static_cast< std::size_t >( intf )];
    return off < 0 ? -1 : off + 2 * mortar + comp;
  }
  Index interface_flux( Index intf, Index mortar ) const { return m_vj_offset[static_cast< std::size_t >( intf )] + mortar; }
  /// comp 0 = normal, 1 = tangential.
  Index traction( Index fracture, Index cell, int comp ) const
  {
    return m_lambda_offset[static_cast< std::size_t >( fracture )] + 2 * cell + comp;
  }

private:
  Index m_size = 0;
  std::vector<Index> m_begin;
  std::vector<Index> m_p_offset;
  Index m_bubble_begin = 0;
  std::vector<Index> m_uj_offset;
  std::vector<Index> m_vj_offset;
  std::vector<Index> m_lambda_offset;
};

} // namespace fracpm::assembly
