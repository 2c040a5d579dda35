#pragma once

#include "fracpm/mdgeom/mesh.hpp"

#include <span>
#include <vector>

namespace fracpm::mdgeom
{

/// Restriction of a lower-dimensional cell field onto the mortar cells (Pi from below).
std::vector<double> project_from_lower( Interface const & intf, std::span<double const> cell_field );

/// Restriction of a higher-dimensional face field onto the mortar cells (Pi from above).
std::vector<double> project_from_higher( Interface const & intf, std::span<double const> face_field );

/// Extensive transfer of a mortar field to the lower neighbor (Xi): sums over mortar cells per cell.
std::vector<double> transfer_to_lower( Interface const & intf,
                                       std::span<double const> mortar_field,
                                       Index num_lower_cells );

/// [[u]] = Xi_k u_k - Xi_j u_j per fracture cell.
std::vector<Vec2> displacement_jump( std::span<Vec2 const> u_j, std::span<Vec2 const> u_k );

struct Decomposition
{
  double normal = 0.0;
  Vec2 tangential;
};

Decomposition decompose( Vec2 const & v, Vec2 const & n );

/// a^(D-d); throws for a nonpositive aperture on a lower-dimensional cell.
double specific_volume( int dim, double aperture );

} // namespace fracpm::mdgeom
