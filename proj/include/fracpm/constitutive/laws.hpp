#pragma once

#include "fracpm/ad/scalar.hpp"
#include "fracpm/constitutive/material.hpp"

#include <array>
#include <span>

namespace fracpm::constitutive
{

using ad::value_of;

/// Smallest aperture used in assembly; smaller values are clamped and counted.
inline constexpr double kApertureFloor = 1e-12;

template< typename S >
using Tensor2 = std::array<std::array<S, 2>, 2>;

template< typename S >
struct Vector2
{
  S x{};
  S y{};
};

/// Slightly compressible fluid: rho = rho_ref exp(gamma (p - p_ref)).
template< typename S >
S fluid_density( S const & p, ScaledParams const & m )
{
  using ad::exp;
  return m.rho_f_ref * exp( ( p - m.p_ref ) * m.compressibility );
}

/// Matrix porosity; fractures and intersections use porosity one.
template< typename S >
S matrix_porosity( S const & p, S const & div_u, ScaledParams const & m )
{
  double const coeff = ( m.alpha - m.phi_ref ) * ( 1.0 - m.alpha ) / ( m.lame_lambda + 2.0 * m.shear_modulus / 3.0 );
  return m.phi_ref + ( p - m.p_ref ) * coeff + div_u * m.alpha;
}

/// Cubic law a^2/12, used for fracture cells and for interfaces inheriting the fracture aperture.
template< typename S >
S cubic_law_permeability( S const & aperture )
{
  return aperture * aperture / 12.0;
}

/// Intersection permeability: arithmetic mean of the cubic-law values of the meeting fracture cells.
double intersection_permeability( std::span<double const> fracture_apertures );

/// Residual aperture plus normal opening.
template< typename S >
S fracture_aperture( S const & jump_n, ScaledParams const & m )
{
  return jump_n + m.a_ref;
}

/// Intersection aperture: mean of the apertures of the meeting fracture cells.
template< typename S >
S intersection_aperture( std::span<S const> fracture_apertures )
{
  if( fracture_apertures.empty() )
  {
    throw Error( "intersection_aperture: no neighboring fracture cells" );
  }
  S sum( 0.0 );
  for( auto const & a : fracture_apertures )
  {
    sum += a;
  }
  return sum / static_cast< double >( fracture_apertures.size() );
}

/// Clamp to kApertureFloor; the clamped value carries no derivative.
template< typename S >
S clamp_aperture( S const & a, int & clamp_count )
{
  if( value_of( a ) < kApertureFloor )
  {
    ++clamp_count;
    return S( kApertureFloor );
  }
  return a;
}

/// Shear dilation gap g = tan(psi) |[[u]]_tau|, with subgradient 0 at zero slip.
template< typename S >
S gap( S const & jump_tau_norm, ScaledParams const & m )
{
  return jump_tau_norm * m.tan_dilation;
}

/// sigma = G (grad u + grad u^T) + lambda tr(grad u) I - alpha p I
template< typename S >
Tensor2<S> poroelastic_stress( Tensor2<S> const & grad_u, S const & p, ScaledParams const & m )
{
  S const trace = grad_u[0][0] + grad_u[1][1];
  S const iso = trace * m.lame_lambda - p * m.alpha;
  Tensor2<S> sigma;
  sigma[0][0] = grad_u[0][0] * ( 2.0 * m.shear_modulus ) + iso;
  sigma[1][1] = grad_u[1][1] * ( 2.0 * m.shear_modulus ) + iso;
  sigma[0][1] = ( grad_u[0][1] + grad_u[1][0] ) * m.shear_modulus;
  sigma[1][0] = sigma[0][1];
  return sigma;
}

/// F = (phi rho_f + (1 - phi) rho_s) g
template< typename S >
Vector2<S> body_force( S const & phi, S const & rho_f, ScaledParams const & m )
{
  S const rho = phi * rho_f + ( S( 1.0 ) - phi ) * m.rho_s;
  return { rho * m.gravity.x, rho * m.gravity.y };
}

/// Interface density: higher side if v_j > 0, lower side if v_j <= 0.
template< typename S >
S upstream_density( double v_j, S const & rho_higher, S const & rho_lower )
{
  return v_j > 0.0 ? rho_higher : rho_lower;
}

} // namespace fracpm::constitutive
