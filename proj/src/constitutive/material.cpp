#include "fracpm/constitutive/material.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace fracpm::constitutive
{

void MaterialParams::validate() const
{
  std::vector<std::string> problems;
  auto positive = [&]( double v, char const * name ) {
    if( !( v > 0.0 ) )
    {
      problems.push_back( std::string( name ) + " must be positive" );
    }
  };
  positive( friction_coefficient, "friction_coefficient" );
  positive( matrix_permeability, "matrix_permeability" );
  positive( shear_modulus, "shear_modulus" );
  positive( lame_lambda, "lame_lambda" );
  positive( fluid_compressibility, "fluid_compressibility" );
  positive( reference_fluid_density, "reference_fluid_density" );
  positive( solid_density, "solid_density" );
  positive( fluid_viscosity, "fluid_viscosity" );
  positive( residual_aperture, "residual_aperture" );
  positive( reference_pressure, "reference_pressure" );
  positive( mass_scale, "mass_scale" );
  if( !( biot_coefficient > 0.0 && biot_coefficient <= 1.0 ) )
  {
    problems.push_back( "biot_coefficient must lie in (0, 1]" );
  }
  if( !( reference_porosity > 0.0 && reference_porosity < 1.0 ) )
  {
    problems.push_back( "reference_porosity must lie in (0, 1)" );
  }
  if( !( dilation_angle >= 0.0 && dilation_angle < 90.0 ) )
  {
    problems.push_back( "dilation_angle must lie in [0, 90) degrees" );
  }
  if( !problems.empty() )
  {
    std::ostringstream msg;
    msg << "invalid material parameters:";
    for( auto const & p : problems )
    {
      msg << "\n  " << p;
    }
    throw ValidationError( msg.str() );
  }
}

bool MaterialParams::set( std::string const & key, double value )
{
  static std::map<std::string, double MaterialParams::*> const fields{
    { "biot_coefficient", &MaterialParams::biot_coefficient },
    { "friction_coefficient", &MaterialParams::friction_coefficient },
    { "matrix_permeability", &MaterialParams::matrix_permeability },
    { "reference_porosity", &MaterialParams::reference_porosity },
    { "shear_modulus", &MaterialParams::shear_modulus },
    { "lame_lambda", &MaterialParams::lame_lambda },
    { "fluid_compressibility", &MaterialParams::fluid_compressibility },
    { "reference_fluid_density", &MaterialParams::reference_fluid_density },
    { "solid_density", &MaterialParams::solid_density },
    { "fluid_viscosity", &MaterialParams::fluid_viscosity },
    { "residual_aperture", &MaterialParams::residual_aperture },
    { "dilation_angle", &MaterialParams::dilation_angle },
    { "reference_pressure", &MaterialParams::reference_pressure },
    { "mass_scale", &MaterialParams::mass_scale },
  };
  if( key == "gravity_x" )
  {
    gravity.x = value;
    return true;
  }
  if( key == "gravity_y" )
  {
    gravity.y = value;
    return true;
  }
  auto it = fields.find( key );
  if( it == fields.end() )
  {
    return false;
  }
  this->*( it->second ) = value;
  return true;
}

ScaledParams scale( MaterialParams const & p )
{
  double const s = p.mass_scale;
  return ScaledParams{
    p.biot_coefficient,
    p.friction_coefficient,
    p.matrix_permeability,
    p.reference_porosity,
    p.shear_modulus / s,
    p.lame_lambda / s,
    p.fluid_compressibility * s,
    p.reference_fluid_density / s,
    p.solid_density / s,
    p.fluid_viscosity / s,
    p.residual_aperture,
    std::tan( p.dilation_angle * std::numbers::pi / 180.0 ),
    p.reference_pressure / s,
    p.gravity,
    s,
  };
}

} // namespace fracpm::constitutive
