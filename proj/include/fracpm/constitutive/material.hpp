#pragma once

#include "fracpm/common.hpp"

#include <map>
#include <string>

namespace fracpm::constitutive
{

/**
 * Physical constants in unscaled SI units. Defaults reproduce the reference rock and
 * fluid of the hydraulic stimulation setup (crystalline rock around 2 km depth).
 */
struct MaterialParams
{
  double biot_coefficient = 0.8;             ///< alpha [-]
  double friction_coefficient = 0.5;         ///< F [-]
  double matrix_permeability = 1.0e-15;      ///< k [m^2]
  double reference_porosity = 1.0e-2;        ///< phi_ref [-]
  double shear_modulus = 1.7e10;             ///< G [Pa]
  double lame_lambda = 1.111e10;             ///< lambda_Lame [Pa]
  double fluid_compressibility = 0.4e-9;     ///< gamma [1/Pa]
  double reference_fluid_density = 1.0e3;    ///< rho_f,ref [kg/m^3]
  double solid_density = 2.7e3;              ///< rho_s [kg/m^3]
  double fluid_viscosity = 1.0e-3;           ///< eta [Pa s]
  double residual_aperture = 5.0e-4;         ///< a_ref [m]
  double dilation_angle = 5.0;               ///< psi [degrees]
  double reference_pressure = 2.0e7;         ///< p_ref [Pa]
  Vec2 gravity{ 0.0, 0.0 };                  ///< g [m/s^2]
  double mass_scale = 1.0e9;                 ///< unit of mass [kg]

  /// Throws ValidationError listing every violated bound.
  void validate() const;

  /// Assign by config key (biot_coefficient, friction_coefficient, ...). Returns false on unknown key.
  bool set( std::string const & key, double value );
};

/**
 * The same constants in the internal unit system where mass is measured in units of
 * mass_scale kg. Pressures and moduli come out numerically in GPa for the default scale.
 */
struct ScaledParams
{
  double alpha;
  double friction;
  double permeability;
  double phi_ref;
  double shear_modulus;
  double lame_lambda;
  double compressibility;
  double rho_f_ref;
  double rho_s;
  double viscosity;
  double a_ref;
  double tan_dilation;
  double p_ref;
  Vec2 gravity;
  double mass_scale;

  /// Pa -> internal stress unit.
  double stress( double pascal ) const { return pascal / mass_scale; }
  /// kg/(m^2 s) -> internal mass flux unit.
  double mass_flux( double si ) const { return si / mass_scale; }
};

ScaledParams scale( MaterialParams const & params );

} // namespace fracpm::constitutive
