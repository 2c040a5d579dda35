#include "fracpm/constitutive/laws.hpp"

namespace fracpm::constitutive
{

double intersection_permeability( std::span<double const> fracture_apertures )
{
  if( fracture_apertures.empty() )
  {
    throw Error( "intersection_permeability: missing aperture" );
  }
  double sum = 0.0;
  for( double a : fracture_apertures )
  {
    if( !( a > 0.0 ) )
    {
      throw Error( "intersection_permeability: nonpositive aperture" );
    }
    sum += cubic_law_permeability( a );
  }
  return sum / static_cast< double >( fracture_apertures.size() );
}

} // namespace fracpm::constitutive
