#include "fracpm/contact/kernels.hpp"

namespace fracpm::contact
{

std::string to_string( ContactState s )
{
  switch( s )
  {
    case ContactState::Open: return "open";
    case ContactState::Stick: return "stick";
    case ContactState::Slip: return "slip";
  }
  return "unknown";
}

} // namespace fracpm::contact
