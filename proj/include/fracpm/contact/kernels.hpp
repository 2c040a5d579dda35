#pragma once

#include "fracpm/ad/scalar.hpp"
#include "fracpm/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace fracpm::contact
{

template< typename S, int N >
using Tangent = std::array<S, N>;

enum class ContactState
{
  Open,
  Stick,
  Slip,
};

std::string to_string( ContactState s );

enum class Branch
{
  First,
  Second,
};

/// Branch of max(a, b) whose derivative is used. Ties go to the second argument.
constexpr Branch derivative_selection( double a, double b )
{
  return a > b ? Branch::First : Branch::Second;
}

/// Characteristic function of the tangential condition. The exact kernel switches on b <= 0,
/// the regularized one on b == 0.
enum class Guard
{
  NonPositive,
  Zero,
};

template< typename S >
bool chi( S const & b, Guard guard )
{
  double const v = ad::value_of( b );
  return guard == Guard::NonPositive ? v <= 0.0 : v == 0.0;
}

/**
 * Per-cell inputs of the contact conditions. The slip increment is jump_tau - jump_tau_prev;
 * the time step is absorbed into c.
 */
template< typename S, int N >
struct ContactInputs
{
  S lambda_n{};
  Tangent<S, N> lambda_tau{};
  S jump_n{};
  Tangent<S, N> jump_tau{};
  Tangent<double, N> jump_tau_prev{};
  S gap{};
  double c = 1.0;
  double friction = 0.5;

  S friction_bound() const { return lambda_n * ( -friction ); }

  Tangent<S, N> slip_increment() const
  {
    Tangent<S, N> out;
    for( int i = 0; i < N; ++i )
    {
      out[i] = jump_tau[i] - jump_tau_prev[i];
    }
    return out;
  }
};

template< typename S, int N >
struct Traction
{
  S normal{};
  Tangent<S, N> tangential{};
};

namespace detail
{

template< typename A, typename B >
auto smax( A const & a, B const & b )
{
  using R = decltype( a + b );
  return derivative_selection( ad::value_of( a ), ad::value_of( b ) ) == Branch::First ? R( a ) : R( b );
}

template< typename S, int N >
S norm( Tangent<S, N> const & v )
{
  using ad::abs;
  using ad::sqrt;
  if constexpr( N == 1 )
  {
    return abs( v[0] );
  }
  else
  {
    S sq( 0.0 );
    for( int i = 0; i < N; ++i )
    {
      sq += v[i] * v[i];
    }
    return sqrt( sq );
  }
}

/// lambda_anchor + c * increment
template< typename S, int N >
Tangent<S, N> augmented( Tangent<S, N> const & anchor, Tangent<S, N> const & incr, double c )
{
  Tangent<S, N> out;
  for( int i = 0; i < N; ++i )
  {
    out[i] = anchor[i] + incr[i] * c;
  }
  return out;
}

template< typename S, int N >
Tangent<S, N> tangential_residual( S const & b,
                                   Tangent<S, N> const & lambda_tau,
                                   Tangent<S, N> const & trial,
                                   Guard guard )
{
  if( chi( b, guard ) )
  {
    return lambda_tau;
  }
  S const m = smax( b, norm<S, N>( trial ) );
  Tangent<S, N> out;
  for( int i = 0; i < N; ++i )
  {
    out[i] = b * trial[i] - m * lambda_tau[i];
  }
  return out;
}

} // namespace detail

/// C_n = lambda_n + max(0, -lambda_n - c (jump_n - g))
template< typename S, int N >
S complementarity_normal( ContactInputs<S, N> const & in )
{
  return in.lambda_n + detail::smax( 0.0, -in.lambda_n - ( in.jump_n - in.gap ) * in.c );
}

/// C_tau = chi lambda_tau + (1 - chi) [b (lambda_tau + c du_tau) - max(b, |lambda_tau + c du_tau|) lambda_tau]
template< typename S, int N >
Tangent<S, N> complementarity_tangential( ContactInputs<S, N> const & in )
{
  auto const trial = detail::augmented<S, N>( in.lambda_tau, in.slip_increment(), in.c );
  return detail::tangential_residual<S, N>( in.friction_bound(), in.lambda_tau, trial, Guard::NonPositive );
}

/// Throws unless the anchor traction lies in the friction cone.
template< int N >
void check_anchor( Traction<double, N> const & anchor, double friction )
{
  double const tol = 1e-12 * ( 1.0 + std::abs( anchor.normal ) );
  double const bound = -friction * anchor.normal;
  if( anchor.normal > tol || detail::norm<double, N>( anchor.tangential ) > bound + tol )
  {
    throw Error( "infeasible anchor traction for regularized contact conditions" );
  }
}

/**
 * Regularized complementarity functions, with the traction at the anchor (previous outer
 * iteration) inside the max arguments and the current unknown outside. The anchor must be
 * feasible.
 */
template< typename S, int N >
std::pair<S, Tangent<S, N>> regularized_complementarity( ContactInputs<S, N> const & in,
                                                         Traction<double, N> const & anchor )
{
  check_anchor<N>( anchor, in.friction );
  S const cn = in.lambda_n + detail::smax( 0.0, -anchor.normal - ( in.jump_n - in.gap ) * in.c );
  Tangent<S, N> anchor_tau;
  for( int i = 0; i < N; ++i )
  {
    anchor_tau[i] = S( anchor.tangential[i] );
  }
  auto const trial = detail::augmented<S, N>( anchor_tau, in.slip_increment(), in.c );
  auto const ct = detail::tangential_residual<S, N>( in.friction_bound(), in.lambda_tau, trial, Guard::Zero );
  return { cn, ct };
}

/// Relative slack on the friction bound in return_map, so that a projected traction whose
/// norm rounds a few ulps above b maps to itself.
inline constexpr double kConeSlack = 4.0 * std::numeric_limits<double>::epsilon();

/// Projection of a trial traction onto {lambda_n <= 0, |lambda_tau| <= -F lambda_n}.
template< int N >
Traction<double, N> return_map( double trial_n, Tangent<double, N> const & trial_tau, double friction )
{
  Traction<double, N> out;
  out.normal = trial_n <= 0.0 ? trial_n : 0.0;
  double const b = -friction * out.normal;
  double const t = detail::norm<double, N>( trial_tau );
  if( t <= b * ( 1.0 + kConeSlack ) )
  {
    out.tangential = trial_tau;
  }
  else
  {
    for( int i = 0; i < N; ++i )
    {
      out.tangential[i] = ( b * trial_tau[i] ) / t;
    }
  }
  return out;
}

/// The same projection written with max functions and the chi guard.
template< int N >
Traction<double, N> return_map_maxform( double trial_n, Tangent<double, N> const & trial_tau, double friction )
{
  Traction<double, N> out;
  out.normal = -std::max( 0.0, -trial_n );
  double const b = -friction * out.normal;
  double const x = ( b == 0.0 ) ? 1.0 : 0.0;
  double const den = ( x - 1.0 ) * std::max( b, detail::norm<double, N>( trial_tau ) ) + x;
  for( int i = 0; i < N; ++i )
  {
    out.tangential[i] = ( ( x - 1.0 ) * b * trial_tau[i] ) / den;
  }
  return out;
}

namespace detail
{

template< typename S, int N >
ContactState classify_with( ContactInputs<S, N> const & in,
                            double anchor_n,
                            Tangent<double, N> const & anchor_tau,
                            bool * unreachable )
{
  using ad::value_of;
  if( unreachable )
  {
    *unreachable = false;
  }
  double const normal_arg = -anchor_n - in.c * ( value_of( in.jump_n ) - value_of( in.gap ) );
  if( normal_arg <= 0.0 )
  {
    return ContactState::Open;
  }
  double const b = -in.friction * value_of( in.lambda_n );
  if( !( b > 0.0 ) )
  {
    if( unreachable )
    {
      *unreachable = true;
    }
    return ContactState::Open;
  }
  Tangent<double, N> trial;
  for( int i = 0; i < N; ++i )
  {
    trial[i] = anchor_tau[i] + in.c * ( value_of( in.jump_tau[i] ) - in.jump_tau_prev[i] );
  }
  return norm<double, N>( trial ) < b ? ContactState::Stick : ContactState::Slip;
}

} // namespace detail

/// Generalized contact state from the arguments of the max functions. Cells with b <= 0
/// outside the open set are reported as Open and flagged through `unreachable`.
template< typename S, int N >
ContactState classify( ContactInputs<S, N> const & in, bool * unreachable = nullptr )
{
  using ad::value_of;
  Tangent<double, N> tau;
  for( int i = 0; i < N; ++i )
  {
    tau[i] = value_of( in.lambda_tau[i] );
  }
  return detail::classify_with<S, N>( in, value_of( in.lambda_n ), tau, unreachable );
}

/// Regularized contact state: anchor traction inside the max arguments, b from the current lambda_n.
template< typename S, int N >
ContactState classify_regularized( ContactInputs<S, N> const & in,
                                   Traction<double, N> const & anchor,
                                   bool * unreachable = nullptr )
{
  return detail::classify_with<S, N>( in, anchor.normal, anchor.tangential, unreachable );
}

} // namespace fracpm::contact
