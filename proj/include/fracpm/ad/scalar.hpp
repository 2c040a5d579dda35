#pragma once

#include "fracpm/common.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace fracpm::ad
{

/**
 * Forward-mode scalar with a sparse gradient with respect to the global unknown vector.
 *
 * Residual rows of the assembled system are computed in this type; the gradient of a row
 * is the corresponding row of the Jacobian. Non-smooth functions pick one element of the
 * generalized derivative: max_select() takes the branch of its second argument on ties and
 * abs() uses the subgradient 0 at the origin.
 */
class Scalar
{
public:
  struct Entry
  {
    Index index;
    double value;
  };
  using Gradient = std::vector<Entry>;

  Scalar() = default;
  Scalar( double v ) : m_value( v ) {}  // NOLINT(google-explicit-constructor)

  static Scalar variable( double v, Index index )
  {
    Scalar s( v );
    s.m_grad.push_back( { index, 1.0 } );
    return s;
  }

  double value() const { return m_value; }
  Gradient const & gradient() const { return m_grad; }

  double derivative( Index index ) const
  {
    auto it = std::lower_bound( m_grad.begin(), m_grad.end(), index,
                                []( Entry const & e, Index i ) { return e.index < i; } );
    return ( it != m_grad.end() && it->index == index ) ? it->value : 0.0;
  }

  /// r = a*x + b*y on the gradients.
  static Gradient combine( double a, Gradient const & x, double b, Gradient const & y )
  {
    Gradient out;
    out.reserve( x.size() + y.size() );
    auto ix = x.begin();
    auto iy = y.begin();
    while( ix != x.end() || iy != y.end() )
    {
      if( iy == y.end() || ( ix != x.end() && ix->index < iy->index ) )
      {
        out.push_back( { ix->index, a * ix->value } );
        ++ix;
      }
      else if( ix == x.end() || iy->index < ix->index )
      {
        out.push_back( { iy->index, b * iy->value } );
        ++iy;
      }
      else
      {
        out.push_back( { ix->index, a * ix->value + b * iy->value } );
        ++ix;
        ++iy;
      }
    }
    return out;
  }

  Scalar & operator+=( Scalar const & o )
  {
    m_value += o.m_value;
    if( !o.m_grad.empty() )
    {
      m_grad = m_grad.empty() ? o.m_grad : combine( 1.0, m_grad, 1.0, o.m_grad );
    }
    return *this;
  }
  Scalar & operator-=( Scalar const & o )
  {
    m_value -= o.m_value;
    if( !o.m_grad.empty() )
    {
      m_grad = combine( 1.0, m_grad, -1.0, o.m_grad );
    }
    return *this;
  }
  Scalar & operator*=( double s )
  {
    m_value *= s;
    for( auto & e : m_grad )
    {
      e.value *= s;
    }
    return *this;
  }
  /// this += s * o
  Scalar & add_scaled( double s, Scalar const & o )
  {
    m_value += s * o.m_value;
    if( !o.m_grad.empty() )
    {
      m_grad = combine( 1.0, m_grad, s, o.m_grad );
    }
    return *this;
  }

  friend Scalar operator+( Scalar a, Scalar const & b ) { return a += b; }
  friend Scalar operator-( Scalar a, Scalar const & b ) { return a -= b; }
  friend Scalar operator-( Scalar a )
  {
    a *= -1.0;
    return a;
  }
  friend Scalar operator*( Scalar a, double s ) { return a *= s; }
  friend Scalar operator*( double s, Scalar a ) { return a *= s; }
  friend Scalar operator/( Scalar a, double s ) { return a *= ( 1.0 / s ); }
  friend Scalar operator*( Scalar const & a, Scalar const & b )
  {
    Scalar r( a.m_value * b.m_value );
    r.m_grad = combine( b.m_value, a.m_grad, a.m_value, b.m_grad );
    return r;
  }
  friend Scalar operator/( Scalar const & a, Scalar const & b )
  {
    double const inv = 1.0 / b.m_value;
    Scalar r( a.m_value * inv );
    r.m_grad = combine( inv, a.m_grad, -a.m_value * inv * inv, b.m_grad );
    return r;
  }
  friend Scalar operator/( double a, Scalar const & b ) { return Scalar( a ) / b; }

  /// Chain rule with a given local derivative.
  Scalar apply( double new_value, double local_derivative ) const
  {
    Scalar r( new_value );
    r.m_grad = m_grad;
    for( auto & e : r.m_grad )
    {
      e.value *= local_derivative;
    }
    return r;
  }

private:
  double m_value = 0.0;
  Gradient m_grad;
};

inline double value_of( double v ) { return v; }
inline double value_of( Scalar const & v ) { return v.value(); }

inline Scalar exp( Scalar const & x )
{
  double const e = std::exp( x.value() );
  return x.apply( e, e );
}
inline Scalar sqrt( Scalar const & x )
{
  double const s = std::sqrt( x.value() );
  return x.apply( s, s > 0.0 ? 0.5 / s : 0.0 );
}
inline Scalar abs( Scalar const & x )
{
  double const v = x.value();
  return x.apply( std::abs( v ), v > 0.0 ? 1.0 : ( v < 0.0 ? -1.0 : 0.0 ) );
}
inline double abs( double x ) { return std::abs( x ); }
inline double exp( double x ) { return std::exp( x ); }
inline double sqrt( double x ) { return std::sqrt( x ); }

/// max(a, b); on ties the second argument (and its derivative) is selected.
template< typename A, typename B >
auto max_select( A const & a, B const & b )
{
  using R = decltype( a + b );
  return value_of( a ) > value_of( b ) ? R( a ) : R( b );
}

} // namespace fracpm::ad
