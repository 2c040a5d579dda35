#pragma once

// Small nonlinear systems with known roots for driving the solvers directly.

#include "fracpm/solvers/problem.hpp"

#include <array>
#include <cmath>
#include <functional>

namespace fracpm::toy
{

using solvers::Census;
using solvers::ContactCell;
using solvers::ContactClosure;
using solvers::Evaluation;
using solvers::NonlinearProblem;
using solvers::Vector;

/// Scalar equation f(x) = 0 without contact.
class ScalarProblem final : public NonlinearProblem
{
public:
  ScalarProblem( std::function<double( double )> f, std::function<double( double )> df )
    : m_f( std::move( f ) ), m_df( std::move( df ) ), m_w( Vector::Ones( 1 ) )
  {}

  Index size() const override { return 1; }
  Evaluation evaluate( Vector const & x, ContactClosure const &, bool ) const override
  {
    Evaluation ev;
    ev.residual = Vector::Constant( 1, m_f( x[0] ) );
    ev.jacobian.resize( 1, 1 );
    ev.jacobian.insert( 0, 0 ) = m_df( x[0] );
    return ev;
  }
  Vector const & norm_weights() const override { return m_w; }
  std::vector<ContactCell> const & contact_cells() const override { return m_cells; }
  Census census( Vector const &, ContactClosure const & ) const override { return {}; }

private:
  std::function<double( double )> m_f;
  std::function<double( double )> m_df;
  Vector m_w;
  std::vector<ContactCell> m_cells;
};

/**
 * Block on a rigid wall: unknowns (u_n, u_t, lambda_n, lambda_t). Spring stiffness k,
 * load P pressing the block onto the wall and shear load T.
 *   k u_n + lambda_n + P = 0,  k u_t + lambda_t + T = 0,  contact rows.
 * Stick if |T| < F P, otherwise slip with lambda_t = -sign(T) F P.
 */
class SpringWall final : public NonlinearProblem
{
public:
  SpringWall( double k, double P, double T, double F ) : m_k( k ), m_P( P ), m_T( T ), m_w( Vector::Ones( 4 ) )
  {
    m_cells.push_back( { 2, 3, F } );
  }

  Index size() const override { return 4; }

  Evaluation evaluate( Vector const & x, ContactClosure const & closure, bool ) const override
  {
    using ad::Scalar;
    std::array<Scalar, 4> v;
    for( Index i = 0; i < 4; ++i )
    {
      v[static_cast< std::size_t >( i )] = Scalar::variable( x[i], i );
    }
    contact::ContactInputs<Scalar, 1> in;
    in.lambda_n = v[2];
    in.lambda_tau = { v[3] };
    in.jump_n = v[0];
    in.jump_tau = { v[1] };
    in.jump_tau_prev = { 0.0 };
    in.gap = Scalar( 0.0 );
    in.c = closure.c;
    in.friction = m_cells[0].friction;
    std::array<Scalar, 4> r;
    r[0] = v[0] * m_k + v[2] + m_P;
    r[1] = v[1] * m_k + v[3] + m_T;
    if( closure.kind == ContactClosure::Kind::Exact )
    {
      r[2] = contact::complementarity_normal( in );
      r[3] = contact::complementarity_tangential( in )[0];
    }
    else
    {
      auto const [cn, ct] = contact::regularized_complementarity( in, closure.anchor.at( 0 ) );
      r[2] = cn;
      r[3] = ct[0];
    }
    Evaluation ev;
    ev.residual.resize( 4 );
    std::vector<Eigen::Triplet<double>> trip;
    for( Index i = 0; i < 4; ++i )
    {
      auto const & s = r[static_cast< std::size_t >( i )];
      ev.residual[i] = s.value();
      for( auto const & e : s.gradient() )
      {
        trip.emplace_back( i, e.index, e.value );
      }
    }
    ev.jacobian.resize( 4, 4 );
    ev.jacobian.setFromTriplets( trip.begin(), trip.end() );
    return ev;
  }
  Vector const & norm_weights() const override { return m_w; }
  std::vector<ContactCell> const & contact_cells() const override { return m_cells; }
  Census census( Vector const &, ContactClosure const & ) const override { return {}; }

  Vector root() const
  {
    double const F = m_cells[0].friction;
    Vector x( 4 );
    x << 0.0, 0.0, -m_P, 0.0;
    if( std::abs( m_T ) < F * m_P )
    {
      x[3] = -m_T;
    }
    else
    {
      x[3] = m_T > 0 ? -F * m_P : F * m_P;
      x[1] = ( -m_T - x[3] ) / m_k;
    }
    return x;
  }

private:
  double m_k;
  double m_P;
  double m_T;
  Vector m_w;
  std::vector<ContactCell> m_cells;
};

} // namespace fracpm::toy
