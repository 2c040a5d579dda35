#include "doctest.h"

#include "fracpm/contact/kernels.hpp"
#include "support/contact_oracles.hpp"

#include <random>

using namespace fracpm;
using namespace fracpm::contact;

namespace
{

using In1 = ContactInputs<double, 1>;
using In2 = ContactInputs<double, 2>;

In1 normal_inputs( double lambda_n, double d, double c )
{
  In1 in;
  in.lambda_n = lambda_n;
  in.jump_n = d;
  in.gap = 0.0;
  in.c = c;
  return in;
}

/// Tangential inputs with a given friction bound b = -F lambda_n.
In1 tangential_inputs( double b, double lambda_tau, double slip, double c, double friction = 0.5 )
{
  In1 in;
  in.friction = friction;
  in.lambda_n = -b / friction;
  in.lambda_tau = { lambda_tau };
  in.jump_tau = { slip };
  in.jump_tau_prev = { 0.0 };
  in.c = c;
  return in;
}

} // namespace

TEST_CASE( "normal complementarity examples" )
{
  CHECK( complementarity_normal( normal_inputs( -1.0, 0.0, 100.0 ) ) == 0.0 );
  CHECK( complementarity_normal( normal_inputs( 0.0, 0.5, 1.0 ) ) == 0.0 );
  CHECK( complementarity_normal( normal_inputs( 0.5, 0.0, 1.0 ) ) == 0.5 );
  // The gap shifts the opening.
  auto in = normal_inputs( -1.0, 0.3, 10.0 );
  in.gap = 0.3;
  CHECK( complementarity_normal( in ) == 0.0 );
}

TEST_CASE( "tangential complementarity examples" )
{
  CHECK( complementarity_tangential( tangential_inputs( 0.0, 0.2, 0.0, 1.0 ) )[0] == doctest::Approx( 0.2 ) );
  CHECK( complementarity_tangential( tangential_inputs( 0.5, 0.3, 0.0, 10.0 ) )[0] == doctest::Approx( 0.0 ) );
  CHECK( complementarity_tangential( tangential_inputs( 0.5, 0.5, 0.1, 10.0 ) )[0] == doctest::Approx( 0.0 ) );
  // lambda_n > 0 also takes the chi branch in the exact kernel.
  auto in = tangential_inputs( 0.0, 0.7, 0.1, 1.0 );
  in.lambda_n = 0.4;
  CHECK( complementarity_tangential( in )[0] == 0.7 );
}

TEST_CASE( "two-dimensional tangent" )
{
  In2 in;
  in.friction = 0.5;
  in.lambda_n = -1.0;
  in.lambda_tau = { 0.3, 0.4 };
  in.jump_tau = { 0.03, 0.04 };
  in.c = 2.0;
  auto const r = complementarity_tangential( in );
  CHECK( r[0] == doctest::Approx( 0.0 ).epsilon( 1e-15 ) );
  CHECK( r[1] == doctest::Approx( 0.0 ).epsilon( 1e-15 ) );
  CHECK( classify( in ) == ContactState::Slip );
}

TEST_CASE( "regularized complementarity" )
{
  // Anchor at zero with a positive opening forces lambda_n to zero.
  auto in = normal_inputs( -0.3, 0.2, 1.0 );
  Traction<double, 1> zero{};
  auto const [cn, ct] = regularized_complementarity( in, zero );
  CHECK( cn == -0.3 );
  // b > 0 with a zero anchor: b (c du) - max(b, |c du|) lambda_tau.
  CHECK( ct[0] == doctest::Approx( 0.0 ) );

  Traction<double, 1> bad{ 0.1, { 0.0 } };
  CHECK_THROWS_AS( regularized_complementarity( in, bad ), Error );
  Traction<double, 1> outside{ -1.0, { 0.9 } };
  CHECK_THROWS_AS( regularized_complementarity( in, outside ), Error );

  // At a root of the exact functions with a feasible anchor equal to the unknowns: zero residual.
  auto root = tangential_inputs( 0.5, 0.5, 0.1, 10.0 );
  Traction<double, 1> anchor{ root.lambda_n, root.lambda_tau };
  auto const reg = regularized_complementarity( root, anchor );
  CHECK( reg.first == 0.0 );
  CHECK( reg.second[0] == doctest::Approx( 0.0 ) );
}

TEST_CASE( "regularized equals exact when anchored at the current traction" )
{
  std::mt19937_64 rng( 17 );
  std::uniform_real_distribution<double> u( -2.0, 2.0 );
  std::uniform_real_distribution<double> unit( 0.0, 1.0 );
  for( int t = 0; t < 2000; ++t )
  {
    In2 in;
    in.friction = 0.1 + unit( rng );
    in.lambda_n = -2.0 * unit( rng );
    double const b = -in.friction * in.lambda_n;
    double const r = b * unit( rng );
    double const th = 6.3 * unit( rng );
    in.lambda_tau = { r * std::cos( th ), r * std::sin( th ) };
    in.jump_n = u( rng );
    in.gap = unit( rng );
    in.jump_tau = { u( rng ), u( rng ) };
    in.jump_tau_prev = { u( rng ), u( rng ) };
    in.c = std::pow( 10.0, 4.0 * unit( rng ) - 2.0 );
    Traction<double, 2> const anchor{ in.lambda_n, in.lambda_tau };
    auto const reg = regularized_complementarity( in, anchor );
    CHECK( std::abs( reg.first - complementarity_normal( in ) ) <= 1e-15 );
    auto const exact = complementarity_tangential( in );
    CHECK( std::abs( reg.second[0] - exact[0] ) <= 1e-15 );
    CHECK( std::abs( reg.second[1] - exact[1] ) <= 1e-15 );
    CHECK( classify_regularized( in, anchor ) == classify( in ) );
  }
}

TEST_CASE( "return map examples" )
{
  auto r = return_map<2>( 0.3, { 0.2, -0.1 }, 0.5 );
  CHECK( r.normal == 0.0 );
  CHECK( r.tangential == std::array<double, 2>{ 0.0, 0.0 } );
  r = return_map<2>( -1.0, { 0.6, 0.8 }, 0.5 );
  CHECK( r.tangential[0] == doctest::Approx( 0.3 ) );
  CHECK( r.tangential[1] == doctest::Approx( 0.4 ) );
  r = return_map<2>( -1.0, { 0.1, 0.2 }, 0.5 );
  CHECK( r.tangential == std::array<double, 2>{ 0.1, 0.2 } );
  auto m = return_map_maxform<2>( 0.0, { 0.7, 0.1 }, 0.5 );
  CHECK( m.tangential == std::array<double, 2>{ 0.0, 0.0 } );
  m = return_map_maxform<2>( -1.0, { 0.3, 0.4 }, 0.5 );
  CHECK( m.tangential[0] == doctest::Approx( 0.3 ).epsilon( 1e-15 ) );
  CHECK( m.tangential[1] == doctest::Approx( 0.4 ).epsilon( 1e-15 ) );
}

TEST_CASE( "return map properties" )
{
  std::mt19937_64 rng( 23 );
  std::uniform_real_distribution<double> u( -2.0, 2.0 );
  for( int t = 0; t < 10000; ++t )
  {
    double const n = t % 7 == 0 ? 0.0 : u( rng );
    std::array<double, 2> const tau{ u( rng ), u( rng ) };
    double const f = 0.5;
    auto const a = return_map<2>( n, tau, f );
    auto const b = return_map_maxform<2>( n, tau, f );
    CHECK( a.normal == b.normal );
    CHECK( std::abs( a.tangential[0] - b.tangential[0] ) <= 1e-14 );
    CHECK( std::abs( a.tangential[1] - b.tangential[1] ) <= 1e-14 );
    CHECK( a.normal <= 0.0 );
    CHECK( oracle::norm( a.tangential ) <= -f * a.normal * ( 1.0 + 1e-15 ) + 1e-15 );
    auto const twice = return_map<2>( a.normal, a.tangential, f );
    CHECK( twice.normal == a.normal );
    CHECK( twice.tangential == a.tangential );
  }
}

TEST_CASE( "classification examples" )
{
  auto in = normal_inputs( -1.0, 0.02, 100.0 );
  CHECK( classify( in ) == ContactState::Open );
  auto st = tangential_inputs( 0.5, 0.3, 0.0, 1.0 );
  CHECK( st.lambda_n == -1.0 );
  CHECK( classify( st ) == ContactState::Stick );
  auto sl = tangential_inputs( 0.5, 0.7, 0.0, 1.0 );
  CHECK( classify( sl ) == ContactState::Slip );
  // Exactly on the bound is slip.
  CHECK( classify( tangential_inputs( 0.5, 0.5, 0.0, 1.0 ) ) == ContactState::Slip );

  // Not open but b <= 0: reported open and flagged.
  auto odd = normal_inputs( 0.0, -1.0, 1.0 );
  bool flagged = false;
  CHECK( classify( odd, &flagged ) == ContactState::Open );
  CHECK( flagged );
  CHECK( classify( in, &flagged ) == ContactState::Open );
  CHECK_FALSE( flagged );

  // Regularized: the anchor enters the max arguments, b the current unknown.
  auto reg = tangential_inputs( 0.5, 0.0, 0.0, 1.0 );
  CHECK( classify_regularized( reg, Traction<double, 1>{ -1.0, { 0.3 } } ) == ContactState::Stick );
  CHECK( classify_regularized( reg, Traction<double, 1>{ -2.0, { 0.7 } } ) == ContactState::Slip );
  CHECK( classify_regularized( normal_inputs( -1.0, 0.02, 100.0 ), Traction<double, 1>{ -3.0, { 0.0 } } ) ==
         ContactState::Stick );
}

TEST_CASE( "derivative selection" )
{
  CHECK( derivative_selection( 0.0, 1.0 ) == Branch::Second );
  CHECK( derivative_selection( 1.0, 0.0 ) == Branch::First );
  CHECK( derivative_selection( 1.0, 1.0 ) == Branch::Second );
  // The tie rule reaches the generalized Jacobian: equal arguments take the derivative of the second.
  ContactInputs<ad::Scalar, 1> ai;
  ai.jump_n = ad::Scalar( 0.0 );
  ai.gap = ad::Scalar( 0.0 );
  ai.c = 1.0;
  ai.lambda_n = ad::Scalar::variable( 0.0, 0 );
  // max(0, -lambda_n) at lambda_n = 0: second branch gives dC/dlambda = 1 - 1 = 0.
  CHECK( complementarity_normal( ai ).derivative( 0 ) == 0.0 );
}

TEST_CASE( "complementarity agrees with the physical conditions" )
{
  auto const vals = oracle::grid( -2.0, 2.0, 41 );
  int mismatches = 0;
  for( double c : { 1e-2, 1.0, 1e2 } )
  {
    for( double l : vals )
    {
      for( double d : vals )
      {
        bool const root = std::abs( complementarity_normal( normal_inputs( l, d, c ) ) ) <= 1e-12;
        mismatches += root != oracle::nonpenetration_holds( l, d, 1e-12 ) ? 1 : 0;
      }
    }
  }
  CHECK( mismatches == 0 );

  auto const bs = oracle::grid( 0.0, 2.0, 9 );
  auto const ts = oracle::grid( -2.0, 2.0, 17 );
  mismatches = 0;
  for( double c : { 1e-2, 1.0, 1e2 } )
  {
    for( double b : bs )
    {
      for( double lt : ts )
      {
        for( double s : ts )
        {
          auto const in = tangential_inputs( b, lt, s, c );
          bool const root = std::abs( complementarity_tangential( in )[0] ) <= 1e-12;
          mismatches += root != oracle::friction_holds<1>( { lt }, { s }, b, 1e-12 ) ? 1 : 0;
          // Roots do not depend on c.
          if( root )
          {
            auto other = in;
            other.c = c * 37.0;
            CHECK( std::abs( complementarity_tangential( other )[0] ) <= 1e-12 );
          }
        }
      }
    }
  }
  CHECK( mismatches == 0 );
}
