#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracpm
{

using Index = std::ptrdiff_t;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Input (mesh file, config, scenario) failed validation.
class ValidationError : public Error
{
public:
  using Error::Error;
};

/// Numerical failure inside assembly or a linear solve.
class NumericalError : public Error
{
public:
  using Error::Error;
};

struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+( Vec2 const & o ) const { return { x + o.x, y + o.y }; }
  constexpr Vec2 operator-( Vec2 const & o ) const { return { x - o.x, y - o.y }; }
  constexpr Vec2 operator*( double s ) const { return { x * s, y * s }; }
  constexpr Vec2 operator/( double s ) const { return { x / s, y / s }; }
  constexpr Vec2 operator-() const { return { -x, -y }; }
  constexpr bool operator==( Vec2 const & o ) const = default;
};

constexpr Vec2 operator*( double s, Vec2 const & v ) { return v * s; }
constexpr double dot( Vec2 const & a, Vec2 const & b ) { return a.x * b.x + a.y * b.y; }
constexpr double cross( Vec2 const & a, Vec2 const & b ) { return a.x * b.y - a.y * b.x; }
inline double norm( Vec2 const & a ) { return std::hypot( a.x, a.y ); }
/// Counter-clockwise rotation by 90 degrees.
constexpr Vec2 perp( Vec2 const & a ) { return { -a.y, a.x }; }

} // namespace fracpm
