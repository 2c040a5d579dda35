#include "fracpm/assembly/model.hpp"

#include "fracpm/constitutive/laws.hpp"
#include "fracpm/contact/kernels.hpp"

#include <cmath>

namespace fracpm::assembly
{

using ad::Scalar;
using mdgeom::Face;
using mdgeom::FaceKind;
using mdgeom::Side;
namespace law = constitutive;

namespace
{

/// Barycentric coordinates of the three edge midpoints: q0 on edge (1,2), q1 on (2,0), q2 on (0,1).
constexpr std::array<std::array<double, 3>, 3> kMidpoints{ { { 0.0, 0.5, 0.5 }, { 0.5, 0.0, 0.5 }, { 0.5, 0.5, 0.0 } } };

/// Quadrature point index sitting on the edge between local vertices a and b.
int midpoint_of_edge( int a, int b )
{
  return 3 - a - b;
}

struct ScalarVec
{
  Scalar x;
  Scalar y;
};

Scalar dot( ScalarVec const & v, Vec2 const & n )
{
  return v.x * n.x + v.y * n.y;
}

} // namespace

/// Per-evaluation scratch: unknowns as differentiable scalars and the residual rows.
struct PoromechanicsModel::Workspace
{
  std::vector<Scalar> x;
  std::vector<Scalar> rows;
  int clamps = 0;

  Scalar const & operator()( Index i ) const { return x[static_cast< std::size_t >( i )]; }
  Scalar & row( Index i ) { return rows[static_cast< std::size_t >( i )]; }
};

namespace
{

/// Cell-wise derived fields of one state.
struct Fields
{
  /// Per subdomain and cell.
  std::vector<std::vector<Scalar>> aperture;
  std::vector<std::vector<Scalar>> specific_volume;
  std::vector<std::vector<Scalar>> density;
  std::vector<std::vector<Scalar>> porosity;
  /// Per fracture and cell.
  std::vector<std::vector<Scalar>> jump_n;
  std::vector<std::vector<Scalar>> jump_tau;
};

} // namespace

PoromechanicsModel::PoromechanicsModel( mdgeom::MdMesh const & mesh, ModelSetup setup )
  : m_mesh( &mesh ),
    m_setup( std::move( setup ) ),
    m_params( constitutive::scale( m_setup.material ) ),
    m_dofs( mesh )
{
  m_setup.material.validate();
  if( !( m_setup.dt > 0.0 ) )
  {
    throw ValidationError( "time step must be positive" );
  }
  auto const & matrix = mesh.matrix();
  auto const & mech = mesh.mechanics();
  auto const nodes = mesh.nodes();

  m_elements.resize( static_cast< std::size_t >( matrix.num_cells() ) );
  for( Index t = 0; t < matrix.num_cells(); ++t )
  {
    auto & el = m_elements[static_cast< std::size_t >( t )];
    auto const & geo = matrix.cell_nodes[static_cast< std::size_t >( t )];
    Vec2 const & p0 = nodes[static_cast< std::size_t >( geo[0] )];
    Vec2 const & p1 = nodes[static_cast< std::size_t >( geo[1] )];
    Vec2 const & p2 = nodes[static_cast< std::size_t >( geo[2] )];
    el.area = 0.5 * cross( p1 - p0, p2 - p0 );
    if( !( el.area > 0.0 ) )
    {
      throw ValidationError( "degenerate element: cell " + std::to_string( t ) );
    }
    // grad phi_i = perp-rotated opposite edge / (2 area), outward-consistent for CCW triangles.
    std::array<Vec2, 3> const pts{ p0, p1, p2 };
    for( int i = 0; i < 3; ++i )
    {
      Vec2 const e = pts[static_cast< std::size_t >( ( i + 2 ) % 3 )] - pts[static_cast< std::size_t >( ( i + 1 ) % 3 )];
      el.grad[static_cast< std::size_t >( i )] = Vec2{ -e.y, e.x } / ( 2.0 * el.area );
    }
    el.nodes = mech.cell_nodes[static_cast< std::size_t >( t )];
  }
  for( Index b = 0; b < mech.num_bubbles(); ++b )
  {
    auto const & face = matrix.faces[static_cast< std::size_t >( mech.bubble_face[static_cast< std::size_t >( b )] )];
    Index const t = face.cells[0];
    auto & el = m_elements[static_cast< std::size_t >( t )];
    auto const & geo = matrix.cell_nodes[static_cast< std::size_t >( t )];
    int best_a = 0;
    int best_b = 1;
    double best = 1e300;
    for( int a = 0; a < 3; ++a )
    {
      int const c = ( a + 1 ) % 3;
      Vec2 const mid = 0.5 * ( nodes[static_cast< std::size_t >( geo[static_cast< std::size_t >( a )] )] +
                               nodes[static_cast< std::size_t >( geo[static_cast< std::size_t >( c )] )] );
      double const d = norm( mid - face.center );
      if( d < best )
      {
        best = d;
        best_a = a;
        best_b = c;
      }
    }
    el.bubbles.push_back( { b, { best_a, best_b } } );
  }

  for( Index k = 0; k < mesh.num_fractures(); ++k )
  {
    auto const & frac = mesh.subdomain( mesh.fracture_subdomain( k ) );
    for( Index m = 0; m < frac.num_cells(); ++m )
    {
      m_contact_cells.push_back( { m_dofs.traction( k, m, 0 ), m_dofs.traction( k, m, 1 ), m_params.friction } );
      m_contact_location.emplace_back( k, m );
    }
  }

  // Norm weights.
  m_weights = Vector::Zero( m_dofs.size() );
  for( auto const & sd : mesh.subdomains() )
  {
    double const vol = sd.dim == 2 ? 1.0 : std::pow( m_params.a_ref, 2 - sd.dim );
    for( Index c = 0; c < sd.num_cells(); ++c )
    {
      m_weights[m_dofs.pressure( sd.id, c )] = sd.cell_measures[static_cast< std::size_t >( c )] * vol;
    }
  }
  for( auto const & el : m_elements )
  {
    for( Index n : el.nodes )
    {
      m_weights[m_dofs.node( n, 0 )] += el.area / 3.0;
      m_weights[m_dofs.node( n, 1 )] += el.area / 3.0;
    }
    for( auto const & [b, edge] : el.bubbles )
    {
      m_weights[m_dofs.bubble( b, 0 )] = el.area / 3.0;
      m_weights[m_dofs.bubble( b, 1 )] = el.area / 3.0;
    }
  }
  for( auto const & intf : mesh.interfaces() )
  {
    bool const matrix_side = mesh.subdomain( intf.lower ).dim == 1;
    double const vol = matrix_side ? 1.0 : m_params.a_ref;
    for( Index m = 0; m < intf.num_cells(); ++m )
    {
      double const meas = intf.cells[static_cast< std::size_t >( m )].measure;
      m_weights[m_dofs.interface_flux( intf.id, m )] = meas * vol;
      if( matrix_side )
      {
        m_weights[m_dofs.interface_displacement( intf.id, m, 0 )] = meas;
        m_weights[m_dofs.interface_displacement( intf.id, m, 1 )] = meas;
      }
    }
  }
  for( std::size_t i = 0; i < m_contact_cells.size(); ++i )
  {
    auto const [k, m] = m_contact_location[i];
    double const len = mesh.subdomain( mesh.fracture_subdomain( k ) ).cell_measures[static_cast< std::size_t >( m )];
    m_weights[m_contact_cells[i].lambda_n] = len;
    m_weights[m_contact_cells[i].lambda_tau] = len;
  }

  if( m_setup.well )
  {
    auto const & w = *m_setup.well;
    if( w.subdomain < 0 || w.subdomain >= static_cast< Index >( mesh.subdomains().size() ) || w.cell < 0 ||
        w.cell >= mesh.subdomain( w.subdomain ).num_cells() )
    {
      throw ValidationError( "well cell does not exist" );
    }
  }
  m_prev = initial_state();
}

Vector PoromechanicsModel::initial_state() const
{
  Vector x = Vector::Zero( m_dofs.size() );
  double const p0 = m_params.stress( m_setup.background_pressure );
  for( Index i = m_dofs.block_begin( DofMap::Block::Pressure ); i < m_dofs.block_end( DofMap::Block::Pressure ); ++i )
  {
    x[i] = p0;
  }
  return x;
}

namespace
{

template< typename Get >
Fields compute_fields( mdgeom::MdMesh const & mesh,
                       DofMap const & dofs,
                       constitutive::ScaledParams const & prm,
                       Get const & get,
                       std::vector<Scalar> const & div_u,
                       int & clamps )
{
  Fields f;
  auto const nsd = mesh.subdomains().size();
  f.aperture.resize( nsd );
  f.specific_volume.resize( nsd );
  f.density.resize( nsd );
  f.porosity.resize( nsd );
  f.jump_n.resize( static_cast< std::size_t >( mesh.num_fractures() ) );
  f.jump_tau.resize( static_cast< std::size_t >( mesh.num_fractures() ) );

  for( Index k = 0; k < mesh.num_fractures(); ++k )
  {
    Index const s = mesh.fracture_subdomain( k );
    auto const & frac = mesh.subdomain( s );
    auto const [ij, ik] = mesh.fracture_interfaces( k );
    auto & ap = f.aperture[static_cast< std::size_t >( s )];
    for( Index m = 0; m < frac.num_cells(); ++m )
    {
      Vec2 const n = frac.cell_normals[static_cast< std::size_t >( m )];
      Vec2 const t = frac.cell_tangents[static_cast< std::size_t >( m )];
      Scalar const jx = get( dofs.interface_displacement( ik, m, 0 ) ) - get( dofs.interface_displacement( ij, m, 0 ) );
      Scalar const jy = get( dofs.interface_displacement( ik, m, 1 ) ) - get( dofs.interface_displacement( ij, m, 1 ) );
      Scalar const jn = jx * n.x + jy * n.y;
      f.jump_n[static_cast< std::size_t >( k )].push_back( jn );
      f.jump_tau[static_cast< std::size_t >( k )].push_back( jx * t.x + jy * t.y );
      ap.push_back( law::clamp_aperture( law::fracture_aperture( jn, prm ), clamps ) );
    }
  }
  for( auto const & sd : mesh.subdomains() )
  {
    auto const i = static_cast< std::size_t >( sd.id );
    if( sd.dim == 0 )
    {
      std::vector<Scalar> neighbors;
      for( Index intf_id : mesh.interfaces_below( sd.id ) )
      {
        auto const & intf = mesh.interface( intf_id );
        auto const & higher = mesh.subdomain( intf.higher );
        for( auto const & mc : intf.cells )
        {
          Index const cell = higher.faces[static_cast< std::size_t >( mc.higher_face )].cells[0];
          neighbors.push_back( f.aperture[static_cast< std::size_t >( intf.higher )][static_cast< std::size_t >( cell )] );
        }
      }
      f.aperture[i].push_back( law::intersection_aperture<Scalar>( neighbors ) );
    }
    for( Index c = 0; c < sd.num_cells(); ++c )
    {
      Scalar const p = get( dofs.pressure( sd.id, c ) );
      f.density[i].push_back( law::fluid_density( p, prm ) );
      if( sd.dim == 2 )
      {
        f.specific_volume[i].push_back( Scalar( 1.0 ) );
        f.porosity[i].push_back( law::matrix_porosity( p, div_u[static_cast< std::size_t >( c )], prm ) );
      }
      else
      {
        Scalar const & a = f.aperture[i][static_cast< std::size_t >( c )];
        f.specific_volume[i].push_back( sd.dim == 1 ? a : a * a );
        f.porosity[i].push_back( Scalar( 1.0 ) );
      }
    }
  }
  return f;
}

} // namespace

void PoromechanicsModel::assemble( Workspace & ws,
                                   bool flow,
                                   bool mechanics,
                                   bool interface,
                                   bool contact_rows,
                                   solvers::ContactClosure const * closure ) const
{
  auto const & mesh = *m_mesh;
  auto const & matrix = mesh.matrix();
  auto const & prm = m_params;
  double const eta = prm.viscosity;
  auto const X = [&]( Index i ) -> Scalar const & { return ws( i ); };
  auto const P = [&]( Index i ) { return Scalar( m_prev[i] ); };

  auto const node_u = [&]( auto const & get, Index n ) {
    return ScalarVec{ get( m_dofs.node( n, 0 ) ), get( m_dofs.node( n, 1 ) ) };
  };
  auto const bubble_u = [&]( auto const & get, Index b ) {
    return ScalarVec{ get( m_dofs.bubble( b, 0 ) ), get( m_dofs.bubble( b, 1 ) ) };
  };

  // Element-averaged divergence of u.
  auto const divergence = [&]( auto const & get ) {
    std::vector<Scalar> div( m_elements.size() );
    for( std::size_t t = 0; t < m_elements.size(); ++t )
    {
      auto const & el = m_elements[t];
      Scalar d( 0.0 );
      for( int a = 0; a < 3; ++a )
      {
        auto const u = node_u( get, el.nodes[static_cast< std::size_t >( a )] );
        d += dot( u, el.grad[static_cast< std::size_t >( a )] );
      }
      for( auto const & [b, edge] : el.bubbles )
      {
        auto const & face = matrix.faces[static_cast< std::size_t >( mesh.mechanics().bubble_face[static_cast< std::size_t >( b )] )];
        d += dot( bubble_u( get, b ), face.normal ) * ( 2.0 * face.measure / ( 3.0 * el.area ) );
      }
      div[t] = d;
    }
    return div;
  };

  auto const div_now = divergence( X );
  Fields const now = compute_fields( mesh, m_dofs, prm, X, div_now, ws.clamps );

  // Displacement gradient at a quadrature point, and the face traces.
  auto const grad_u = [&]( Element const & el, int q ) {
    law::Tensor2<Scalar> g{};
    for( int a = 0; a < 3; ++a )
    {
      auto const u = node_u( X, el.nodes[static_cast< std::size_t >( a )] );
      Vec2 const gr = el.grad[static_cast< std::size_t >( a )];
      g[0][0] += u.x * gr.x;
      g[0][1] += u.x * gr.y;
      g[1][0] += u.y * gr.x;
      g[1][1] += u.y * gr.y;
    }
    auto const & lam = kMidpoints[static_cast< std::size_t >( q )];
    for( auto const & [b, edge] : el.bubbles )
    {
      auto const ea = static_cast< std::size_t >( edge[0] );
      auto const eb = static_cast< std::size_t >( edge[1] );
      Vec2 const gr = 4.0 * ( lam[ea] * el.grad[eb] + lam[eb] * el.grad[ea] );
      auto const u = bubble_u( X, b );
      g[0][0] += u.x * gr.x;
      g[0][1] += u.x * gr.y;
      g[1][0] += u.y * gr.x;
      g[1][1] += u.y * gr.y;
    }
    return g;
  };

  if( mechanics )
  {
    for( std::size_t t = 0; t < m_elements.size(); ++t )
    {
      auto const & el = m_elements[t];
      Scalar const & p = X( m_dofs.pressure( 0, static_cast< Index >( t ) ) );
      auto const force = law::body_force( now.porosity[0][t], now.density[0][t], prm );
      double const w = el.area / 3.0;
      for( int q = 0; q < 3; ++q )
      {
        auto const sigma = law::poroelastic_stress( grad_u( el, q ), p, prm );
        auto const & lam = kMidpoints[static_cast< std::size_t >( q )];
        for( int a = 0; a < 3; ++a )
        {
          Vec2 const gr = el.grad[static_cast< std::size_t >( a )];
          double const phi = lam[static_cast< std::size_t >( a )];
          Index const n = el.nodes[static_cast< std::size_t >( a )];
          Scalar & rx = ws.row( m_dofs.node( n, 0 ) );
          Scalar & ry = ws.row( m_dofs.node( n, 1 ) );
          rx.add_scaled( w * gr.x, sigma[0][0] );
          rx.add_scaled( w * gr.y, sigma[0][1] );
          rx.add_scaled( -w * phi, force.x );
          ry.add_scaled( w * gr.x, sigma[1][0] );
          ry.add_scaled( w * gr.y, sigma[1][1] );
          ry.add_scaled( -w * phi, force.y );
        }
        for( auto const & [b, edge] : el.bubbles )
        {
          auto const ea = static_cast< std::size_t >( edge[0] );
          auto const eb = static_cast< std::size_t >( edge[1] );
          Vec2 const gr = 4.0 * ( lam[ea] * el.grad[eb] + lam[eb] * el.grad[ea] );
          double const phi = 4.0 * lam[ea] * lam[eb];
          Scalar & rx = ws.row( m_dofs.bubble( b, 0 ) );
          Scalar & ry = ws.row( m_dofs.bubble( b, 1 ) );
          rx.add_scaled( w * gr.x, sigma[0][0] );
          rx.add_scaled( w * gr.y, sigma[0][1] );
          rx.add_scaled( -w * phi, force.x );
          ry.add_scaled( w * gr.x, sigma[1][0] );
          ry.add_scaled( w * gr.y, sigma[1][1] );
          ry.add_scaled( -w * phi, force.y );
        }
      }
    }

    // Boundary loads and Dirichlet constraints.
    std::vector<std::pair<Index, int>> constrained;
    double const sxx = prm.stress( m_setup.bc.background_stress[0] );
    double const syy = prm.stress( m_setup.bc.background_stress[1] );
    double const sxy = prm.stress( m_setup.bc.background_stress[2] );
    for( auto const & face : matrix.faces )
    {
      if( face.kind != FaceKind::ExternalBoundary )
      {
        continue;
      }
      auto const it = m_setup.bc.mechanics.find( face.tag );
      if( it == m_setup.bc.mechanics.end() )
      {
        throw ValidationError( "unassigned boundary tag '" + face.tag + "' for mechanics" );
      }
      auto const & el = m_elements[static_cast< std::size_t >( face.cells[0] )];
      auto const & geo = matrix.cell_nodes[static_cast< std::size_t >( face.cells[0] )];
      std::array<Index, 2> face_nodes{ -1, -1 };
      int found = 0;
      for( int a = 0; a < 3; ++a )
      {
        int const c = ( a + 1 ) % 3;
        Vec2 const mid = 0.5 * ( mesh.nodes()[static_cast< std::size_t >( geo[static_cast< std::size_t >( a )] )] +
                                 mesh.nodes()[static_cast< std::size_t >( geo[static_cast< std::size_t >( c )] )] );
        if( norm( mid - face.center ) <= 1e-12 * face.measure )
        {
          face_nodes = { el.nodes[static_cast< std::size_t >( a )], el.nodes[static_cast< std::size_t >( c )] };
          ++found;
        }
      }
      if( found != 1 )
      {
        throw Error( "boundary face does not match an element edge" );
      }
      auto const & bc = it->second;
      switch( bc.kind )
      {
        case MechanicsBoundary::Kind::Fixed:
          for( Index n : face_nodes )
          {
            constrained.emplace_back( n, 0 );
            constrained.emplace_back( n, 1 );
          }
          break;
        case MechanicsBoundary::Kind::Roller:
        {
          int const comp = std::abs( face.normal.x ) >= std::abs( face.normal.y ) ? 0 : 1;
          for( Index n : face_nodes )
          {
            constrained.emplace_back( n, comp );
          }
          break;
        }
        case MechanicsBoundary::Kind::Traction:
        case MechanicsBoundary::Kind::Stress:
        {
          Vec2 tr = bc.kind == MechanicsBoundary::Kind::Traction
                      ? Vec2{ prm.stress( bc.traction.x ), prm.stress( bc.traction.y ) }
                      : Vec2{ sxx * face.normal.x + sxy * face.normal.y, sxy * face.normal.x + syy * face.normal.y };
          for( Index n : face_nodes )
          {
            ws.row( m_dofs.node( n, 0 ) ) -= Scalar( tr.x * face.measure * 0.5 );
            ws.row( m_dofs.node( n, 1 ) ) -= Scalar( tr.y * face.measure * 0.5 );
          }
          break;
        }
      }
    }

    // Fracture faces: traction (lambda - p_l n_l), + on the j side and - on the k side.
    for( Index k = 0; k < mesh.num_fractures(); ++k )
    {
      Index const s = mesh.fracture_subdomain( k );
      auto const & frac = mesh.subdomain( s );
      for( Index intf_id : mesh.fracture_interfaces( k ) )
      {
        auto const & intf = mesh.interface( intf_id );
        double const sign = intf.side == Side::J ? 1.0 : -1.0;
        for( Index m = 0; m < intf.num_cells(); ++m )
        {
          auto const & mc = intf.cells[static_cast< std::size_t >( m )];
          auto const & face = matrix.faces[static_cast< std::size_t >( mc.higher_face )];
          Vec2 const n = frac.cell_normals[static_cast< std::size_t >( mc.lower_cell )];
          Vec2 const tau = frac.cell_tangents[static_cast< std::size_t >( mc.lower_cell )];
          Scalar const & ln = X( m_dofs.traction( k, mc.lower_cell, 0 ) );
          Scalar const & lt = X( m_dofs.traction( k, mc.lower_cell, 1 ) );
          Scalar const & pl = X( m_dofs.pressure( s, mc.lower_cell ) );
          Scalar const tn = ln - pl;
          Scalar const tx = ( tn * n.x + lt * tau.x ) * sign;
          Scalar const ty = ( tn * n.y + lt * tau.y ) * sign;
          auto const & el = m_elements[static_cast< std::size_t >( face.cells[0] )];
          Index const b = mesh.mechanics().face_bubble[static_cast< std::size_t >( mc.higher_face )];
          std::array<int, 2> edge{ -1, -1 };
          for( auto const & [bb, e] : el.bubbles )
          {
            if( bb == b )
            {
              edge = e;
            }
          }
          for( int v : edge )
          {
            Index const node = el.nodes[static_cast< std::size_t >( v )];
            ws.row( m_dofs.node( node, 0 ) ).add_scaled( -0.5 * mc.measure, tx );
            ws.row( m_dofs.node( node, 1 ) ).add_scaled( -0.5 * mc.measure, ty );
          }
          ws.row( m_dofs.bubble( b, 0 ) ).add_scaled( -2.0 / 3.0 * mc.measure, tx );
          ws.row( m_dofs.bubble( b, 1 ) ).add_scaled( -2.0 / 3.0 * mc.measure, ty );

          // Trace continuity: u_j - face average of u.
          for( int comp = 0; comp < 2; ++comp )
          {
            Scalar r = X( m_dofs.interface_displacement( intf_id, m, comp ) );
            for( int v : edge )
            {
              r.add_scaled( -0.5, X( m_dofs.node( el.nodes[static_cast< std::size_t >( v )], comp ) ) );
            }
            r.add_scaled( -2.0 / 3.0, X( m_dofs.bubble( b, comp ) ) );
            ws.row( m_dofs.interface_displacement( intf_id, m, comp ) ) = r;
          }
        }
      }
    }

    for( auto const & [n, comp] : constrained )
    {
      ws.row( m_dofs.node( n, comp ) ) = X( m_dofs.node( n, comp ) );
    }
  }

  if( flow )
  {
    if( m_setup.mechanics_only )
    {
      double const p0 = prm.stress( m_setup.background_pressure );
      for( Index i = m_dofs.block_begin( DofMap::Block::Pressure ); i < m_dofs.block_end( DofMap::Block::Pressure ); ++i )
      {
        ws.row( i ) = X( i ) - Scalar( p0 );
      }
    }
    else
    {
      int prev_clamps = 0;
      auto const div_prev = divergence( P );
      Fields const old = compute_fields( mesh, m_dofs, prm, P, div_prev, prev_clamps );
      double const dt = m_setup.dt;

      // Cell conductance V K / eta.
      auto const conductance = [&]( Index s, Index c ) -> Scalar {
        auto const & sd = mesh.subdomain( s );
        if( sd.dim == 2 )
        {
          return Scalar( prm.permeability / eta );
        }
        Scalar const & a = now.aperture[static_cast< std::size_t >( s )][static_cast< std::size_t >( c )];
        return a * law::cubic_law_permeability( a ) / eta;
      };
      auto const half_distance = [&]( Face const & face, Vec2 const & center, int dim ) {
        double const d = dim == 2 ? std::abs( fracpm::dot( face.center - center, face.normal ) ) : norm( face.center - center );
        if( !( d > 0.0 ) )
        {
          throw NumericalError( "zero inter-cell distance" );
        }
        return d;
      };

      for( auto const & sd : mesh.subdomains() )
      {
        auto const si = static_cast< std::size_t >( sd.id );
        for( Index c = 0; c < sd.num_cells(); ++c )
        {
          auto const ci = static_cast< std::size_t >( c );
          double const meas = sd.cell_measures[ci];
          Scalar acc = now.specific_volume[si][ci] * now.density[si][ci] * now.porosity[si][ci];
          acc -= old.specific_volume[si][ci] * old.density[si][ci] * old.porosity[si][ci];
          ws.row( m_dofs.pressure( sd.id, c ) ) += acc * ( meas / dt );
        }
        for( auto const & face : sd.faces )
        {
          Index const l = face.cells[0];
          auto const li = static_cast< std::size_t >( l );
          Index const row_l = m_dofs.pressure( sd.id, l );
          Scalar const & pl = X( row_l );
          Vec2 const xl = sd.cell_centers[li];
          switch( face.kind )
          {
            case FaceKind::Interior:
            {
              Index const r = face.cells[1];
              auto const ri = static_cast< std::size_t >( r );
              Index const row_r = m_dofs.pressure( sd.id, r );
              Vec2 const xr = sd.cell_centers[ri];
              double const dl = half_distance( face, xl, sd.dim );
              double const dr = half_distance( face, xr, sd.dim );
              Scalar const kl = conductance( sd.id, l );
              Scalar const kr = conductance( sd.id, r );
              Scalar const trans = face.measure / ( dl / kl + dr / kr );
              Scalar drive = pl - X( row_r );
              double const g_dx = fracpm::dot( prm.gravity, xr - xl );
              if( g_dx != 0.0 )
              {
                drive += ( now.density[si][li] + now.density[si][ri] ) * ( 0.5 * g_dx );
              }
              Scalar const q = trans * drive;
              Scalar const mass = q * ( q.value() > 0.0 ? now.density[si][li] : now.density[si][ri] );
              ws.row( row_l ) += mass;
              ws.row( row_r ) -= mass;
              break;
            }
            case FaceKind::ExternalBoundary:
            {
              auto const it = m_setup.bc.flow.find( face.tag );
              if( it == m_setup.bc.flow.end() )
              {
                throw ValidationError( "unassigned boundary tag '" + face.tag + "' for flow" );
              }
              if( it->second.kind == FlowBoundary::Kind::Pressure )
              {
                double const pd = prm.stress( it->second.value );
                double const dl = half_distance( face, xl, sd.dim );
                Scalar const trans = conductance( sd.id, l ) * ( face.measure / dl );
                Scalar drive = pl - Scalar( pd );
                double const g_dx = fracpm::dot( prm.gravity, face.center - xl );
                if( g_dx != 0.0 )
                {
                  drive += now.density[si][li] * g_dx;
                }
                Scalar const q = trans * drive;
                Scalar const rho = q.value() > 0.0 ? now.density[si][li] : law::fluid_density( Scalar( pd ), prm );
                ws.row( row_l ) += q * rho;
              }
              else
              {
                double const flux = prm.mass_flux( it->second.value ) * face.measure;
                ws.row( row_l ) += now.specific_volume[si][li] * flux;
              }
              break;
            }
            case FaceKind::ImmersedTip:
              break;
            case FaceKind::InternalBoundary:
            {
              auto const & intf = mesh.interface( face.interface );
              auto const & mc = intf.cells[static_cast< std::size_t >( face.mortar )];
              auto const lo = static_cast< std::size_t >( intf.lower );
              auto const lc = static_cast< std::size_t >( mc.lower_cell );
              Scalar const & v = X( m_dofs.interface_flux( intf.id, face.mortar ) );
              Scalar const & rho = law::upstream_density( v.value(), now.density[si][li], now.density[lo][lc] );
              Scalar const mass = now.specific_volume[si][li] * rho * v * mc.measure;
              ws.row( row_l ) += mass;
              ws.row( m_dofs.pressure( intf.lower, mc.lower_cell ) ) -= mass;
              break;
            }
          }
        }
      }
      if( m_setup.well )
      {
        auto const & w = *m_setup.well;
        Index const row = m_dofs.pressure( w.subdomain, w.cell );
        ws.row( row ) = X( row ) - Scalar( prm.stress( w.pressure ) );
      }
    }
  }

  if( interface )
  {
    for( auto const & intf : mesh.interfaces() )
    {
      auto const & higher = mesh.subdomain( intf.higher );
      auto const hi = static_cast< std::size_t >( intf.higher );
      auto const lo = static_cast< std::size_t >( intf.lower );
      for( Index m = 0; m < intf.num_cells(); ++m )
      {
        Index const row = m_dofs.interface_flux( intf.id, m );
        Scalar const & v = X( row );
        if( m_setup.mechanics_only )
        {
          ws.row( row ) = v;
          continue;
        }
        auto const & mc = intf.cells[static_cast< std::size_t >( m )];
        auto const & face = higher.faces[static_cast< std::size_t >( mc.higher_face )];
        auto const hc = static_cast< std::size_t >( face.cells[0] );
        auto const lc = static_cast< std::size_t >( mc.lower_cell );
        Scalar const & a = now.aperture[lo][lc];
        Scalar const perm = law::cubic_law_permeability( a );
        // Face trace of the higher pressure from the half-cell Darcy law.
        Vec2 const xc = higher.cell_centers[hc];
        double const dh = higher.dim == 2 ? std::abs( fracpm::dot( face.center - xc, face.normal ) ) : norm( face.center - xc );
        Scalar const kh = higher.dim == 2 ? Scalar( prm.permeability ) : law::cubic_law_permeability( now.aperture[hi][hc] );
        Scalar ph = X( m_dofs.pressure( intf.higher, face.cells[0] ) ) - v * ( dh * eta ) / kh;
        double const g_half = fracpm::dot( prm.gravity, face.center - xc );
        if( g_half != 0.0 )
        {
          ph += now.density[hi][hc] * g_half;
        }
        Scalar const & pl = X( m_dofs.pressure( intf.lower, mc.lower_cell ) );
        // v + (K/eta) [(2/a)(p_l - p_h) - rho g.n], multiplied by a eta / (2 K) to pressure units.
        Scalar r = v * ( a * eta ) / ( perm * 2.0 ) + pl - ph;
        double const gn = fracpm::dot( prm.gravity, face.normal );
        if( gn != 0.0 )
        {
          r -= law::upstream_density( v.value(), now.density[hi][hc], now.density[lo][lc] ) * a * ( 0.5 * gn );
        }
        ws.row( row ) = r;
      }
    }
  }

  if( contact_rows )
  {
    for( std::size_t i = 0; i < m_contact_cells.size(); ++i )
    {
      auto const [k, m] = m_contact_location[i];
      auto const ki = static_cast< std::size_t >( k );
      auto const mi = static_cast< std::size_t >( m );
      contact::ContactInputs<Scalar, 1> in;
      in.lambda_n = X( m_contact_cells[i].lambda_n );
      in.lambda_tau = { X( m_contact_cells[i].lambda_tau ) };
      in.jump_n = now.jump_n[ki][mi];
      in.jump_tau = { now.jump_tau[ki][mi] };
      in.gap = law::gap( ad::abs( now.jump_tau[ki][mi] ), prm );
      in.friction = m_contact_cells[i].friction;
      in.c = closure->c;
      // Previous tangential jump.
      auto const [ij, ik] = mesh.fracture_interfaces( k );
      auto const & frac = mesh.subdomain( mesh.fracture_subdomain( k ) );
      Vec2 const t = frac.cell_tangents[mi];
      double const jx = m_prev[m_dofs.interface_displacement( ik, m, 0 )] - m_prev[m_dofs.interface_displacement( ij, m, 0 )];
      double const jy = m_prev[m_dofs.interface_displacement( ik, m, 1 )] - m_prev[m_dofs.interface_displacement( ij, m, 1 )];
      in.jump_tau_prev = { jx * t.x + jy * t.y };
      if( closure->kind == solvers::ContactClosure::Kind::Exact )
      {
        ws.row( m_contact_cells[i].lambda_n ) = contact::complementarity_normal( in );
        ws.row( m_contact_cells[i].lambda_tau ) = contact::complementarity_tangential( in )[0];
      }
      else
      {
        auto const [cn, ct] = contact::regularized_complementarity( in, closure->anchor.at( i ) );
        ws.row( m_contact_cells[i].lambda_n ) = cn;
        ws.row( m_contact_cells[i].lambda_tau ) = ct[0];
      }
    }
  }
}

namespace
{

void init_workspace( std::vector<Scalar> & x, std::vector<Scalar> & rows, Vector const & v )
{
  auto const n = static_cast< std::size_t >( v.size() );
  x.resize( n );
  rows.assign( n, Scalar( 0.0 ) );
  for( std::size_t i = 0; i < n; ++i )
  {
    x[i] = Scalar::variable( v[static_cast< Index >( i )], static_cast< Index >( i ) );
  }
}

Vector values( std::vector<Scalar> const & rows )
{
  Vector r( static_cast< Index >( rows.size() ) );
  for( std::size_t i = 0; i < rows.size(); ++i )
  {
    r[static_cast< Index >( i )] = rows[i].value();
  }
  return r;
}

} // namespace

solvers::Evaluation PoromechanicsModel::evaluate( Vector const & x,
                                                  solvers::ContactClosure const & closure,
                                                  bool with_jacobian ) const
{
  if( x.size() != m_dofs.size() )
  {
    throw Error( "state size does not match the dof map" );
  }
  Workspace ws;
  init_workspace( ws.x, ws.rows, x );
  assemble( ws, true, true, true, true, &closure );
  solvers::Evaluation out;
  out.residual = values( ws.rows );
  out.clamps = ws.clamps;
  if( with_jacobian )
  {
    std::vector<Eigen::Triplet<double>> trip;
    for( std::size_t i = 0; i < ws.rows.size(); ++i )
    {
      for( auto const & e : ws.rows[i].gradient() )
      {
        if( e.value != 0.0 )
        {
          trip.emplace_back( static_cast< int >( i ), static_cast< int >( e.index ), e.value );
        }
      }
    }
    out.jacobian.resize( m_dofs.size(), m_dofs.size() );
    out.jacobian.setFromTriplets( trip.begin(), trip.end() );
  }
  return out;
}

Vector PoromechanicsModel::assemble_flow( Vector const & x ) const
{
  Workspace ws;
  init_workspace( ws.x, ws.rows, x );
  assemble( ws, true, false, false, false, nullptr );
  return values( ws.rows );
}

Vector PoromechanicsModel::assemble_mechanics( Vector const & x ) const
{
  Workspace ws;
  init_workspace( ws.x, ws.rows, x );
  assemble( ws, false, true, false, false, nullptr );
  return values( ws.rows );
}

Vector PoromechanicsModel::assemble_interface_flux( Vector const & x ) const
{
  Workspace ws;
  init_workspace( ws.x, ws.rows, x );
  assemble( ws, false, false, true, false, nullptr );
  return values( ws.rows );
}

std::array<double, 3> PoromechanicsModel::element_stress( Vector const & x, Index cell ) const
{
  auto const & el = m_elements.at( static_cast< std::size_t >( cell ) );
  double const p = x[m_dofs.pressure( 0, cell )];
  std::array<double, 3> avg{ 0.0, 0.0, 0.0 };
  for( int q = 0; q < 3; ++q )
  {
    law::Tensor2<double> g{};
    auto const & lam = kMidpoints[static_cast< std::size_t >( q )];
    auto const add = [&]( Vec2 const & u, Vec2 const & gr ) {
      g[0][0] += u.x * gr.x;
      g[0][1] += u.x * gr.y;
      g[1][0] += u.y * gr.x;
      g[1][1] += u.y * gr.y;
    };
    for( int a = 0; a < 3; ++a )
    {
      Index const n = el.nodes[static_cast< std::size_t >( a )];
      add( { x[m_dofs.node( n, 0 )], x[m_dofs.node( n, 1 )] }, el.grad[static_cast< std::size_t >( a )] );
    }
    for( auto const & [b, edge] : el.bubbles )
    {
      auto const ea = static_cast< std::size_t >( edge[0] );
      auto const eb = static_cast< std::size_t >( edge[1] );
      add( { x[m_dofs.bubble( b, 0 )], x[m_dofs.bubble( b, 1 )] }, 4.0 * ( lam[ea] * el.grad[eb] + lam[eb] * el.grad[ea] ) );
    }
    auto const s = law::poroelastic_stress( g, p, m_params );
    avg[0] += s[0][0] / 3.0;
    avg[1] += s[1][1] / 3.0;
    avg[2] += s[0][1] / 3.0;
  }
  return avg;
}

std::vector<ForceBalanceResidual> PoromechanicsModel::assemble_force_balance( Vector const & x ) const
{
  auto const & mesh = *m_mesh;
  auto const & matrix = mesh.matrix();
  std::vector<ForceBalanceResidual> out;
  for( Index k = 0; k < mesh.num_fractures(); ++k )
  {
    Index const s = mesh.fracture_subdomain( k );
    auto const & frac = mesh.subdomain( s );
    for( Index intf_id : mesh.fracture_interfaces( k ) )
    {
      auto const & intf = mesh.interface( intf_id );
      if( intf.num_cells() != frac.num_cells() )
      {
        throw Error( "mortar/face mismatch on interface " + std::to_string( intf_id ) );
      }
      double const sign = intf.side == Side::J ? 1.0 : -1.0;
      for( Index m = 0; m < intf.num_cells(); ++m )
      {
        auto const & mc = intf.cells[static_cast< std::size_t >( m )];
        auto const & face = matrix.faces[static_cast< std::size_t >( mc.higher_face )];
        Index const cell = face.cells[0];
        auto const & el = m_elements[static_cast< std::size_t >( cell )];
        Index const b = mesh.mechanics().face_bubble[static_cast< std::size_t >( mc.higher_face )];
        std::array<int, 2> edge{ 0, 1 };
        for( auto const & [bb, e] : el.bubbles )
        {
          if( bb == b )
          {
            edge = e;
          }
        }
        // Stress is linear on the element, so its face average is the value at the edge midpoint.
        int const q = midpoint_of_edge( edge[0], edge[1] );
        law::Tensor2<double> g{};
        auto const & lam = kMidpoints[static_cast< std::size_t >( q )];
        auto const add = [&]( Vec2 const & u, Vec2 const & gr ) {
          g[0][0] += u.x * gr.x;
          g[0][1] += u.x * gr.y;
          g[1][0] += u.y * gr.x;
          g[1][1] += u.y * gr.y;
        };
        for( int a = 0; a < 3; ++a )
        {
          Index const n = el.nodes[static_cast< std::size_t >( a )];
          add( { x[m_dofs.node( n, 0 )], x[m_dofs.node( n, 1 )] }, el.grad[static_cast< std::size_t >( a )] );
        }
        for( auto const & [bb, e] : el.bubbles )
        {
          auto const ea = static_cast< std::size_t >( e[0] );
          auto const eb = static_cast< std::size_t >( e[1] );
          add( { x[m_dofs.bubble( bb, 0 )], x[m_dofs.bubble( bb, 1 )] },
               4.0 * ( lam[ea] * el.grad[eb] + lam[eb] * el.grad[ea] ) );
        }
        auto const sigma = law::poroelastic_stress( g, x[m_dofs.pressure( 0, cell )], m_params );
        Vec2 const nh = face.normal;
        Vec2 const sn{ sigma[0][0] * nh.x + sigma[0][1] * nh.y, sigma[1][0] * nh.x + sigma[1][1] * nh.y };
        Vec2 const n = frac.cell_normals[static_cast< std::size_t >( mc.lower_cell )];
        Vec2 const t = frac.cell_tangents[static_cast< std::size_t >( mc.lower_cell )];
        double const ln = x[m_dofs.traction( k, mc.lower_cell, 0 )];
        double const lt = x[m_dofs.traction( k, mc.lower_cell, 1 )];
        double const pl = x[m_dofs.pressure( s, mc.lower_cell )];
        Vec2 const lhs = ( ln - pl ) * n + lt * t;
        out.push_back( { intf_id, m, lhs - sign * sn } );
      }
    }
  }
  return out;
}

std::vector<FractureKinematics> PoromechanicsModel::kinematics( Vector const & x, Index fracture ) const
{
  auto const & mesh = *m_mesh;
  auto const & frac = mesh.subdomain( mesh.fracture_subdomain( fracture ) );
  auto const [ij, ik] = mesh.fracture_interfaces( fracture );
  std::vector<FractureKinematics> out;
  for( Index m = 0; m < frac.num_cells(); ++m )
  {
    Vec2 const n = frac.cell_normals[static_cast< std::size_t >( m )];
    Vec2 const t = frac.cell_tangents[static_cast< std::size_t >( m )];
    Vec2 const jump{ x[m_dofs.interface_displacement( ik, m, 0 )] - x[m_dofs.interface_displacement( ij, m, 0 )],
                     x[m_dofs.interface_displacement( ik, m, 1 )] - x[m_dofs.interface_displacement( ij, m, 1 )] };
    FractureKinematics kin;
    kin.jump_n = fracpm::dot( jump, n );
    kin.jump_tau = fracpm::dot( jump, t );
    kin.aperture = law::fracture_aperture( kin.jump_n, m_params );
    kin.lambda_n = x[m_dofs.traction( fracture, m, 0 )];
    kin.lambda_tau = x[m_dofs.traction( fracture, m, 1 )];
    out.push_back( kin );
  }
  return out;
}

contact::ContactInputs<double, 1> PoromechanicsModel::contact_inputs( Vector const & x, std::size_t i, double c ) const
{
  auto const [k, m] = m_contact_location.at( i );
  auto const now = kinematics( x, k )[static_cast< std::size_t >( m )];
  auto const old = kinematics( m_prev, k )[static_cast< std::size_t >( m )];
  contact::ContactInputs<double, 1> in;
  in.lambda_n = now.lambda_n;
  in.lambda_tau = { now.lambda_tau };
  in.jump_n = now.jump_n;
  in.jump_tau = { now.jump_tau };
  in.jump_tau_prev = { old.jump_tau };
  in.gap = law::gap( std::abs( now.jump_tau ), m_params );
  in.c = c;
  in.friction = m_contact_cells[i].friction;
  return in;
}

solvers::Census PoromechanicsModel::census( Vector const & x, solvers::ContactClosure const & closure ) const
{
  solvers::Census out;
  std::vector<std::vector<FractureKinematics>> now;
  std::vector<std::vector<FractureKinematics>> old;
  for( Index k = 0; k < m_mesh->num_fractures(); ++k )
  {
    now.push_back( kinematics( x, k ) );
    old.push_back( kinematics( m_prev, k ) );
  }
  for( std::size_t i = 0; i < m_contact_cells.size(); ++i )
  {
    auto const [k, m] = m_contact_location[i];
    auto const & a = now[static_cast< std::size_t >( k )][static_cast< std::size_t >( m )];
    auto const & b = old[static_cast< std::size_t >( k )][static_cast< std::size_t >( m )];
    contact::ContactInputs<double, 1> in;
    in.lambda_n = a.lambda_n;
    in.lambda_tau = { a.lambda_tau };
    in.jump_n = a.jump_n;
    in.jump_tau = { a.jump_tau };
    in.jump_tau_prev = { b.jump_tau };
    in.gap = law::gap( std::abs( a.jump_tau ), m_params );
    in.c = closure.c;
    in.friction = m_contact_cells[i].friction;
    bool unreachable = false;
    auto const state = closure.kind == solvers::ContactClosure::Kind::Exact
                         ? contact::classify( in, &unreachable )
                         : contact::classify_regularized( in, closure.anchor.at( i ), &unreachable );
    switch( state )
    {
      case contact::ContactState::Open: ++out.open; break;
      case contact::ContactState::Stick: ++out.stick; break;
      case contact::ContactState::Slip: ++out.slip; break;
    }
    out.unreachable += unreachable ? 1 : 0;
  }
  return out;
}

} // namespace fracpm::assembly
