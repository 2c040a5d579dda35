#pragma once

#include "fracpm/ad/scalar.hpp"
#include "fracpm/assembly/dof_map.hpp"
#include "fracpm/constitutive/material.hpp"
#include "fracpm/mdgeom/mesh.hpp"
#include "fracpm/solvers/problem.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fracpm::assembly
{

using solvers::Vector;

struct FlowBoundary
{
  enum class Kind
  {
    Pressure,  ///< Dirichlet, value in Pa
    Flux,      ///< Neumann, outward mass flux in kg/(m^2 s)
  };
  Kind kind = Kind::Flux;
  double value = 0.0;
};

struct MechanicsBoundary
{
  enum class Kind
  {
    Fixed,     ///< u = 0
    Roller,    ///< u . n = 0, zero tangential traction
    Traction,  ///< prescribed traction vector in Pa
    Stress,    ///< traction sigma_bg . n from the background stress
  };
  Kind kind = Kind::Traction;
  Vec2 traction;
};

/// Boundary data keyed by boundary tag. All values in unscaled SI units.
struct BoundaryConditions
{
  std::map<std::string, FlowBoundary> flow;
  std::map<std::string, MechanicsBoundary> mechanics;
  /// Background total stress (sxx, syy, sxy) in Pa, used by Stress boundaries.
  std::array<double, 3> background_stress{ 0.0, 0.0, 0.0 };
};

/// Pressure-constrained cell (Pa).
struct Well
{
  Index subdomain = -1;
  Index cell = -1;
  double pressure = 0.0;
};

struct ModelSetup
{
  constitutive::MaterialParams material;
  BoundaryConditions bc;
  std::optional<Well> well;
  /// Time step in seconds.
  double dt = 8640.0;
  /// Background pressure in Pa; initial value and the frozen value in mechanics-only mode.
  double background_pressure = 2.0e7;
  /// Replace the flow and interface flux rows by p = p_bg and v_j = 0.
  bool mechanics_only = false;
};

/// Per-fracture-cell kinematics derived from a state.
struct FractureKinematics
{
  double jump_n = 0.0;
  double jump_tau = 0.0;
  double aperture = 0.0;
  double lambda_n = 0.0;
  double lambda_tau = 0.0;
};

/// Pointwise force balance on one mortar cell: Pi(lambda - p_l n_l) -/+ sigma_h n_h.
struct ForceBalanceResidual
{
  Index interface = -1;
  Index mortar = -1;
  Vec2 value;
};

/**
 * Residual system of one implicit Euler step plus the contact rows, with its generalized
 * Jacobian by forward-mode differentiation.
 *
 * Rows follow the unknown layout of DofMap: mass balance per cell, momentum balance per
 * displacement dof, trace continuity per interface displacement, interface Darcy law per
 * interface flux, and the complementarity functions per traction component.
 * All internal quantities are in the mass-scaled unit system.
 */
class PoromechanicsModel final : public solvers::NonlinearProblem
{
public:
  PoromechanicsModel( mdgeom::MdMesh const & mesh, ModelSetup setup );

  mdgeom::MdMesh const & mesh() const { return *m_mesh; }
  DofMap const & dofs() const { return m_dofs; }
  ModelSetup const & setup() const { return m_setup; }
  constitutive::ScaledParams const & params() const { return m_params; }

  /// Previous time step state; must be set before evaluating.
  void set_previous( Vector prev ) { m_prev = std::move( prev ); }
  Vector const & previous() const { return m_prev; }
  void set_mechanics_only( bool on ) { m_setup.mechanics_only = on; }
  void set_well( std::optional<Well> well ) { m_setup.well = well; }

  /// p = background everywhere, all other unknowns zero.
  Vector initial_state() const;

  Index size() const override { return m_dofs.size(); }
  solvers::Evaluation evaluate( Vector const & x, solvers::ContactClosure const & closure, bool with_jacobian ) const override;
  Vector const & norm_weights() const override { return m_weights; }
  std::vector<solvers::ContactCell> const & contact_cells() const override { return m_contact_cells; }
  solvers::Census census( Vector const & x, solvers::ContactClosure const & closure ) const override;

  /// Block residuals (no Jacobian); rows outside the block are zero.
  Vector assemble_flow( Vector const & x ) const;
  Vector assemble_mechanics( Vector const & x ) const;
  Vector assemble_interface_flux( Vector const & x ) const;
  std::vector<ForceBalanceResidual> assemble_force_balance( Vector const & x ) const;

  std::vector<FractureKinematics> kinematics( Vector const & x, Index fracture ) const;
  /// Contact inputs of fracture cell `cell` in contact cell order.
  contact::ContactInputs<double, 1> contact_inputs( Vector const & x, std::size_t contact_cell, double c ) const;

  /// Element-averaged total stress (sxx, syy, sxy) in scaled units.
  std::array<double, 3> element_stress( Vector const & x, Index cell ) const;

  /// Convert between SI and internal units for pressures/stresses.
  double to_internal_stress( double pa ) const { return m_params.stress( pa ); }

private:
  struct Element
  {
    double area = 0.0;
    std::array<Vec2, 3> grad;  ///< P1 basis gradients
    std::array<Index, 3> nodes;
    /// Bubbles on this triangle: bubble index and the two local vertex indices of its edge.
    std::vector<std::pair<Index, std::array<int, 2>>> bubbles;
  };

  struct Workspace;

  void assemble( Workspace & ws, bool flow, bool mechanics, bool interface, bool contact,
                 solvers::ContactClosure const * closure ) const;

  mdgeom::MdMesh const * m_mesh;
  ModelSetup m_setup;
  constitutive::ScaledParams m_params;
  DofMap m_dofs;
  Vector m_prev;
  Vector m_weights;
  std::vector<Element> m_elements;
  std::vector<solvers::ContactCell> m_contact_cells;
  /// (fracture index, cell) of each contact cell.
  std::vector<std::pair<Index, Index>> m_contact_location;
};

} // namespace fracpm::assembly
