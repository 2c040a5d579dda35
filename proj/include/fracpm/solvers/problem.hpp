#pragma once

#include "fracpm/common.hpp"
#include "fracpm/contact/kernels.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace fracpm::solvers
{

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Which complementarity functions close the system.
struct ContactClosure
{
  enum class Kind
  {
    Exact,
    Regularized,
  };
  Kind kind = Kind::Exact;
  double c = 1.0;
  /// Anchor traction per contact cell (regularized kind only).
  std::vector<contact::Traction<double, 1>> anchor;
};

/// Unknown indices of the traction of one fracture cell, in local (normal, tangential) components.
struct ContactCell
{
  Index lambda_n = -1;
  Index lambda_tau = -1;
  double friction = 0.5;
};

struct Census
{
  int open = 0;
  int stick = 0;
  int slip = 0;
  /// Cells outside the open set with b <= 0.
  int unreachable = 0;
};

struct Evaluation
{
  Vector residual;
  SparseMatrix jacobian;
  /// Apertures clamped to the floor during this evaluation.
  int clamps = 0;
};

/**
 * A nonlinear system F(x) = 0 whose contact rows can be closed by exact or regularized
 * complementarity functions.
 */
class NonlinearProblem
{
public:
  virtual ~NonlinearProblem() = default;

  virtual Index size() const = 0;
  virtual Evaluation evaluate( Vector const & x, ContactClosure const & closure, bool with_jacobian ) const = 0;
  /// Nonnegative weight per unknown/equation used by the scaled norm.
  virtual Vector const & norm_weights() const = 0;
  virtual std::vector<ContactCell> const & contact_cells() const = 0;
  virtual Census census( Vector const & x, ContactClosure const & closure ) const = 0;
};

/// sqrt(sum_i w_i v_i^2)
double scaled_norm( Vector const & v, Vector const & weights );

} // namespace fracpm::solvers
