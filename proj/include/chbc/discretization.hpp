#pragma once

#include <vector>

#include "chbc/common.hpp"

namespace chbc {

/// Mesh plus the assembled discrete operators of the weak form:
/// bulk mass M and stiffness K, boundary mass Mb and Laplace-Beltrami
/// stiffness Kb, and the trace map realized by boundary_index.
///
/// Masses are lumped (diagonal), so pointwise nonlinearities, mean values
/// and box projections are exact. Immutable after construction.
struct Discretization {
  int dimension = 1;  // 1 or 2
  int n = 0;          // cells per side
  double h = 0.0;     // mesh spacing on the unit domain

  int bulk_nodes = 0;
  std::vector<int> boundary_index;  // bulk index of each boundary node (ccw in 2D)

  SpMat M;   // bulk mass, diagonal
  SpMat K;   // bulk stiffness, K*1 = 0
  SpMat Mb;  // boundary mass, diagonal
  SpMat Kb;  // boundary Laplace-Beltrami stiffness, Kb*1 = 0

  Eigen::VectorXd M_diag;   // diag(M)
  Eigen::VectorXd Mb_diag;  // diag(Mb)

  Eigen::MatrixXd coords;  // bulk_nodes x dimension

  double volume = 0.0;     // |Omega| = 1' M 1
  double perimeter = 0.0;  // |Gamma| = 1' Mb 1

  int boundary_nodes() const { return static_cast<int>(boundary_index.size()); }

  /// Restriction of a bulk field to the boundary nodes.
  BoundaryField trace(const Field& v) const;

  /// Adjoint of the trace as a node map: places g on boundary nodes, zero elsewhere.
  Field lift_boundary(const BoundaryField& g) const;

  double integrate(const Field& v) const;                   // 1' M v
  double boundary_integrate(const BoundaryField& g) const;  // 1' Mb g

  /// Generalized mean value (1' M v) / |Omega|.
  double mean_value(const Field& v) const;
};

/// Uniform mesh on Omega = (0,1) with n cells; Gamma = {0,1}.
/// Mb is the 2x2 identity (counting measure) and Kb = 0.
Discretization build_interval_mesh(int n);

/// Tensor grid on Omega = (0,1)^2 with n cells per side; Gamma is the
/// perimeter polyline traversed counterclockwise, treated as a closed
/// curve (periodic chain through the corner nodes).
Discretization build_square_mesh(int n);

}  // namespace chbc
