#pragma once

#include "chbc/common.hpp"
#include "chbc/discretization.hpp"

namespace chbc {

/// Assembles the coupled per-step block operator on unknowns (y, w):
///
///   [ M/tau   K  ]        with  A = K + M diag(a) + T'(Mb/tau + Kb + Mb diag(ab))T,
///   [ A      -M  ]
///
/// where T is the trace map. `transposed` swaps the off-diagonal blocks,
/// giving the exact transpose used by the backward (adjoint) sweep.
SpMat assemble_step_matrix(const Discretization& d, double tau, const Field& a_bulk,
                           const BoundaryField& a_bdry, bool transposed);

/// Factors A (sparse LU) and solves A x = b. `natural_ordering` switches the
/// fill-reducing ordering; used by the adjoint-uniqueness probe.
Eigen::VectorXd solve_sparse(const SpMat& A, const Eigen::VectorXd& b, bool natural_ordering);

}  // namespace chbc
