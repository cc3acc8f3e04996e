#include "chbc/step_system.hpp"

#include <Eigen/SparseLU>

namespace chbc {

SpMat assemble_step_matrix(const Discretization& d, double tau, const Field& a_bulk,
                           const BoundaryField& a_bdry, bool transposed) {
  const int nb = d.bulk_nodes;
  const int ng = d.boundary_nodes();
  require(a_bulk.size() == nb && a_bdry.size() == ng, "assemble_step_matrix: size mismatch");

  // All blocks are symmetric, so the transpose just swaps the positions of
  // the K and A off-diagonal blocks.
  const int K_row = transposed ? nb : 0, K_col = transposed ? 0 : nb;
  const int A_row = transposed ? 0 : nb, A_col = transposed ? nb : 0;

  std::vector<Triplet> t;
  t.reserve(2 * d.K.nonZeros() + d.Kb.nonZeros() + 4 * nb);

  for (int col = 0; col < d.K.outerSize(); ++col) {
    for (SpMat::InnerIterator it(d.K, col); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      t.emplace_back(K_row + r, K_col + c, it.value());  // K block
      t.emplace_back(A_row + r, A_col + c, it.value());  // K contribution to A
    }
  }
  for (int i = 0; i < nb; ++i) {
    t.emplace_back(i, i, d.M_diag[i] / tau);                     // M/tau
    t.emplace_back(A_row + i, A_col + i, d.M_diag[i] * a_bulk[i]);  // M diag(a)
    t.emplace_back(nb + i, nb + i, -d.M_diag[i]);                // -M
  }
  for (int b = 0; b < ng; ++b) {
    const int i = d.boundary_index[b];
    t.emplace_back(A_row + i, A_col + i, d.Mb_diag[b] * (1.0 / tau + a_bdry[b]));
  }
  for (int col = 0; col < d.Kb.outerSize(); ++col) {
    for (SpMat::InnerIterator it(d.Kb, col); it; ++it) {
      const int r = d.boundary_index[it.row()];
      const int c = d.boundary_index[it.col()];
      t.emplace_back(A_row + r, A_col + c, it.value());
    }
  }

  SpMat A(2 * nb, 2 * nb);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

Eigen::VectorXd solve_sparse(const SpMat& A, const Eigen::VectorXd& b, bool natural_ordering) {
  if (natural_ordering) {
    Eigen::SparseLU<SpMat, Eigen::NaturalOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverError("solve_sparse: factorization failed");
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite())
      throw SolverError("solve_sparse: solve failed");
    return x;
  }
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverError("solve_sparse: factorization failed");
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw SolverError("solve_sparse: solve failed");
  return x;
}

}  // namespace chbc
