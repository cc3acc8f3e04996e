#include "chbc/neumann.hpp"

#include <cmath>

namespace chbc {

NeumannOperator::NeumannOperator(const Discretization& d) : d_(&d) {
  const int nb = d.bulk_nodes;
  std::vector<Triplet> t;
  t.reserve(d.K.nonZeros() + 2 * nb);
  for (int col = 0; col < d.K.outerSize(); ++col)
    for (SpMat::InnerIterator it(d.K, col); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < nb; ++i) {
    t.emplace_back(i, nb, d.M_diag[i]);  // K v + alpha M 1 = M v*
    t.emplace_back(nb, i, d.M_diag[i]);  // 1' M v = 0
  }
  SpMat aug(nb + 1, nb + 1);
  aug.setFromTriplets(t.begin(), t.end());
  lu_.compute(aug);
  if (lu_.info() != Eigen::Success)
    throw SolverError("NeumannOperator: factorization of the augmented system failed");
}

Field NeumannOperator::solve(const Field& v_star) const {
  const Discretization& d = *d_;
  require(v_star.size() == d.bulk_nodes, "NeumannOperator::solve: size mismatch");
  const double scale = v_star.cwiseAbs().maxCoeff();
  const double mean = d.mean_value(v_star);
  require(std::abs(mean) <= 1e-10 * (1.0 + scale),
          "NeumannOperator::solve: datum must have zero mean value");

  Eigen::VectorXd rhs(d.bulk_nodes + 1);
  rhs.head(d.bulk_nodes) = d.M_diag.cwiseProduct(v_star);
  rhs[d.bulk_nodes] = 0.0;
  Eigen::VectorXd sol = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success || !sol.allFinite())
    throw SolverError("NeumannOperator::solve: singular solve failure");
  return sol.head(d.bulk_nodes);
}

double NeumannOperator::dual_norm(const Field& v_star) const {
  const Field v = solve(v_star);
  return std::sqrt(std::max(0.0, v.dot(d_->K * v)));
}

double NeumannOperator::pairing(const Field& u_star, const Field& v_star) const {
  const Field v = solve(v_star);
  return u_star.dot(d_->M_diag.cwiseProduct(v));
}

}  // namespace chbc
