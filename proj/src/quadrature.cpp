#include "chbc/quadrature.hpp"

#include <cmath>

namespace chbc {

namespace {
void check_shape(const Discretization& d, const TimeGrid& g, const Eigen::MatrixXd& A) {
  require(A.rows() == d.boundary_nodes() && A.cols() == g.steps + 1,
          "sigma product: array shape must be boundary_nodes x (steps+1)");
}
}  // namespace

double sigma_inner(const Discretization& d, const TimeGrid& g, const Eigen::MatrixXd& A,
                   const Eigen::MatrixXd& B) {
  check_shape(d, g, A);
  check_shape(d, g, B);
  double acc = 0.0;
  for (int k = 0; k <= g.steps; ++k)
    acc += g.weight(k) * A.col(k).dot(d.Mb_diag.cwiseProduct(B.col(k)));
  return acc;
}

double sigma_norm(const Discretization& d, const TimeGrid& g, const Eigen::MatrixXd& A) {
  return std::sqrt(std::max(0.0, sigma_inner(d, g, A, A)));
}

double sigma_dt_norm(const Discretization& d, const TimeGrid& g, const Eigen::MatrixXd& A) {
  check_shape(d, g, A);
  double acc = 0.0;
  for (int k = 0; k < g.steps; ++k) {
    const Eigen::VectorXd diff = A.col(k + 1) - A.col(k);
    acc += diff.dot(d.Mb_diag.cwiseProduct(diff)) / g.tau();
  }
  return std::sqrt(std::max(0.0, acc));
}

}  // namespace chbc
