#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <limits>
#include <stdexcept>
#include <string>

namespace chbc {

/// Nodal values on the bulk nodes of a Discretization.
using Field = Eigen::VectorXd;
/// Nodal values on the boundary nodes, ordered as Discretization::boundary_index.
using BoundaryField = Eigen::VectorXd;

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Failure inside a linear solve or a non-recoverable numerical breakdown.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A nonlinear time step did not converge; carries diagnostics.
class StepFailure : public SolverError {
 public:
  StepFailure(const std::string& msg, int step, int iterations, double residual)
      : SolverError(msg), step(step), iterations(iterations), residual(residual) {}
  int step;
  int iterations;
  double residual;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace chbc
