#pragma once

#include "chbc/discretization.hpp"
#include "chbc/time_grid.hpp"

namespace chbc {

/// L2(Sigma) inner product of two boundary space-time arrays
/// (boundary_nodes x steps+1): trapezoidal in time, Mb-weighted in space.
double sigma_inner(const Discretization& d, const TimeGrid& g, const Eigen::MatrixXd& A,
                   const Eigen::MatrixXd& B);

double sigma_norm(const Discretization& d, const TimeGrid& g, const Eigen::MatrixXd& A);

/// Discrete || d/dt u ||_{L2(Sigma)}: forward differences, tau-weighted.
double sigma_dt_norm(const Discretization& d, const TimeGrid& g, const Eigen::MatrixXd& A);

}  // namespace chbc
