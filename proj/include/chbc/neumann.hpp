#pragma once

#include <Eigen/SparseLU>

#include "chbc/common.hpp"
#include "chbc/discretization.hpp"

namespace chbc {

/// Inverse of the generalized Neumann problem for -Laplace: given a
/// zero-mean datum v*, solve K v = M v* with zero mean value, via the
/// augmented saddle system [K, M1; 1'M, 0] factorized once at construction.
///
/// Also provides the dual norm ||v*||_* = sqrt((Nv*)' K (Nv*)) and the
/// symmetric bilinear form u*' M N v*.
class NeumannOperator {
 public:
  explicit NeumannOperator(const Discretization& d);

  /// Solves for N v*; the datum must have zero mean within 1e-10 relative.
  Field solve(const Field& v_star) const;

  double dual_norm(const Field& v_star) const;

  /// u*' M N v*; equals the symmetric pairing <u*, N v*>.
  double pairing(const Field& u_star, const Field& v_star) const;

  const Discretization& discretization() const { return *d_; }

 private:
  const Discretization* d_;
  Eigen::SparseLU<SpMat> lu_;
};

}  // namespace chbc
