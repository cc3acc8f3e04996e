#pragma once

#include "chbc/common.hpp"

namespace chbc {

/// Uniform time grid on [0, T] with node times t_k = k tau.
struct TimeGrid {
  double T = 1.0;
  int steps = 1;

  double tau() const { return T / steps; }
  double time(int k) const { return k * tau(); }

  /// Trapezoidal quadrature weight of node k (includes the tau factor).
  double weight(int k) const { return (k == 0 || k == steps) ? 0.5 * tau() : tau(); }

  void validate() const {
    require(steps >= 1, "TimeGrid: steps must be positive");
    require(T > 0.0, "TimeGrid: final time must be positive");
  }
};

}  // namespace chbc
