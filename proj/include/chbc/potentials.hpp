#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chbc/common.hpp"

namespace chbc {

/// Dense polynomial with coefficients in ascending degree; derivatives of
/// any order are evaluated exactly from the coefficient list.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  double eval(double r, int order = 0) const;
  int degree() const;
  const std::vector<double>& coefficients() const { return c_; }
  bool empty() const { return c_.empty(); }

 private:
  std::vector<double> c_;
};

/// C^4 scalar potential. Polynomial by default; `custom` is a hook for a
/// user-supplied smooth function (r, order) -> d^order f / dr^order.
struct Potential {
  Polynomial poly;
  std::function<double(double, int)> custom;

  /// Derivative of order 0..4 at r; order > 4 is invalid-argument.
  double eval(double r, int order = 0) const;
  bool is_polynomial() const { return !custom; }
};

/// Bulk/boundary potential pair with the constants of the structural
/// assumptions: |f'(r)| <= eta |f_b'(r)| + C_compat (boundary dominance)
/// and lower bounds for f'' and f_b''.
struct PotentialPair {
  Potential bulk;
  Potential boundary;
  double eta = 1.0;
  double C_compat = 0.0;
  double lower_bound_fpp = 0.0;
  double lower_bound_fGpp = 0.0;
};

/// f(r) = 1/4 (r^2 - 1)^2 for both bulk and boundary; eta = 1, C = 0,
/// second-derivative lower bounds -1.
PotentialPair regular_double_well();

struct AssumptionCheck {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // most violating margin encountered (>= 0 means pass)
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool all_pass() const;
};

/// Samples the structural assumptions on [r_lo, r_hi]: nonnegativity,
/// f'(0) = f_b'(0) = 0, second-derivative lower bounds, boundary dominance,
/// and the coercivity sign conditions f'(r_lo) < 0 < f'(r_hi).
/// Failures are report entries, not exceptions.
AssumptionReport check_assumptions(const PotentialPair& pair, double r_lo, double r_hi,
                                   int samples);

/// Convex-concave decomposition f = f_cx + f_cc with f_cx(r) = f(r) + rho r^2/2,
/// f_cc(r) = -rho r^2/2, rho = max(0, -lower_bound_fpp).
struct SplitPotential {
  Potential base;
  double rho = 0.0;

  double convex(double r, int order) const;
  double concave(double r, int order) const;
  double total(double r, int order = 0) const { return base.eval(r, order); }
};

/// Builds the split and refuses (SolverError) if f'' + rho is negative
/// somewhere on the sampled validation range.
SplitPotential convex_concave_split(const Potential& p, double lower_bound_pp,
                                    double r_lo = -3.0, double r_hi = 3.0, int samples = 601);

struct SplitPair {
  SplitPotential bulk;
  SplitPotential boundary;
};

SplitPair make_split(const PotentialPair& pair, double r_lo = -3.0, double r_hi = 3.0,
                     int samples = 601);

}  // namespace chbc
