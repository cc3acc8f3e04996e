#include "chbc/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chbc {

double Polynomial::eval(double r, int order) const {
  require(order >= 0, "Polynomial::eval: negative derivative order");
  // Horner on the analytically differentiated coefficient list.
  double acc = 0.0;
  for (int k = static_cast<int>(c_.size()) - 1; k >= order; --k) {
    double fac = 1.0;
    for (int j = 0; j < order; ++j) fac *= (k - j);
    acc = acc * r + fac * c_[k];
  }
  return acc;
}

int Polynomial::degree() const {
  for (int k = static_cast<int>(c_.size()) - 1; k >= 0; --k)
    if (c_[k] != 0.0) return k;
  return 0;
}

double Potential::eval(double r, int order) const {
  require(order >= 0 && order <= 4, "Potential::eval: derivative order must be in 0..4");
  if (custom) return custom(r, order);
  return poly.eval(r, order);
}

PotentialPair regular_double_well() {
  // 1/4 (r^2-1)^2 = 1/4 - 1/2 r^2 + 1/4 r^4
  Potential f;
  f.poly = Polynomial({0.25, 0.0, -0.5, 0.0, 0.25});
  PotentialPair pair;
  pair.bulk = f;
  pair.boundary = f;
  pair.eta = 1.0;
  pair.C_compat = 0.0;
  pair.lower_bound_fpp = -1.0;   // f'' = 3r^2 - 1
  pair.lower_bound_fGpp = -1.0;
  return pair;
}

bool AssumptionReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const AssumptionCheck& c) { return c.pass; });
}

namespace {

AssumptionCheck make_check(const std::string& name, double margin, const std::string& detail) {
  AssumptionCheck c;
  c.name = name;
  c.worst = margin;
  c.pass = margin >= 0.0;
  c.detail = detail;
  return c;
}

}  // namespace

AssumptionReport check_assumptions(const PotentialPair& pair, double r_lo, double r_hi,
                                   int samples) {
  require(r_lo < r_hi, "check_assumptions: empty range");
  require(samples >= 3, "check_assumptions: need at least 3 samples");

  AssumptionReport rep;
  const double dr = (r_hi - r_lo) / (samples - 1);

  double min_f = kInf, min_fb = kInf;
  double min_fpp_margin = kInf, min_fbpp_margin = kInf;
  double min_domination = kInf;
  for (int s = 0; s < samples; ++s) {
    const double r = r_lo + s * dr;
    min_f = std::min(min_f, pair.bulk.eval(r, 0));
    min_fb = std::min(min_fb, pair.boundary.eval(r, 0));
    min_fpp_margin = std::min(min_fpp_margin, pair.bulk.eval(r, 2) - pair.lower_bound_fpp);
    min_fbpp_margin =
        std::min(min_fbpp_margin, pair.boundary.eval(r, 2) - pair.lower_bound_fGpp);
    min_domination =
        std::min(min_domination, pair.eta * std::abs(pair.boundary.eval(r, 1)) +
                                     pair.C_compat - std::abs(pair.bulk.eval(r, 1)));
  }

  rep.checks.push_back(make_check("nonnegativity f >= 0", min_f, "min f on range"));
  rep.checks.push_back(make_check("nonnegativity f_Gamma >= 0", min_fb, "min f_Gamma on range"));

  const double d0 = std::abs(pair.bulk.eval(0.0, 1));
  const double d0b = std::abs(pair.boundary.eval(0.0, 1));
  rep.checks.push_back(make_check("f'(0) = 0", d0 == 0.0 ? 0.0 : -d0, "|f'(0)|"));
  rep.checks.push_back(make_check("f_Gamma'(0) = 0", d0b == 0.0 ? 0.0 : -d0b, "|f_Gamma'(0)|"));

  rep.checks.push_back(
      make_check("f'' lower bound", min_fpp_margin, "min f'' - lower_bound_fpp"));
  rep.checks.push_back(
      make_check("f_Gamma'' lower bound", min_fbpp_margin, "min f_Gamma'' - lower_bound_fGpp"));

  rep.checks.push_back(make_check("boundary dominance |f'| <= eta |f_Gamma'| + C",
                                  min_domination, "min slack on range"));

  // Coercivity as sign conditions at the range ends (meaningful for wide ranges).
  const double lo_sign = std::min(-pair.bulk.eval(r_lo, 1), -pair.boundary.eval(r_lo, 1));
  const double hi_sign = std::min(pair.bulk.eval(r_hi, 1), pair.boundary.eval(r_hi, 1));
  rep.checks.push_back(make_check("coercivity f'(r_lo) < 0", lo_sign, "-f'(r_lo) for both"));
  rep.checks.push_back(make_check("coercivity f'(r_hi) > 0", hi_sign, "f'(r_hi) for both"));

  return rep;
}

namespace {

// Derivatives of r^2/2.
double half_square(double r, int order) {
  switch (order) {
    case 0: return 0.5 * r * r;
    case 1: return r;
    case 2: return 1.0;
    default: return 0.0;
  }
}

}  // namespace

double SplitPotential::convex(double r, int order) const {
  return base.eval(r, order) + rho * half_square(r, order);
}

double SplitPotential::concave(double r, int order) const {
  return -rho * half_square(r, order);
}

SplitPotential convex_concave_split(const Potential& p, double lower_bound_pp, double r_lo,
                                    double r_hi, int samples) {
  if (p.is_polynomial() && !p.poly.empty()) {
    const int deg = p.poly.degree();
    require(deg % 2 == 0, "convex_concave_split: polynomial degree must be even");
    require(p.poly.coefficients()[deg] > 0.0,
            "convex_concave_split: leading coefficient must be positive");
  }
  SplitPotential s;
  s.base = p;
  s.rho = std::max(0.0, -lower_bound_pp);
  const double dr = (r_hi - r_lo) / (samples - 1);
  for (int k = 0; k < samples; ++k) {
    const double r = r_lo + k * dr;
    if (s.convex(r, 2) < 0.0) {
      std::ostringstream os;
      os << "convex_concave_split: f'' + rho < 0 at r = " << r
         << "; declared lower bound " << lower_bound_pp << " does not hold on the range";
      throw SolverError(os.str());
    }
  }
  return s;
}

SplitPair make_split(const PotentialPair& pair, double r_lo, double r_hi, int samples) {
  SplitPair s;
  s.bulk = convex_concave_split(pair.bulk, pair.lower_bound_fpp, r_lo, r_hi, samples);
  s.boundary = convex_concave_split(pair.boundary, pair.lower_bound_fGpp, r_lo, r_hi, samples);
  return s;
}

}  // namespace chbc
