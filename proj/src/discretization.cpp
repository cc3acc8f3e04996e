#include "chbc/discretization.hpp"

#include <cmath>
#include <functional>

namespace chbc {

BoundaryField Discretization::trace(const Field& v) const {
  require(v.size() == bulk_nodes, "trace: field size does not match bulk node count");
  BoundaryField g(boundary_nodes());
  for (int b = 0; b < boundary_nodes(); ++b) g[b] = v[boundary_index[b]];
  return g;
}

Field Discretization::lift_boundary(const BoundaryField& g) const {
  require(g.size() == boundary_nodes(), "lift_boundary: size mismatch");
  Field v = Field::Zero(bulk_nodes);
  for (int b = 0; b < boundary_nodes(); ++b) v[boundary_index[b]] += g[b];
  return v;
}

double Discretization::integrate(const Field& v) const {
  require(v.size() == bulk_nodes, "integrate: size mismatch");
  return M_diag.dot(v);
}

double Discretization::boundary_integrate(const BoundaryField& g) const {
  require(g.size() == boundary_nodes(), "boundary_integrate: size mismatch");
  return Mb_diag.dot(g);
}

double Discretization::mean_value(const Field& v) const { return integrate(v) / volume; }

namespace {

SpMat diagonal_sparse(const Eigen::VectorXd& d) {
  SpMat m(d.size(), d.size());
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (int i = 0; i < d.size(); ++i) t.emplace_back(i, i, d[i]);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// 1D lumped mass weights on n+1 nodes with spacing h.
Eigen::VectorXd lumped_mass_1d(int n, double h) {
  Eigen::VectorXd m = Eigen::VectorXd::Constant(n + 1, h);
  m[0] = 0.5 * h;
  m[n] = 0.5 * h;
  return m;
}

// 1D second-difference stiffness on n+1 nodes, K*1 = 0.
void stiffness_1d_triplets(int n, double h, std::vector<Triplet>& t,
                           const std::function<int(int)>& idx, double scale) {
  const double a = scale / h;
  for (int i = 0; i <= n; ++i) {
    if (i > 0) {
      t.emplace_back(idx(i), idx(i), a);
      t.emplace_back(idx(i), idx(i - 1), -a);
    }
    if (i < n) {
      t.emplace_back(idx(i), idx(i), a);
      t.emplace_back(idx(i), idx(i + 1), -a);
    }
  }
}

}  // namespace

Discretization build_interval_mesh(int n) {
  require(n >= 2, "build_interval_mesh: n must be >= 2");

  Discretization d;
  d.dimension = 1;
  d.n = n;
  d.h = 1.0 / n;
  d.bulk_nodes = n + 1;
  d.boundary_index = {0, n};

  d.M_diag = lumped_mass_1d(n, d.h);
  d.M = diagonal_sparse(d.M_diag);

  std::vector<Triplet> kt;
  stiffness_1d_triplets(n, d.h, kt, [](int i) { return i; }, 1.0);
  d.K.resize(d.bulk_nodes, d.bulk_nodes);
  d.K.setFromTriplets(kt.begin(), kt.end());

  // Gamma = {0,1}: boundary integrals are point evaluations, Laplace-Beltrami
  // on two isolated points is the zero operator.
  d.Mb_diag = Eigen::VectorXd::Ones(2);
  d.Mb = diagonal_sparse(d.Mb_diag);
  d.Kb.resize(2, 2);
  d.Kb.setZero();

  d.coords.resize(d.bulk_nodes, 1);
  for (int i = 0; i <= n; ++i) d.coords(i, 0) = i * d.h;

  d.volume = d.M_diag.sum();
  d.perimeter = d.Mb_diag.sum();
  return d;
}

Discretization build_square_mesh(int n) {
  require(n >= 2, "build_square_mesh: n must be >= 2");

  Discretization d;
  d.dimension = 2;
  d.n = n;
  d.h = 1.0 / n;
  const int nn = n + 1;
  d.bulk_nodes = nn * nn;
  auto node = [nn](int i, int j) { return j * nn + i; };

  // Lumped tensor-product mass.
  Eigen::VectorXd m1 = lumped_mass_1d(n, d.h);
  d.M_diag.resize(d.bulk_nodes);
  d.coords.resize(d.bulk_nodes, 2);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      d.M_diag[node(i, j)] = m1[i] * m1[j];
      d.coords(node(i, j), 0) = i * d.h;
      d.coords(node(i, j), 1) = j * d.h;
    }
  }
  d.M = diagonal_sparse(d.M_diag);

  // K = K1 (x) M1 + M1 (x) K1: second differences along each axis weighted by
  // the transverse lumped mass.  K*1 = 0 by construction.
  std::vector<Triplet> kt;
  const double a = 1.0 / d.h;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const int r = node(i, j);
      // x-direction, weight m1[j]
      if (i > 0) {
        kt.emplace_back(r, r, a * m1[j]);
        kt.emplace_back(r, node(i - 1, j), -a * m1[j]);
      }
      if (i < n) {
        kt.emplace_back(r, r, a * m1[j]);
        kt.emplace_back(r, node(i + 1, j), -a * m1[j]);
      }
      // y-direction, weight m1[i]
      if (j > 0) {
        kt.emplace_back(r, r, a * m1[i]);
        kt.emplace_back(r, node(i, j - 1), -a * m1[i]);
      }
      if (j < n) {
        kt.emplace_back(r, r, a * m1[i]);
        kt.emplace_back(r, node(i, j + 1), -a * m1[i]);
      }
    }
  }
  d.K.resize(d.bulk_nodes, d.bulk_nodes);
  d.K.setFromTriplets(kt.begin(), kt.end());

  // Boundary nodes counterclockwise along the perimeter.
  d.boundary_index.reserve(4 * n);
  for (int i = 0; i < n; ++i) d.boundary_index.push_back(node(i, 0));      // bottom
  for (int j = 0; j < n; ++j) d.boundary_index.push_back(node(n, j));      // right
  for (int i = n; i > 0; --i) d.boundary_index.push_back(node(i, n));      // top
  for (int j = n; j > 0; --j) d.boundary_index.push_back(node(0, j));      // left
  const int nb = 4 * n;

  // Lumped arc-length mass and periodic second-difference chain.
  d.Mb_diag = Eigen::VectorXd::Constant(nb, d.h);
  d.Mb = diagonal_sparse(d.Mb_diag);
  std::vector<Triplet> kbt;
  for (int s = 0; s < nb; ++s) {
    const int sp = (s + 1) % nb;
    const int sm = (s + nb - 1) % nb;
    kbt.emplace_back(s, s, 2.0 * a);
    kbt.emplace_back(s, sp, -a);
    kbt.emplace_back(s, sm, -a);
  }
  d.Kb.resize(nb, nb);
  d.Kb.setFromTriplets(kbt.begin(), kbt.end());

  d.volume = d.M_diag.sum();
  d.perimeter = d.Mb_diag.sum();
  return d;
}

}  // namespace chbc
