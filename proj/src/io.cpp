#include "chbc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace chbc {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  return in;
}

}  // namespace

void write_series_csv(const std::string& path, const Discretization& d,
                      const PotentialPair& pots, const StateTrajectory& traj,
                      const TimeGrid& grid) {
  std::ofstream out = open_out(path);
  out << "t,mean,energy,max_abs_y\n";
  for (std::size_t k = 0; k < traj.y.size(); ++k) {
    out << g17(grid.time(static_cast<int>(k))) << ',' << g17(d.mean_value(traj.y[k])) << ','
        << g17(free_energy(d, pots, traj.y[k], traj.y_gamma[k])) << ','
        << g17(traj.y[k].cwiseAbs().maxCoeff()) << '\n';
  }
}

void write_snapshot_csv(const std::string& path, const Discretization& d, const Field& a,
                        const Field& b, const std::string& label_a,
                        const std::string& label_b) {
  require(a.size() == d.bulk_nodes, "write_snapshot_csv: field size mismatch");
  std::ofstream out = open_out(path);
  out << (d.dimension == 1 ? "x" : "x,y") << ',' << label_a << ',' << label_b << '\n';
  for (int i = 0; i < d.bulk_nodes; ++i) {
    out << g17(d.coords(i, 0));
    if (d.dimension == 2) out << ',' << g17(d.coords(i, 1));
    out << ',' << g17(a[i]) << ',' << g17(b.size() ? b[i] : 0.0) << '\n';
  }
}

void write_control_csv(const std::string& path, const Discretization& d, const TimeGrid& grid,
                       const Eigen::MatrixXd& values) {
  std::ofstream out = open_out(path);
  out << "boundary_node,time,value\n";
  for (int b = 0; b < values.rows(); ++b)
    for (int k = 0; k < values.cols(); ++k)
      out << b << ',' << g17(grid.time(k)) << ',' << g17(values(b, k)) << '\n';
}

Eigen::MatrixXd read_control_csv(const std::string& path, const Discretization& d,
                                 const TimeGrid& grid) {
  std::ifstream in = open_in(path);
  Eigen::MatrixXd values =
      Eigen::MatrixXd::Constant(d.boundary_nodes(), grid.steps + 1,
                                std::numeric_limits<double>::quiet_NaN());
  std::string line;
  std::getline(in, line);  // header
  int filled = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::getline(ls, tok, ',');
    const int b = std::stoi(tok);
    std::getline(ls, tok, ',');
    const double t = std::stod(tok);
    std::getline(ls, tok, ',');
    const double v = std::stod(tok);
    const int k = static_cast<int>(std::lround(t / grid.tau()));
    require(b >= 0 && b < values.rows() && k >= 0 && k <= grid.steps,
            "read_control_csv: entry outside the control grid in " + path);
    values(b, k) = v;
    ++filled;
  }
  require(filled == values.size() && values.allFinite(),
          "read_control_csv: file does not cover every (node, time) entry: " + path);
  return values;
}

Eigen::VectorXd read_field_csv(const std::string& path, int expected_size) {
  std::ifstream in = open_in(path);
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    vals.push_back(std::stod(line));
  }
  require(static_cast<int>(vals.size()) == expected_size,
          "read_field_csv: expected " + std::to_string(expected_size) + " values in " + path);
  return Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
}

void write_iterations_csv(const std::string& path, const std::vector<IterationRecord>& recs) {
  std::ofstream out = open_out(path);
  out << "iter,cost,grad_norm,step,vi_residual,active_box_fraction\n";
  for (const auto& r : recs) {
    out << r.iter << ',' << g17(r.cost) << ',' << g17(r.grad_norm) << ',' << g17(r.step) << ','
        << g17(r.vi_residual) << ',' << g17(r.active_box_fraction) << '\n';
  }
}

void write_vtk_structured(const std::string& path, const Discretization& d,
                          const std::vector<std::pair<std::string, Field>>& fields) {
  require(d.dimension == 2, "write_vtk_structured: only 2D fields are written as VTK");
  std::ofstream out = open_out(path);
  const int nn = d.n + 1;
  out << "# vtk DataFile Version 3.0\n"
      << "chbc field snapshot\n"
      << "ASCII\n"
      << "DATASET STRUCTURED_POINTS\n"
      << "DIMENSIONS " << nn << ' ' << nn << " 1\n"
      << "ORIGIN 0 0 0\n"
      << "SPACING " << g17(d.h) << ' ' << g17(d.h) << " 1\n"
      << "POINT_DATA " << d.bulk_nodes << '\n';
  for (const auto& [name, f] : fields) {
    require(f.size() == d.bulk_nodes, "write_vtk_structured: field size mismatch");
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < d.bulk_nodes; ++i) out << g17(f[i]) << '\n';
  }
}

void write_coo(const std::string& path, const SpMat& m) {
  std::ofstream out = open_out(path);
  out << "row,col,value\n";
  for (int col = 0; col < m.outerSize(); ++col)
    for (SpMat::InnerIterator it(m, col); it; ++it)
      out << it.row() << ',' << it.col() << ',' << g17(it.value()) << '\n';
}

}  // namespace chbc
