#pragma once

#include <string>
#include <vector>

#include "chbc/control.hpp"
#include "chbc/state.hpp"

namespace chbc {

/// Shortest round-trippable decimal form (17 significant digits).
std::string g17(double v);

/// Time series of scalar diagnostics: t, mean, energy, max|y|.
void write_series_csv(const std::string& path, const Discretization& d,
                      const PotentialPair& pots, const StateTrajectory& traj,
                      const TimeGrid& grid);

/// One row per bulk node: coordinates plus two nodal fields.  Pass an empty
/// second field (size 0) when it is not defined at the chosen time (the
/// chemical potential at t = 0).  The labels default to the state fields;
/// adjoint or linearized snapshots reuse the same writer with their own.
void write_snapshot_csv(const std::string& path, const Discretization& d, const Field& a,
                        const Field& b, const std::string& label_a = "y",
                        const std::string& label_b = "w");

/// Boundary control as (boundary_node, time, value) rows.
void write_control_csv(const std::string& path, const Discretization& d, const TimeGrid& grid,
                       const Eigen::MatrixXd& values);

Eigen::MatrixXd read_control_csv(const std::string& path, const Discretization& d,
                                 const TimeGrid& grid);

/// Nodal values, one per line.
Eigen::VectorXd read_field_csv(const std::string& path, int expected_size);

void write_iterations_csv(const std::string& path, const std::vector<IterationRecord>& recs);

/// Legacy ASCII VTK structured grid of 2D nodal fields (node order is
/// x-fastest, matching the mesh numbering).
void write_vtk_structured(const std::string& path, const Discretization& d,
                          const std::vector<std::pair<std::string, Field>>& fields);

/// Sparse operator in coordinate text format: row,col,value per line.
void write_coo(const std::string& path, const SpMat& m);

}  // namespace chbc
