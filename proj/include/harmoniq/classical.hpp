#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "harmoniq/stencil.hpp"

namespace harmoniq {

// Displacements and velocities over a site set, component order matching the
// site set's lexicographic DOF layout.
struct ClassicalState {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  double t = 0.0;
};

struct VerletConfig {
  double dt = 0.0;
  long steps = 0;
  long snapshot_stride = 1;  // a snapshot every this many steps (plus t=0)
  // Optional stability hint; dt > 2/debye gets a stderr warning.
  double debye_frequency = 0.0;
};

struct ClassicalTrajectory {
  std::vector<ClassicalState> snapshots;
};

double total_energy(const ClassicalState& s,
                    const Eigen::SparseMatrix<double>& d,
                    const Eigen::VectorXd& dof_masses);

// Velocity Verlet (kick-drift-kick) for M u'' = -D u. Aborts with
// VerificationError when the energy grows past 10x its initial value.
ClassicalTrajectory verlet_evolve(const ClassicalState& initial,
                                  const Eigen::SparseMatrix<double>& d,
                                  const Eigen::VectorXd& dof_masses,
                                  const VerletConfig& cfg);

}  // namespace harmoniq
