#include "harmoniq/classical.hpp"

#include <iostream>

#include "harmoniq/errors.hpp"

namespace harmoniq {

double total_energy(const ClassicalState& s,
                    const Eigen::SparseMatrix<double>& d,
                    const Eigen::VectorXd& dof_masses) {
  const double kinetic = 0.5 * s.v.dot(dof_masses.cwiseProduct(s.v));
  const double potential = 0.5 * s.u.dot(d * s.u);
  return kinetic + potential;
}

ClassicalTrajectory verlet_evolve(const ClassicalState& initial,
                                  const Eigen::SparseMatrix<double>& d,
                                  const Eigen::VectorXd& dof_masses,
                                  const VerletConfig& cfg) {
  if (cfg.dt <= 0.0) throw InvalidInputError("verlet needs dt > 0");
  if (cfg.steps < 0) throw InvalidInputError("verlet needs steps >= 0");
  if (cfg.snapshot_stride < 1)
    throw InvalidInputError("snapshot stride must be >= 1");
  if (initial.u.size() != d.rows() || initial.v.size() != d.rows() ||
      dof_masses.size() != d.rows())
    throw InvalidInputError("state, masses and dynamical matrix disagree");
  if (cfg.debye_frequency > 0.0 && cfg.dt > 2.0 / cfg.debye_frequency)
    std::cerr << "warning: dt " << cfg.dt
              << " exceeds the verlet stability limit 2/debye = "
              << 2.0 / cfg.debye_frequency << "\n";

  const Eigen::VectorXd inv_mass = dof_masses.cwiseInverse();
  ClassicalState s = initial;
  const double e0 = total_energy(s, d, dof_masses);

  ClassicalTrajectory traj;
  traj.snapshots.push_back(s);
  Eigen::VectorXd accel = -(inv_mass.cwiseProduct(d * s.u));
  for (long step = 0; step < cfg.steps; ++step) {
    s.v += 0.5 * cfg.dt * accel;
    s.u += cfg.dt * s.v;
    accel = -(inv_mass.cwiseProduct(d * s.u));
    s.v += 0.5 * cfg.dt * accel;
    s.t = initial.t + (step + 1) * cfg.dt;

    const double e = total_energy(s, d, dof_masses);
    if (e0 > 0.0 && e > 10.0 * e0)
      throw VerificationError("verlet energy blew up at t = " +
                              std::to_string(s.t) +
                              "; the step size is unstable for this lattice");
    if ((step + 1) % cfg.snapshot_stride == 0 || step + 1 == cfg.steps)
      traj.snapshots.push_back(s);
  }
  return traj;
}

}  // namespace harmoniq
