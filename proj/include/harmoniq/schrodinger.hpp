#pragma once

#include <Eigen/Dense>
#include <complex>

#include "harmoniq/classical.hpp"
#include "harmoniq/q_operator.hpp"

namespace harmoniq {

// Wavefunction encoding of a classical lattice state:
//   psi = (1/sqrt(2E)) [ M^{1/2} v ; i Q u ],
// unit norm because 2E = |M^{1/2} v|^2 + |Q u|^2. Evolving psi under
//   H = -[[0, M^{-1/2} Q^T], [Q M^{-1/2}, 0]]
// reproduces M u'' = -D u exactly (top block stays real, bottom block stays
// imaginary under exact evolution).
struct SchrodingerState {
  Eigen::VectorXcd top;     // |S| * m components
  Eigen::VectorXcd bottom;  // rank * |codomain| * m components
  double energy = 0.0;
  double t = 0.0;

  double norm() const;
  Eigen::VectorXcd concat() const;
  static SchrodingerState split(const Eigen::VectorXcd& full,
                                Eigen::Index top_size, double energy,
                                double t);
};

class HamiltonianOperator {
 public:
  HamiltonianOperator(const QOperator& q, const MassModel& mm);

  Eigen::Index top_size() const { return top_size_; }
  Eigen::Index bottom_size() const { return bottom_size_; }
  Eigen::Index dim() const { return top_size_ + bottom_size_; }

  // psi |-> -[ M^{-1/2} Q^T psi_bot ; Q M^{-1/2} psi_top ]
  Eigen::VectorXcd apply(const Eigen::VectorXcd& psi) const;
  Eigen::MatrixXd dense() const;  // small instances only

  const QOperator& q() const { return *q_; }
  const Eigen::VectorXd& inv_sqrt_mass() const { return inv_sqrt_mass_; }
  const Eigen::VectorXd& sqrt_mass() const { return sqrt_mass_; }

 private:
  const QOperator* q_;
  Eigen::VectorXd sqrt_mass_;      // per top DOF
  Eigen::VectorXd inv_sqrt_mass_;
  Eigen::Index top_size_ = 0;
  Eigen::Index bottom_size_ = 0;
};

// Throws VerificationError on a zero-energy state.
SchrodingerState encode_state(const ClassicalState& cs,
                              const HamiltonianOperator& h);

struct DecodeResult {
  ClassicalState state;
  double recovery_residual = 0.0;  // |Q u - w| / |w| from the sweep
  double imag_leakage = 0.0;       // off-physical component magnitude
};

// strict: throw when the recovery residual exceeds the tolerance (split-step
// evolution pushes the bottom block slightly out of range(Q); callers that
// expect that pass strict = false and surface the residual as a warning).
DecodeResult decode_state(const SchrodingerState& psi,
                          const HamiltonianOperator& h,
                          double recovery_tolerance = 1e-6,
                          bool strict = true);

// Per-atom kinetic energy E * sum_{components of atom} |psi_top|^2,
// length |S| * atoms_per_cell.
Eigen::VectorXd local_kinetic_energy(const SchrodingerState& psi,
                                     const HamiltonianOperator& h,
                                     int atoms_per_cell);

}  // namespace harmoniq
