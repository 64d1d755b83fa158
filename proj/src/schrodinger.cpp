#include "harmoniq/schrodinger.hpp"

#include <cmath>

#include "harmoniq/errors.hpp"

namespace harmoniq {

double SchrodingerState::norm() const {
  return std::sqrt(top.squaredNorm() + bottom.squaredNorm());
}

Eigen::VectorXcd SchrodingerState::concat() const {
  Eigen::VectorXcd full(top.size() + bottom.size());
  full.head(top.size()) = top;
  full.tail(bottom.size()) = bottom;
  return full;
}

SchrodingerState SchrodingerState::split(const Eigen::VectorXcd& full,
                                         Eigen::Index top_size, double energy,
                                         double t) {
  if (top_size < 0 || top_size > full.size())
    throw InvalidInputError("top block size out of range");
  SchrodingerState s;
  s.top = full.head(top_size);
  s.bottom = full.tail(full.size() - top_size);
  s.energy = energy;
  s.t = t;
  return s;
}

HamiltonianOperator::HamiltonianOperator(const QOperator& q,
                                         const MassModel& mm)
    : q_(&q) {
  if (mm.block_size() != q.factorization().block_size)
    throw InvalidInputError("mass model block size does not match the factor");
  const Eigen::VectorXd masses =
      mm.dof_masses(static_cast<int>(q.domain().size()));
  sqrt_mass_ = masses.cwiseSqrt();
  inv_sqrt_mass_ = sqrt_mass_.cwiseInverse();
  top_size_ = q.cols();
  bottom_size_ = q.rows();
}

Eigen::VectorXcd HamiltonianOperator::apply(const Eigen::VectorXcd& psi) const {
  if (psi.size() != dim())
    throw InvalidInputError("wavefunction has the wrong length");
  const Eigen::VectorXcd top = psi.head(top_size_);
  const Eigen::VectorXcd bottom = psi.tail(bottom_size_);
  const Eigen::VectorXcd qtb = q_->apply_transpose(bottom);
  Eigen::VectorXcd out(dim());
  out.head(top_size_) =
      -(qtb.array() * inv_sqrt_mass_.array().cast<std::complex<double>>());
  out.tail(bottom_size_) = -q_->apply(Eigen::VectorXcd(
      top.array() * inv_sqrt_mass_.array().cast<std::complex<double>>()));
  return out;
}

Eigen::MatrixXd HamiltonianOperator::dense() const {
  const Eigen::MatrixXd b =
      Eigen::MatrixXd(q_->to_sparse()) * inv_sqrt_mass_.asDiagonal();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim(), dim());
  h.topRightCorner(top_size_, bottom_size_) = -b.transpose();
  h.bottomLeftCorner(bottom_size_, top_size_) = -b;
  return h;
}

SchrodingerState encode_state(const ClassicalState& cs,
                              const HamiltonianOperator& h) {
  if (cs.u.size() != h.top_size() || cs.v.size() != h.top_size())
    throw InvalidInputError("classical state does not match the lattice");
  const Eigen::VectorXd w = h.q().apply(cs.u);
  const Eigen::VectorXd mv = h.sqrt_mass().cwiseProduct(cs.v);
  const double energy = 0.5 * (mv.squaredNorm() + w.squaredNorm());
  if (energy <= 0.0)
    throw VerificationError("zero-energy state has no unit wavefunction");
  const double scale = 1.0 / std::sqrt(2.0 * energy);

  SchrodingerState psi;
  psi.top = (scale * mv).cast<std::complex<double>>();
  psi.bottom = std::complex<double>(0, 1) *
               (scale * w).cast<std::complex<double>>();
  psi.energy = energy;
  psi.t = cs.t;
  return psi;
}

DecodeResult decode_state(const SchrodingerState& psi,
                          const HamiltonianOperator& h,
                          double recovery_tolerance, bool strict) {
  if (psi.top.size() != h.top_size() || psi.bottom.size() != h.bottom_size())
    throw InvalidInputError("wavefunction does not match the lattice");
  if (psi.energy <= 0.0)
    throw InvalidInputError("decoding needs the positive encoded energy");
  const double scale = std::sqrt(2.0 * psi.energy);

  DecodeResult out;
  out.state.v = scale * h.inv_sqrt_mass().cwiseProduct(psi.top.real());
  const Eigen::VectorXd w = scale * psi.bottom.imag();
  RecoveryResult rec =
      recover_displacement(h.q(), w, recovery_tolerance, strict);
  out.state.u = std::move(rec.u);
  out.state.t = psi.t;
  out.recovery_residual = rec.range_residual;
  out.imag_leakage = std::sqrt(psi.top.imag().squaredNorm() +
                               psi.bottom.real().squaredNorm());
  return out;
}

Eigen::VectorXd local_kinetic_energy(const SchrodingerState& psi,
                                     const HamiltonianOperator& h,
                                     int atoms_per_cell) {
  if (atoms_per_cell < 1)
    throw InvalidInputError("atoms per cell must be >= 1");
  const int m = h.q().factorization().block_size;
  if (m % atoms_per_cell != 0)
    throw InvalidInputError("block size is not a multiple of atoms per cell");
  const int dim = m / atoms_per_cell;
  const Eigen::Index n_sites = h.top_size() / m;

  Eigen::VectorXd ke(n_sites * atoms_per_cell);
  for (Eigen::Index site = 0; site < n_sites; ++site)
    for (int a = 0; a < atoms_per_cell; ++a) {
      double acc = 0.0;
      for (int c = 0; c < dim; ++c)
        acc += std::norm(psi.top[site * m + a * dim + c]);
      ke[site * atoms_per_cell + a] = psi.energy * acc;
    }
  return ke;
}

}  // namespace harmoniq
