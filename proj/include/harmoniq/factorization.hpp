#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "harmoniq/laurent.hpp"
#include "harmoniq/offset.hpp"
#include "harmoniq/stencil.hpp"

namespace harmoniq {

// Spectral factor bundle: blocks Q^(s)_j, s = 0..rank-1, j in [0, degree]^d,
// aiming at  sum_s Qhat_s(theta)^* Qhat_s(theta) = P(theta)  with
// Qhat_s(theta) = sum_j Q^(s)_j e^{+i theta.j}. Equivalently, coefficient
// equations  C_l = sum_s sum_j (Q^(s)_{j+l})^T Q^(s)_j.
//
// The factor is unique only up to an orthogonal mixing of the stacked rows
// (and, for scalars, reversal of the coefficient sequence); comparisons of
// two factorizations therefore go through the Gram values on the torus, not
// the raw blocks.
struct Factorization {
  int dim = 0;
  int block_size = 0;
  int rank = 1;    // number of summands r
  int degree = 0;  // one-sided degree q
  std::vector<std::map<Offset, Eigen::MatrixXd>> factors;  // [rank] maps

  double residual_coeff = -1.0;  // last certified coefficient residual
  double residual_torus = -1.0;  // last certified torus residual
  bool recovery_capable = false; // stacked zero-offset block has full column rank

  std::string method;       // "scalar-roots" | "bauer" | "sos" | "exact"
  bool converged = true;
  int iterations = 0;
  std::uint64_t seed = 0;

  Eigen::MatrixXd block_or_zero(int s, const Offset& j) const;
  Eigen::MatrixXcd eval_factor(int s, const Eigen::VectorXd& theta) const;
  // sum_s Qhat_s(theta)^* Qhat_s(theta)
  Eigen::MatrixXcd gram(const Eigen::VectorXd& theta) const;
  // Stacked (rank*m) x m zero-offset block.
  Eigen::MatrixXd stacked_zero_block() const;
  double norm_sq_sum() const;  // sum_{s,j} |Q^(s)_j|_F^2
};

// sqrt( sum_{|l|_inf <= degree} |C_l - sum_s sum_j Q_{j+l}^T Q_j|_F^2 ).
double residual_coefficients(const LaurentPolynomial& p,
                             const Factorization& f);

// max over the grid of |P(theta) - Gram(theta)|_F. Requires grid > 2*degree
// so the coefficient aliasing cannot hide a mismatch.
double residual_torus(const LaurentPolynomial& p, const Factorization& f,
                      int grid);

// The Laurent polynomial the factor actually represents (exact coefficient
// sums). Round-trips with residual_coefficients == 0 by construction.
LaurentPolynomial synthesize(const Factorization& f);

struct ParsevalReport {
  double coeff_norm_sq_sum = 0.0;  // sum |Q_j|_F^2
  double bound = 0.0;              // m * max_theta |P(theta)|_F
  bool ok = false;
  // Reported, not asserted: mass-weighted spectral-norm sum vs the coarse
  // per-mode budget debye * atoms_per_cell * dim.
  double alpha_sum = 0.0;
  double alpha_budget = 0.0;
};

ParsevalReport parseval_bound_check(const LaurentPolynomial& p,
                                    const Factorization& f,
                                    const MassModel& mm, int grid);

// Fills residual_coeff / residual_torus / recovery_capable in place.
void certify(Factorization& f, const LaurentPolynomial& p, int grid);

Factorization load_factorization(const std::string& json_text);
Factorization load_factorization_file(const std::string& path);
std::string factorization_to_json(const Factorization& f);

// Closed-form factors for the shipped stencil presets (same names).
bool has_factorization_preset(const std::string& name);
Factorization factorization_preset(const std::string& name);

}  // namespace harmoniq
