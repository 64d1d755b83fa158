#pragma once

#include <cstdint>
#include <vector>

#include "harmoniq/factorization.hpp"
#include "harmoniq/laurent.hpp"

namespace harmoniq {

struct SosOptions {
  int max_iterations = 400;
  double gradient_tolerance = 1e-13;
  double residual_tolerance = 1e-9;
  std::uint64_t random_seed = 1;
  // 0 -> sqrt(max_l |C_l|_F / (rank * (degree+1)^d * m)), so the initial
  // Gram magnitude matches the data magnitude.
  double init_scale = 0.0;
  // Levenberg-Marquardt damping schedule.
  double lambda0 = 1e-3;
  double lambda_growth = 10.0;
  double lambda_shrink = 0.1;
  // Fresh seeded restarts attempted while the residual tolerance is missed.
  int max_restarts = 5;
};

enum class SosStatus { Converged, Stalled, MaxIterations };

struct SosResult {
  Factorization factorization;          // best iterate over all restarts
  std::vector<double> residual_history; // coefficient residual per iteration
  SosStatus status = SosStatus::MaxIterations;
  int iterations = 0;                   // of the winning restart
  int restarts_used = 0;
  std::uint64_t seed_used = 0;          // seed of the winning restart
};

// Multivariate sum-of-squares factorization: Levenberg-Marquardt with an
// analytic Jacobian on the coefficient equations
//   C_l = sum_s sum_j (Q^(s)_{j+l})^T Q^(s)_j,  |l|_inf <= degree.
// Deterministic for a given seed; restarts use seed, seed+1, ...
SosResult factorize_sos(const LaurentPolynomial& p, int rank, int degree,
                        const SosOptions& opts = {});

// Residual vector and its analytic Jacobian at a given block configuration
// (exposed for the finite-difference cross-check in the tests).
void sos_residual_jacobian(const LaurentPolynomial& p, int rank, int degree,
                           const Eigen::VectorXd& x, Eigen::VectorXd& resid,
                           Eigen::MatrixXd* jac);

}  // namespace harmoniq
