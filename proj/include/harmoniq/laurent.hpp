#pragma once

#include <Eigen/Dense>
#include <map>

#include "harmoniq/offset.hpp"
#include "harmoniq/stencil.hpp"

namespace harmoniq {

// Matrix-valued Laurent polynomial P(theta) = sum_l C_l e^{-i theta.l} with
// real m x m coefficient blocks satisfying C_{-l} = C_l^T, so P is Hermitian
// on the torus. This is the object the factorization routines consume; a
// stencil is one of these plus masses.
struct LaurentPolynomial {
  int dim = 0;
  int block_size = 0;
  int degree = 0;  // blocks live in [-degree, degree]^d
  std::map<Offset, Eigen::MatrixXd> blocks;

  const Eigen::MatrixXd* block(const Offset& l) const;
  // Zero matrix for absent offsets.
  Eigen::MatrixXd block_or_zero(const Offset& l) const;
  Eigen::MatrixXcd eval(const Eigen::VectorXd& theta) const;

  // Largest Frobenius norm of a coefficient block (initialization scale).
  double max_block_norm() const;

  static LaurentPolynomial from_stencil(const Stencil& st);
};

}  // namespace harmoniq
