#pragma once

#include "harmoniq/factorization.hpp"
#include "harmoniq/laurent.hpp"

namespace harmoniq {

struct BauerOptions {
  // Number of block rows of the banded block-Toeplitz section. 0 picks
  // max(20 * degree, 64). Doubled up to max_doublings times while the
  // extracted band keeps improving.
  int toeplitz_rows = 0;
  int max_doublings = 3;
  double residual_tolerance = 1e-6;
  // Diagonal shift applied when the Cholesky factorization breaks down on a
  // semidefinite input, removed again by Richardson extrapolation in the
  // shift (re-solve at shift/10).
  double shift_scale = 1e-10;
  // Acoustic symbols (zeros on the unit circle) make the band converge only
  // polynomially in the section size; route those to the sum-of-squares
  // solver instead of burning cycles.
  bool allow_sos_fallback = true;
};

// Univariate matrix spectral factorization via Cholesky of a banded
// block-Toeplitz section (Bauer's method): the band of the last block row
// converges to (Q_q, ..., Q_0) geometrically when P is strictly positive on
// the circle. Returns rank 1, degree = p. Throws ConvergenceError when the
// band does not certify and the fallback is disabled or fails too.
Factorization factorize_bauer_1d(const LaurentPolynomial& p,
                                 const BauerOptions& opts = {});

}  // namespace harmoniq
