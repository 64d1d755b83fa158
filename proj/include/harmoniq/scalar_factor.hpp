#pragma once

#include "harmoniq/factorization.hpp"
#include "harmoniq/laurent.hpp"

namespace harmoniq {

// Univariate scalar (d = 1, m = 1) spectral factorization by root splitting:
// the roots of z^p P(z) come in pairs {rho, 1/conj(rho)}; keeping one root
// per pair (the one inside the closed unit disk) and rescaling yields a real
// degree-p polynomial q with |q(e^{i theta})|^2 = P(theta).
//
// Unit-circle roots must occur with even multiplicity (P >= 0); each pair is
// collapsed onto the circle and assigned once. Throws VerificationError when
// P dips below -negativity_tol * max P on a dense grid, ConvergenceError when
// the root pairing cannot be completed.
Factorization factorize_scalar_1d(const LaurentPolynomial& p,
                                  double pairing_tol = 1e-6,
                                  double negativity_tol = 1e-9);

}  // namespace harmoniq
