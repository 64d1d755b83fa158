#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "harmoniq/site_set.hpp"
#include "harmoniq/stencil.hpp"

namespace harmoniq {

// Dynamical matrix at a point of the torus: P(theta) = sum_l D_l e^{-i theta.l}.
// Hermitian by the stencil symmetry.
Eigen::MatrixXcd eval_dynamical_matrix(const Stencil& st,
                                       const Eigen::VectorXd& theta);

struct DispersionSample {
  Eigen::VectorXd theta;        // point on the torus
  Eigen::VectorXd eigenvalues;  // of M^{-1/2} P(theta) M^{-1/2}, ascending
};

struct DispersionScan {
  std::vector<DispersionSample> samples;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

// Uniform grid theta_g = 2 pi g / G per axis, g in [0, G)^d.
DispersionScan dispersion_scan(const Stencil& st, const MassModel& mm,
                               int grid);
int default_scan_grid(int dim);

// Square root of the largest mass-weighted eigenvalue over the scan grid.
// Throws VerificationError when the scan dips below -1e-9 * max (unstable
// stencil, no real phonon spectrum).
double debye_frequency(const Stencil& st, const MassModel& mm, int grid = 0);

// Force-constant matrix over a finite site set, block (j,k) = D_{k-j}
// (offsets wrapped when periodic, aliased contributions summed). Exactly
// symmetric by block placement.
Eigen::SparseMatrix<double> assemble_D(const Stencil& st, const SiteSet& s);

}  // namespace harmoniq
