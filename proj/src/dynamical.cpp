#include "harmoniq/dynamical.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "harmoniq/errors.hpp"

namespace harmoniq {

Eigen::MatrixXcd eval_dynamical_matrix(const Stencil& st,
                                       const Eigen::VectorXd& theta) {
  if (theta.size() != st.dim)
    throw InvalidInputError("dynamical matrix point has wrong dimension");
  const int m = st.block_size();
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(m, m);
  for (const auto& [l, b] : st.blocks) {
    double phase = 0.0;
    for (int a = 0; a < st.dim; ++a) phase -= theta[a] * l[a];
    p += std::polar(1.0, phase) * b;
  }
  return p;
}

int default_scan_grid(int dim) { return dim >= 3 ? 16 : 64; }

DispersionScan dispersion_scan(const Stencil& st, const MassModel& mm,
                               int grid) {
  if (grid < 1) throw InvalidInputError("dispersion grid must be >= 1");
  if (mm.block_size() != st.block_size())
    throw InvalidInputError("mass model does not match the stencil block size");

  const int m = st.block_size();
  const Eigen::VectorXd inv_sqrt =
      mm.cell_diagonal().array().sqrt().inverse().matrix();

  DispersionScan scan;
  scan.min_eigenvalue = std::numeric_limits<double>::infinity();
  scan.max_eigenvalue = -std::numeric_limits<double>::infinity();

  std::vector<int> g(st.dim, 0);
  const double step = 2.0 * M_PI / grid;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
  while (true) {
    Eigen::VectorXd theta(st.dim);
    for (int a = 0; a < st.dim; ++a) theta[a] = step * g[a];
    Eigen::MatrixXcd p = eval_dynamical_matrix(st, theta);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) p(i, j) *= inv_sqrt[i] * inv_sqrt[j];
    solver.compute(p, Eigen::EigenvaluesOnly);
    DispersionSample sample;
    sample.theta = theta;
    sample.eigenvalues = solver.eigenvalues();
    scan.min_eigenvalue = std::min(scan.min_eigenvalue, sample.eigenvalues.minCoeff());
    scan.max_eigenvalue = std::max(scan.max_eigenvalue, sample.eigenvalues.maxCoeff());
    scan.samples.push_back(std::move(sample));

    int a = st.dim - 1;
    for (; a >= 0; --a) {
      if (++g[a] < grid) break;
      g[a] = 0;
    }
    if (a < 0) break;
  }
  return scan;
}

double debye_frequency(const Stencil& st, const MassModel& mm, int grid) {
  if (grid <= 0) grid = default_scan_grid(st.dim);
  const DispersionScan scan = dispersion_scan(st, mm, grid);
  if (scan.min_eigenvalue < -1e-9 * std::max(scan.max_eigenvalue, 0.0))
    throw VerificationError(
        "stencil is dynamically unstable: mass-weighted spectrum reaches " +
        std::to_string(scan.min_eigenvalue) +
        " (squared frequencies must be nonnegative)");
  return std::sqrt(std::max(scan.max_eigenvalue, 0.0));
}

Eigen::SparseMatrix<double> assemble_D(const Stencil& st, const SiteSet& s) {
  if (s.dim != st.dim)
    throw InvalidInputError("site set dimension does not match the stencil");
  if (s.boundary == Boundary::Periodic)
    for (int a = 0; a < s.dim; ++a)
      if (s.extents[a] < 1)
        throw InvalidInputError("periodic extents must be positive");

  const int m = st.block_size();
  const Eigen::Index n = static_cast<Eigen::Index>(s.size()) * m;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(s.size() * st.blocks.size() * m * m);

  for (std::size_t j = 0; j < s.size(); ++j) {
    for (const auto& [l, b] : st.blocks) {
      Offset k = add(s.sites[j], l);
      if (s.boundary == Boundary::Periodic) k = s.wrap(k);
      const int kj = s.index_of(k);
      if (kj < 0) continue;
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
          const double v = b(r, c);
          if (v != 0.0)
            trips.emplace_back(static_cast<int>(j) * m + r, kj * m + c, v);
        }
    }
  }
  Eigen::SparseMatrix<double> d(n, n);
  d.setFromTriplets(trips.begin(), trips.end());
  return d;
}

}  // namespace harmoniq
