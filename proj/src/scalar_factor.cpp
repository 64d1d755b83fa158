#include "harmoniq/scalar_factor.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "harmoniq/errors.hpp"

namespace harmoniq {

namespace {

using Complex = std::complex<double>;

// EISPACK-style Parlett-Reinsch balancing (radix 2), which makes the
// companion eigenvalues far less sensitive to coefficient scale.
void balance_matrix(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double col = a.col(i).lpNorm<1>() - std::abs(a(i, i));
      double row = a.row(i).lpNorm<1>() - std::abs(a(i, i));
      if (col == 0.0 || row == 0.0) continue;
      const double s = col + row;
      double f = 1.0;
      double g = row / 2.0;
      while (col < g) {
        f *= 2.0;
        col *= 4.0;
      }
      g = row * 2.0;
      while (col > g) {
        f /= 2.0;
        col /= 4.0;
      }
      if ((col + row) / f < 0.95 * s) {
        converged = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

// Roots of c[0] + c[1] z + ... + c[n] z^n with c[n] != 0.
std::vector<Complex> polynomial_roots(const Eigen::VectorXd& c) {
  const Eigen::Index n = c.size() - 1;
  if (n < 1) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) companion(i, n - 1) = -c[i] / c[n];
  companion.block(1, 0, n - 1, n - 1).diagonal().setOnes();
  balance_matrix(companion);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("companion eigensolver failed on the root problem");
  std::vector<Complex> roots(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
  return roots;
}

Factorization scalar_factorization(const std::vector<double>& q, int dim) {
  Factorization f;
  f.dim = dim;
  f.block_size = 1;
  f.rank = 1;
  f.degree = static_cast<int>(q.size()) - 1;
  std::map<Offset, Eigen::MatrixXd> blocks;
  for (std::size_t j = 0; j < q.size(); ++j) {
    Eigen::MatrixXd b(1, 1);
    b(0, 0) = q[j];
    blocks.emplace(Offset{static_cast<int>(j)}, b);
  }
  f.factors.push_back(std::move(blocks));
  f.method = "scalar-roots";
  return f;
}

}  // namespace

Factorization factorize_scalar_1d(const LaurentPolynomial& p,
                                  double pairing_tol, double negativity_tol) {
  if (p.dim != 1 || p.block_size != 1)
    throw InvalidInputError(
        "root splitting applies to univariate scalar polynomials only");

  // Effective degree: trim zero leading coefficients.
  int deg = 0;
  double scale = 0.0;
  for (const auto& [l, b] : p.blocks) {
    scale = std::max(scale, std::abs(b(0, 0)));
    if (b(0, 0) != 0.0) deg = std::max(deg, std::abs(l[0]));
  }
  if (scale == 0.0) {
    Factorization f = scalar_factorization({0.0}, p.dim);
    certify(f, p, 8);
    return f;
  }

  // Nonnegativity gate on a dense grid.
  {
    const int grid = std::max(512, 16 * deg + 1);
    double mx = 0.0, mn = 0.0;
    for (int g = 0; g < grid; ++g) {
      Eigen::VectorXd theta(1);
      theta[0] = 2.0 * M_PI * g / grid;
      const double val = p.eval(theta)(0, 0).real();
      mx = std::max(mx, val);
      mn = std::min(mn, val);
    }
    if (mn < -negativity_tol * std::max(mx, scale))
      throw VerificationError(
          "polynomial is negative on the unit circle (min " +
          std::to_string(mn) + "); no spectral factor exists");
  }

  if (deg == 0) {
    const double c0 = std::max(p.block_or_zero(Offset{0})(0, 0), 0.0);
    Factorization f = scalar_factorization({std::sqrt(c0)}, p.dim);
    certify(f, p, 8);
    return f;
  }

  // Roots of z^deg P(z), even-length coefficient vector c_{-deg}..c_{deg}.
  Eigen::VectorXd a(2 * deg + 1);
  for (int k = -deg; k <= deg; ++k) a[k + deg] = p.block_or_zero(Offset{k})(0, 0);
  std::vector<Complex> roots = polynomial_roots(a);

  // Split by modulus; unit-circle roots of a nonnegative symbol come in
  // coincident pairs (even multiplicity).
  const double band = 1e-7;
  std::vector<Complex> inside, outside, circle;
  for (const Complex& r : roots) {
    const double mod = std::abs(r);
    if (mod < 1.0 - band)
      inside.push_back(r);
    else if (mod > 1.0 + band)
      outside.push_back(r);
    else
      circle.push_back(r);
  }

  std::vector<Complex> selected;
  selected.reserve(static_cast<std::size_t>(deg));

  if (circle.size() % 2 != 0)
    throw ConvergenceError(
        "odd number of unit-circle roots; the symbol is not an even-"
        "multiplicity boundary case the splitter can handle");
  std::vector<bool> used(circle.size(), false);
  for (std::size_t i = 0; i < circle.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    double best = std::numeric_limits<double>::infinity();
    std::size_t match = circle.size();
    for (std::size_t j = i + 1; j < circle.size(); ++j) {
      if (used[j]) continue;
      const double dist = std::abs(circle[i] - circle[j]);
      if (dist < best) {
        best = dist;
        match = j;
      }
    }
    if (match == circle.size() || best > 1e-4)
      throw ConvergenceError(
          "unit-circle root without a coincident partner (numerically "
          "defective multiplicity)");
    used[match] = true;
    Complex mean = 0.5 * (circle[i] + circle[match]);
    if (std::abs(mean) == 0.0)
      throw ConvergenceError("degenerate unit-circle root cluster at zero");
    selected.push_back(mean / std::abs(mean));
  }

  if (inside.size() != outside.size())
    throw ConvergenceError(
        "root count imbalance across the unit circle (" +
        std::to_string(inside.size()) + " inside vs " +
        std::to_string(outside.size()) + " outside); pairing failed");
  std::vector<bool> taken(inside.size(), false);
  for (const Complex& sigma : outside) {
    const Complex partner = 1.0 / std::conj(sigma);
    double best = std::numeric_limits<double>::infinity();
    std::size_t match = inside.size();
    for (std::size_t j = 0; j < inside.size(); ++j) {
      if (taken[j]) continue;
      const double dist = std::abs(inside[j] - partner);
      if (dist < best) {
        best = dist;
        match = j;
      }
    }
    if (match == inside.size())
      throw ConvergenceError("outside root without an inside partner");
    const Complex rho = inside[match];
    if (std::abs(rho * std::conj(sigma) - 1.0) >
        pairing_tol * (1.0 + std::norm(rho)))
      throw ConvergenceError(
          "root pairing tolerance violated; roots are numerically defective");
    taken[match] = true;
    // Both rho and 1/conj(sigma) estimate the same true root; average them.
    selected.push_back(0.5 * (rho + partner));
  }

  if (selected.size() != static_cast<std::size_t>(deg))
    throw ConvergenceError("selected " + std::to_string(selected.size()) +
                           " roots for a degree-" + std::to_string(deg) +
                           " factor; root classification failed");

  // Monic expansion of prod (z - r_i), descending powers during the build.
  std::vector<Complex> b(static_cast<std::size_t>(deg) + 1, Complex(0.0));
  b[0] = 1.0;
  std::size_t nroots = 0;
  for (const Complex& r : selected) {
    ++nroots;
    for (std::size_t k = nroots; k >= 1; --k) b[k] -= r * b[k - 1];
  }
  std::reverse(b.begin(), b.end());  // now b[j] multiplies z^j, b[deg] = 1

  const Complex gamma_sq = Complex(a[2 * deg]) / b[0];
  if (std::abs(gamma_sq.imag()) > 1e-8 * std::abs(gamma_sq) ||
      gamma_sq.real() <= 0.0)
    throw ConvergenceError("leading-coefficient matching produced a "
                           "non-positive scale; factorization failed");
  const double gamma = std::sqrt(gamma_sq.real());

  std::vector<double> q(static_cast<std::size_t>(deg) + 1);
  double max_abs = 0.0, max_imag = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const Complex qj = gamma * b[j];
    q[j] = qj.real();
    max_abs = std::max(max_abs, std::abs(qj));
    max_imag = std::max(max_imag, std::abs(qj.imag()));
  }
  // Residual imaginary parts come from conjugate-closure round-off only.
  if (max_imag > 1e-10 * std::max(max_abs, 1.0))
    throw ConvergenceError(
        "factor coefficients kept an imaginary residue of " +
        std::to_string(max_imag) + "; root selection lost conjugate closure");

  Factorization f = scalar_factorization(q, p.dim);
  certify(f, p, std::max(256, 2 * deg + 2));

  // Simple and double circle roots reconstruct to ~1e-8 relative or better;
  // anything worse means the root constellation was numerically defective
  // (e.g. a higher-multiplicity circle zero) and the factor cannot be trusted.
  if (f.residual_coeff > 1e-6 * std::max(scale, 1.0))
    throw ConvergenceError(
        "reconstructed factor misses the coefficients by " +
        std::to_string(f.residual_coeff) +
        "; the symbol's circle zeros are too degenerate for root splitting");
  return f;
}

}  // namespace harmoniq
