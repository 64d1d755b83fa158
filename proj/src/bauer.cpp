#include "harmoniq/bauer.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "harmoniq/errors.hpp"
#include "harmoniq/sos.hpp"

namespace harmoniq {

namespace {

// Lower-triangular band of the Cholesky factor of the n-block section of the
// block-Toeplitz matrix with symbol P (+ shift on the diagonal). Returns the
// last block row's band (B_0 diagonal block, B_j at offset j below the
// diagonal) or nothing on breakdown.
std::optional<std::vector<Eigen::MatrixXd>> cholesky_band(
    const LaurentPolynomial& p, int q, int n, double shift) {
  const int m = p.block_size;
  // rows[i][j] = L_{i, i-j}
  std::vector<std::vector<Eigen::MatrixXd>> rows(
      static_cast<std::size_t>(n),
      std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(q) + 1));

  for (int i = 0; i < n; ++i) {
    for (int k = std::max(0, i - q); k <= i; ++k) {
      Eigen::MatrixXd b = p.block_or_zero(Offset{i - k}).transpose();
      if (k == i && shift != 0.0)
        b += shift * Eigen::MatrixXd::Identity(m, m);
      for (int l = std::max(0, i - q); l < k; ++l)
        b -= rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(i - l)] *
             rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(k - l)]
                 .transpose();
      if (k < i) {
        const Eigen::MatrixXd& diag =
            rows[static_cast<std::size_t>(k)][0];  // L_{k,k}, lower triangular
        // L_{i,k} = b * L_{k,k}^{-T}
        rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(i - k)] =
            diag.triangularView<Eigen::Lower>()
                .solve(b.transpose())
                .transpose();
      } else {
        Eigen::MatrixXd sym = 0.5 * (b + b.transpose());
        Eigen::LLT<Eigen::MatrixXd> llt(sym);
        if (llt.info() != Eigen::Success) return std::nullopt;
        rows[static_cast<std::size_t>(i)][0] = llt.matrixL();
      }
    }
  }

  std::vector<Eigen::MatrixXd> band(static_cast<std::size_t>(q) + 1);
  for (int j = 0; j <= q; ++j)
    band[static_cast<std::size_t>(j)] =
        rows[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(j)];
  return band;
}

// The Toeplitz-limit band identity is C_delta = sum_i B_i B_{i+delta}^T, so
// the coefficient equations C_delta = sum_i Q_{i+delta}^T Q_i are met by the
// reversed transposes Q_i = B_{q-i}^T.
Factorization band_to_factorization(const std::vector<Eigen::MatrixXd>& band,
                                    int q) {
  Factorization f;
  f.dim = 1;
  f.block_size = static_cast<int>(band[0].rows());
  f.rank = 1;
  f.degree = q;
  std::map<Offset, Eigen::MatrixXd> blocks;
  for (int i = 0; i <= q; ++i)
    blocks.emplace(Offset{i},
                   band[static_cast<std::size_t>(q - i)].transpose());
  f.factors.push_back(std::move(blocks));
  f.method = "bauer";
  return f;
}

}  // namespace

Factorization factorize_bauer_1d(const LaurentPolynomial& p,
                                 const BauerOptions& opts) {
  if (p.dim != 1)
    throw InvalidInputError("the Toeplitz path handles univariate symbols only");

  int q = 0;
  double coeff_norm_sq = 0.0;
  for (const auto& [l, b] : p.blocks) {
    coeff_norm_sq += b.squaredNorm();
    if (b.norm() > 0.0) q = std::max(q, std::abs(l[0]));
  }
  const double coeff_norm = std::sqrt(coeff_norm_sq);
  if (coeff_norm == 0.0) {
    Factorization f;
    f.dim = 1;
    f.block_size = p.block_size;
    f.rank = 1;
    f.degree = 0;
    std::map<Offset, Eigen::MatrixXd> blocks;
    blocks.emplace(Offset{0}, Eigen::MatrixXd::Zero(p.block_size, p.block_size));
    f.factors.push_back(std::move(blocks));
    f.method = "bauer";
    certify(f, p, 8);
    return f;
  }

  const int grid = std::max(256, 2 * q + 2);
  int n = opts.toeplitz_rows > 0 ? opts.toeplitz_rows : std::max(20 * q, 64);
  n = std::max(n, q + 2);

  Factorization best;
  double best_residual = std::numeric_limits<double>::infinity();
  bool ever_broke_down = false;

  for (int attempt = 0; attempt <= opts.max_doublings; ++attempt, n *= 2) {
    std::optional<std::vector<Eigen::MatrixXd>> band =
        cholesky_band(p, q, n, 0.0);
    if (!band) {
      // Semidefinite section: lift the diagonal, solve twice, and remove the
      // first-order shift bias by Richardson extrapolation.
      ever_broke_down = true;
      const double delta = opts.shift_scale * p.block_or_zero(Offset{0}).norm();
      auto b1 = cholesky_band(p, q, n, delta);
      auto b2 = cholesky_band(p, q, n, delta / 10.0);
      if (!b1 || !b2) continue;
      band.emplace(b1->size());
      for (std::size_t j = 0; j < b1->size(); ++j)
        (*band)[j] = ((*b2)[j] * 10.0 - (*b1)[j]) / 9.0;
    }
    Factorization f = band_to_factorization(*band, q);
    const double rel = residual_coefficients(p, f) / coeff_norm;
    if (rel < best_residual) {
      best_residual = rel;
      best = f;
      best.iterations = n;
    }
    if (rel <= opts.residual_tolerance) {
      certify(best, p, grid);
      return best;
    }
  }

  // Either the section broke down beyond repair or the band converges too
  // slowly (zeros of det P on the unit circle make it polynomial in n).
  if (opts.allow_sos_fallback) {
    SosOptions sopt;
    sopt.max_iterations = 800;
    sopt.residual_tolerance =
        std::min(opts.residual_tolerance * coeff_norm, 1e-10 * coeff_norm);
    SosResult sos = factorize_sos(p, 1, q, sopt);
    const double rel = residual_coefficients(p, sos.factorization) / coeff_norm;
    if (rel <= opts.residual_tolerance) {
      Factorization f = sos.factorization;
      f.method = "sos-fallback";
      certify(f, p, grid);
      return f;
    }
    throw ConvergenceError(
        "Toeplitz band stalled at relative residual " +
        std::to_string(best_residual) +
        " and the sum-of-squares fallback stalled at " + std::to_string(rel));
  }
  throw ConvergenceError(
      std::string("Toeplitz band did not certify: best relative residual ") +
      std::to_string(best_residual) +
      (ever_broke_down ? " (Cholesky breakdown on a semidefinite section)"
                       : "") +
      "; fallback disabled");
}

}  // namespace harmoniq
