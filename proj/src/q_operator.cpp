#include "harmoniq/q_operator.hpp"

#include <Eigen/QR>
#include <cmath>
#include <complex>
#include <random>
#include <set>

#include "harmoniq/dynamical.hpp"
#include "harmoniq/errors.hpp"
#include "harmoniq/io.hpp"

namespace harmoniq {

namespace {

// Sparse block assembly of a Laurent polynomial on a site set, same placement
// rule as assemble_D: block (j, k = j + l) gets C_l, wrapped when periodic.
// Duplicate targets (wrap aliasing on small rings) are summed.
Eigen::SparseMatrix<double> assemble_laurent(const LaurentPolynomial& lp,
                                             const SiteSet& s) {
  const int m = lp.block_size;
  const Eigen::Index n = static_cast<Eigen::Index>(s.size()) * m;
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t j = 0; j < s.sites.size(); ++j) {
    for (const auto& [l, c] : lp.blocks) {
      Offset target = add(s.sites[j], l);
      if (s.boundary == Boundary::Periodic) target = s.wrap(target);
      const int k = s.index_of(target);
      if (k < 0) continue;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          if (c(a, b) != 0.0)
            trip.emplace_back(static_cast<int>(j) * m + a, k * m + b, c(a, b));
    }
  }
  Eigen::SparseMatrix<double> out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace

QOperator::QOperator(Factorization f, SiteSet domain)
    : fact_(std::move(f)), domain_(std::move(domain)) {
  if (fact_.dim != domain_.dim)
    throw InvalidInputError("factorization and site set dimension mismatch");
  if (fact_.block_size <= 0 || fact_.rank <= 0)
    throw InvalidInputError("factorization has no blocks");

  codomain_ = domain_.boundary == Boundary::Periodic
                  ? domain_
                  : pad_site_set(domain_, fact_.degree);

  // Union of the factor supports, lex order.
  std::set<Offset> keys;
  for (const auto& blocks : fact_.factors)
    for (const auto& [j, b] : blocks) keys.insert(j);
  offsets_.assign(keys.begin(), keys.end());

  const std::size_t nsites = domain_.sites.size();
  offset_blocks_.resize(offsets_.size());
  scatter_.resize(offsets_.size());
  for (std::size_t oi = 0; oi < offsets_.size(); ++oi) {
    offset_blocks_[oi].reserve(static_cast<std::size_t>(fact_.rank));
    for (int s = 0; s < fact_.rank; ++s)
      offset_blocks_[oi].push_back(fact_.block_or_zero(s, offsets_[oi]));
    scatter_[oi].resize(nsites);
    for (std::size_t k = 0; k < nsites; ++k) {
      Offset target = add(domain_.sites[k], offsets_[oi]);
      if (domain_.boundary == Boundary::Periodic)
        target = codomain_.wrap(target);
      const int idx = codomain_.index_of(target);
      if (idx < 0)
        throw VerificationError("factor offset scatters outside the codomain");
      scatter_[oi][k] = idx;
    }
  }

  // Placement self-check against the polynomial the factor actually
  // synthesizes; independent of how well it matches any physical target.
  const Eigen::SparseMatrix<double> q = to_sparse();
  const Eigen::SparseMatrix<double> gram = q.transpose() * q;
  const Eigen::SparseMatrix<double> synth =
      assemble_laurent(synthesize(fact_), domain_);
  const double denom = synth.norm();
  const double resid = Eigen::SparseMatrix<double>(gram - synth).norm();
  placement_residual_ = denom > 0.0 ? resid / denom : resid;
  if (placement_residual_ > 1e-12)
    throw VerificationError("Q^T Q deviates from the synthesized polynomial: " +
                            format_double(placement_residual_));
}

Eigen::Index QOperator::cols() const {
  return static_cast<Eigen::Index>(domain_.size()) * fact_.block_size;
}

Eigen::Index QOperator::rows() const {
  return static_cast<Eigen::Index>(fact_.rank) *
         static_cast<Eigen::Index>(codomain_.size()) * fact_.block_size;
}

template <typename Scalar>
void QOperator::apply_impl(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u,
                           Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w) const {
  const int m = fact_.block_size;
  const Eigen::Index csites = static_cast<Eigen::Index>(codomain_.size());
  w.setZero(rows());
  for (std::size_t oi = 0; oi < offsets_.size(); ++oi)
    for (int s = 0; s < fact_.rank; ++s) {
      const Eigen::MatrixXd& blk = offset_blocks_[oi][static_cast<std::size_t>(s)];
      for (std::size_t k = 0; k < domain_.sites.size(); ++k) {
        const Eigen::Index src = static_cast<Eigen::Index>(k) * m;
        const Eigen::Index dst = (s * csites + scatter_[oi][k]) * m;
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) w[dst + a] += blk(a, b) * u[src + b];
      }
    }
}

template <typename Scalar>
void QOperator::apply_transpose_impl(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w,
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u) const {
  const int m = fact_.block_size;
  const Eigen::Index csites = static_cast<Eigen::Index>(codomain_.size());
  u.setZero(cols());
  for (std::size_t oi = 0; oi < offsets_.size(); ++oi)
    for (int s = 0; s < fact_.rank; ++s) {
      const Eigen::MatrixXd& blk = offset_blocks_[oi][static_cast<std::size_t>(s)];
      for (std::size_t k = 0; k < domain_.sites.size(); ++k) {
        const Eigen::Index dst = static_cast<Eigen::Index>(k) * m;
        const Eigen::Index src = (s * csites + scatter_[oi][k]) * m;
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) u[dst + b] += blk(a, b) * w[src + a];
      }
    }
}

Eigen::VectorXd QOperator::apply(const Eigen::VectorXd& u) const {
  if (u.size() != cols())
    throw InvalidInputError("displacement vector has the wrong length");
  Eigen::VectorXd w;
  apply_impl(u, w);
  return w;
}

Eigen::VectorXcd QOperator::apply(const Eigen::VectorXcd& u) const {
  if (u.size() != cols())
    throw InvalidInputError("displacement vector has the wrong length");
  Eigen::VectorXcd w;
  apply_impl(u, w);
  return w;
}

Eigen::VectorXd QOperator::apply_transpose(const Eigen::VectorXd& w) const {
  if (w.size() != rows())
    throw InvalidInputError("factor-space vector has the wrong length");
  Eigen::VectorXd u;
  apply_transpose_impl(w, u);
  return u;
}

Eigen::VectorXcd QOperator::apply_transpose(const Eigen::VectorXcd& w) const {
  if (w.size() != rows())
    throw InvalidInputError("factor-space vector has the wrong length");
  Eigen::VectorXcd u;
  apply_transpose_impl(w, u);
  return u;
}

Eigen::SparseMatrix<double> QOperator::to_sparse() const {
  const int m = fact_.block_size;
  const Eigen::Index csites = static_cast<Eigen::Index>(codomain_.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t oi = 0; oi < offsets_.size(); ++oi)
    for (int s = 0; s < fact_.rank; ++s) {
      const Eigen::MatrixXd& blk = offset_blocks_[oi][static_cast<std::size_t>(s)];
      for (std::size_t k = 0; k < domain_.sites.size(); ++k) {
        const Eigen::Index col = static_cast<Eigen::Index>(k) * m;
        const Eigen::Index row = (s * csites + scatter_[oi][k]) * m;
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b)
            if (blk(a, b) != 0.0)
              trip.emplace_back(static_cast<int>(row) + a,
                                static_cast<int>(col) + b, blk(a, b));
      }
    }
  Eigen::SparseMatrix<double> out(rows(), cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

QOperator assemble_Q(const Factorization& f, const SiteSet& domain,
                     const Stencil* check_against) {
  QOperator q(f, domain);
  if (check_against) {
    if (check_against->block_size() != f.block_size ||
        check_against->dim != f.dim)
      throw InvalidInputError("stencil and factorization shape mismatch");
    const Eigen::SparseMatrix<double> d = assemble_D(*check_against, domain);
    const double resid = verify_QTQ(q, d);
    if (resid > 1e-8)
      throw VerificationError(
          "assembled Q^T Q does not reproduce the dynamical matrix: "
          "relative residual " +
          format_double(resid));
  }
  return q;
}

double verify_QTQ(const QOperator& q, const Eigen::SparseMatrix<double>& d,
                  int probes, std::uint64_t seed,
                  Eigen::Index max_exact_dim) {
  if (d.rows() != q.cols() || d.cols() != q.cols())
    throw InvalidInputError("reference matrix shape does not match Q^T Q");
  const double denom = d.norm();

  if (q.cols() <= max_exact_dim) {
    const Eigen::SparseMatrix<double> s = q.to_sparse();
    const double resid =
        Eigen::SparseMatrix<double>(
            Eigen::SparseMatrix<double>(s.transpose() * s) - d)
            .norm();
    return denom > 0.0 ? resid / denom : resid;
  }

  // Hutchinson estimate of |R|_F^2 = E |R v|^2 over Rademacher probes,
  // with R v evaluated matrix-free.
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  double acc = 0.0;
  for (int p = 0; p < probes; ++p) {
    Eigen::VectorXd v(q.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = coin(rng) ? 1.0 : -1.0;
    const Eigen::VectorXd rv = q.apply_transpose(q.apply(v)) - d * v;
    acc += rv.squaredNorm();
  }
  const double resid = std::sqrt(acc / probes);
  return denom > 0.0 ? resid / denom : resid;
}

RecoveryResult recover_displacement(const QOperator& q,
                                    const Eigen::VectorXd& w, double tolerance,
                                    bool strict) {
  if (q.domain().boundary == Boundary::Periodic)
    throw InvalidInputError(
        "displacement recovery needs a fixed boundary; the periodic sweep has "
        "no triangular start");
  if (w.size() != q.rows())
    throw InvalidInputError("factor-space vector has the wrong length");

  const Factorization& f = q.factorization();
  const int m = f.block_size;
  const SiteSet& domain = q.domain();
  const SiteSet& codomain = q.codomain_sites();
  const Eigen::Index csites = static_cast<Eigen::Index>(codomain.size());

  const Eigen::MatrixXd z = f.stacked_zero_block();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  if (qr.rank() < m)
    throw InvalidInputError(
        "stacked zero-offset block is column-rank deficient; displacements "
        "are not recoverable from this factorization");

  const std::vector<Offset> corner = hypercube_offsets(f.dim, 0, f.degree);

  // Sites are stored lex ascending, so u at site - offset (offset > 0 lex)
  // is already solved when we reach the site.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(q.cols());
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(f.rank) * m);
  for (std::size_t k = 0; k < domain.sites.size(); ++k) {
    const Offset& site = domain.sites[k];
    for (int s = 0; s < f.rank; ++s) {
      const int row = codomain.index_of(site);
      rhs.segment(static_cast<Eigen::Index>(s) * m, m) =
          w.segment((s * csites + row) * m, m);
    }
    for (const Offset& o : corner) {
      if (is_zero(o)) continue;
      const int src = domain.index_of(sub(site, o));
      if (src < 0) continue;
      for (int s = 0; s < f.rank; ++s) {
        const Eigen::MatrixXd blk = f.block_or_zero(s, o);
        rhs.segment(static_cast<Eigen::Index>(s) * m, m).noalias() -=
            blk * u.segment(static_cast<Eigen::Index>(src) * m, m);
      }
    }
    u.segment(static_cast<Eigen::Index>(k) * m, m) = qr.solve(rhs);
  }

  RecoveryResult out;
  out.u = std::move(u);
  const double wn = w.norm();
  out.range_residual =
      wn > 0.0 ? (q.apply(out.u) - w).norm() / wn : (q.apply(out.u)).norm();
  if (strict && out.range_residual > tolerance)
    throw VerificationError(
        "factor-space vector is outside the range of Q: relative residual " +
        format_double(out.range_residual));
  return out;
}

void write_matrix_market(const std::string& path,
                         const Eigen::SparseMatrix<double>& mat) {
  std::string text = "%%MatrixMarket matrix coordinate real general\n";
  text += std::to_string(mat.rows()) + " " + std::to_string(mat.cols()) + " " +
          std::to_string(mat.nonZeros()) + "\n";
  for (int k = 0; k < mat.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(mat, k); it; ++it)
      text += std::to_string(it.row() + 1) + " " +
              std::to_string(it.col() + 1) + " " + format_double(it.value()) +
              "\n";
  write_text_file(path, text);
}

}  // namespace harmoniq
