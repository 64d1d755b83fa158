#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "harmoniq/factorization.hpp"
#include "harmoniq/site_set.hpp"

namespace harmoniq {

// The rectangular factor operator Q on a finite site set: rows are indexed
// by (s, l) with l in the padded codomain (fixed boundary) or the domain
// itself (periodic), columns by k in the domain, with block Q^(s)_{l-k}
// whenever l-k lies in [0, degree]^d (wrapped when periodic). Satisfies
// Q^T Q = D for the synthesized stencil by construction.
//
// Applications are matrix-free over precomputed neighbor tables; an explicit
// sparse copy is available for small checks and export.
class QOperator {
 public:
  QOperator(Factorization f, SiteSet domain);

  const Factorization& factorization() const { return fact_; }
  const SiteSet& domain() const { return domain_; }
  const SiteSet& codomain_sites() const { return codomain_; }

  Eigen::Index cols() const;  // |S| * m
  Eigen::Index rows() const;  // rank * |codomain| * m

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& u) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& w) const;
  Eigen::VectorXcd apply_transpose(const Eigen::VectorXcd& w) const;

  Eigen::SparseMatrix<double> to_sparse() const;

  // |Q^T Q - D_synth|_F / |D_synth|_F, the block-placement self-check run at
  // construction (must be at round-off level regardless of how good the
  // factorization is).
  double placement_residual() const { return placement_residual_; }

 private:
  template <typename Scalar>
  void apply_impl(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u,
                  Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w) const;
  template <typename Scalar>
  void apply_transpose_impl(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w,
                            Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u) const;

  Factorization fact_;
  SiteSet domain_;
  SiteSet codomain_;
  // Per factor offset (lex order): the offset, its blocks per s, and for each
  // domain site the codomain site index it scatters to.
  std::vector<Offset> offsets_;
  std::vector<std::vector<Eigen::MatrixXd>> offset_blocks_;  // [offset][s]
  std::vector<std::vector<int>> scatter_;                    // [offset][site]
  double placement_residual_ = 0.0;
};

// Builds the operator and, when a physical stencil is supplied, verifies
// |Q^T Q - D(st)|_F / |D(st)|_F <= 1e-8 (throws VerificationError above it).
QOperator assemble_Q(const Factorization& f, const SiteSet& domain,
                     const Stencil* check_against = nullptr);

// Relative Frobenius residual |Q^T Q - D|_F / |D|_F. Exact (sparse algebra)
// up to max_exact_dim columns, Hutchinson probing with the given seed above.
double verify_QTQ(const QOperator& q, const Eigen::SparseMatrix<double>& d,
                  int probes = 64, std::uint64_t seed = 7,
                  Eigen::Index max_exact_dim = 4096);

struct RecoveryResult {
  Eigen::VectorXd u;
  double range_residual = 0.0;  // |Q u - w| / |w|
};

// Solves Q u = w by the lexicographic forward-substitution sweep (fixed
// boundary only): at site k the stacked zero-offset block eats the unknown,
// everything else is already known. Requires recovery capability (full
// column rank of the stacked zero-offset block). When strict, throws
// VerificationError if the range residual exceeds tolerance.
RecoveryResult recover_displacement(const QOperator& q,
                                    const Eigen::VectorXd& w,
                                    double tolerance = 1e-6,
                                    bool strict = true);

void write_matrix_market(const std::string& path,
                         const Eigen::SparseMatrix<double>& mat);

}  // namespace harmoniq
