#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "harmoniq/dynamical.hpp"
#include "harmoniq/errors.hpp"
#include "harmoniq/io.hpp"
#include "harmoniq/q_operator.hpp"
#include "harmoniq/sos.hpp"
#include "harmoniq/stencil.hpp"

using namespace harmoniq;

namespace {

double max_entry_diff(const Eigen::SparseMatrix<double>& a,
                      const Eigen::SparseMatrix<double>& b) {
  return (Eigen::MatrixXd(a) - Eigen::MatrixXd(b)).cwiseAbs().maxCoeff();
}

SiteSet chain(int n, Boundary b = Boundary::Fixed) {
  return build_site_set({n}, b);
}

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace

TEST_CASE("closed-form factors reproduce the force-constant matrix") {
  for (const char* name : {"nnn-chain", "nn-chain", "diatomic"}) {
    const Stencil st = stencil_preset(name);
    const Factorization f = factorization_preset(name);
    for (int n : {4, 7, 12}) {
      for (Boundary b : {Boundary::Fixed, Boundary::Periodic}) {
        const SiteSet sites = chain(n, b);
        const QOperator q(f, sites);
        const Eigen::SparseMatrix<double> qs = q.to_sparse();
        const Eigen::SparseMatrix<double> qtq =
            Eigen::SparseMatrix<double>(qs.transpose()) * qs;
        CAPTURE(name);
        CAPTURE(n);
        CHECK(max_entry_diff(qtq, assemble_D(st, sites)) <= 1e-13);
      }
    }
  }
  const Stencil st = stencil_preset("synthetic-2d");
  const Factorization f = factorization_preset("synthetic-2d");
  for (Boundary b : {Boundary::Fixed, Boundary::Periodic}) {
    const SiteSet sites = build_site_set({5, 4}, b);
    const QOperator q(f, sites);
    const Eigen::SparseMatrix<double> qs = q.to_sparse();
    const Eigen::SparseMatrix<double> qtq =
        Eigen::SparseMatrix<double>(qs.transpose()) * qs;
    CHECK(max_entry_diff(qtq, assemble_D(st, sites)) <= 1e-13);
  }
}

TEST_CASE("masked domain keeps the identity on the remaining sites") {
  const Stencil st = stencil_preset("synthetic-2d");
  const Factorization f = factorization_preset("synthetic-2d");
  std::vector<Offset> masked;
  for (int x = 3; x <= 4; ++x)
    for (int y = 3; y <= 4; ++y) masked.push_back({x, y});
  const SiteSet sites = build_site_set({8, 8}, Boundary::Fixed, masked);
  REQUIRE(sites.size() == 60);
  const QOperator q(f, sites);
  const Eigen::SparseMatrix<double> qs = q.to_sparse();
  const Eigen::SparseMatrix<double> qtq =
      Eigen::SparseMatrix<double>(qs.transpose()) * qs;
  CHECK(max_entry_diff(qtq, assemble_D(st, sites)) <= 1e-13);
}

TEST_CASE("matrix-free products agree with the sparse copy") {
  const Factorization f = factorization_preset("synthetic-2d");
  const SiteSet sites = build_site_set({6, 5}, Boundary::Fixed);
  const QOperator q(f, sites);
  const Eigen::SparseMatrix<double> qs = q.to_sparse();

  const Eigen::VectorXd u = random_vector(q.cols(), 1);
  CHECK((q.apply(u) - qs * u).norm() <= 1e-13 * u.norm());
  const Eigen::VectorXd w = random_vector(q.rows(), 2);
  CHECK((q.apply_transpose(w) - qs.transpose() * w).norm() <=
        1e-13 * w.norm());

  const Eigen::VectorXd re = random_vector(q.cols(), 3);
  const Eigen::VectorXd im = random_vector(q.cols(), 4);
  Eigen::VectorXcd uc(q.cols());
  uc.real() = re;
  uc.imag() = im;
  CHECK((q.apply(uc) - qs * uc).norm() <= 1e-13 * uc.norm());
}

TEST_CASE("placement self-check passes even for a bad factorization") {
  // The operator must faithfully represent whatever blocks it was given;
  // factor quality is a separate question answered against the stencil.
  const Stencil st = stencil_preset("synthetic-2d");
  const LaurentPolynomial p = LaurentPolynomial::from_stencil(st);
  SosOptions opts;
  opts.max_iterations = 3;
  opts.max_restarts = 1;
  const SosResult bad = factorize_sos(p, 1, 1, opts);
  REQUIRE(bad.status != SosStatus::Converged);

  const SiteSet sites = build_site_set({5, 5}, Boundary::Fixed);
  const QOperator q(bad.factorization, sites);
  CHECK(q.placement_residual() <= 1e-12);

  CHECK_THROWS_AS(assemble_Q(bad.factorization, sites, &st),
                  VerificationError);
}

TEST_CASE("recovery sweep inverts the factor on its range") {
  struct Case {
    const char* name;
    std::vector<int> extents;
  };
  for (const Case& c : {Case{"nnn-chain", {16}}, Case{"synthetic-2d", {6, 5}},
                        Case{"diatomic", {9}}}) {
    const Factorization f = factorization_preset(c.name);
    const SiteSet sites = build_site_set(c.extents, Boundary::Fixed);
    const QOperator q(f, sites);
    const Eigen::VectorXd u = random_vector(q.cols(), 10);
    const RecoveryResult r = recover_displacement(q, q.apply(u), 1e-8);
    CAPTURE(c.name);
    CHECK((r.u - u).norm() <= 1e-10 * u.norm());
    CHECK(r.range_residual <= 1e-10);
  }
}

TEST_CASE("out-of-range data fails strict recovery and is surfaced otherwise") {
  const Factorization f = factorization_preset("nnn-chain");
  const QOperator q(f, chain(12));
  const Eigen::VectorXd w = random_vector(q.rows(), 20);
  CHECK_THROWS_AS(recover_displacement(q, w, 1e-6, true), VerificationError);
  const RecoveryResult r = recover_displacement(q, w, 1e-6, false);
  CHECK(r.range_residual > 1e-3);
}

TEST_CASE("recovery requires a fixed boundary and an invertible corner") {
  const Factorization f = factorization_preset("nnn-chain");
  const QOperator periodic(f, chain(12, Boundary::Periodic));
  CHECK_THROWS_AS(
      recover_displacement(periodic, Eigen::VectorXd::Zero(periodic.rows())),
      InvalidInputError);

  // A factor with no zero-offset block leaves nothing to eliminate with.
  Factorization shifted;
  shifted.dim = 1;
  shifted.block_size = 1;
  shifted.rank = 1;
  shifted.degree = 1;
  std::map<Offset, Eigen::MatrixXd> blocks;
  blocks.emplace(Offset{1}, Eigen::MatrixXd::Identity(1, 1));
  shifted.factors.push_back(std::move(blocks));
  const QOperator qs(shifted, chain(6));
  const Eigen::VectorXd w = qs.apply(random_vector(qs.cols(), 30));
  CHECK_THROWS_AS(recover_displacement(qs, w), InvalidInputError);
}

TEST_CASE("probing estimate of the residual tracks the exact one") {
  const Stencil st = stencil_preset("nn-chain");
  const Factorization f = factorization_preset("nn-chain");
  const SiteSet sites = chain(6);
  const QOperator q(f, sites);

  Eigen::SparseMatrix<double> d = assemble_D(st, sites);
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < d.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value());
  trips.emplace_back(2, 3, 1e-3);
  trips.emplace_back(3, 2, 1e-3);
  Eigen::SparseMatrix<double> perturbed(d.rows(), d.cols());
  perturbed.setFromTriplets(trips.begin(), trips.end());

  const double exact = verify_QTQ(q, perturbed, 64, 7, 4096);
  const double probed = verify_QTQ(q, perturbed, 256, 7, 4);
  REQUIRE(exact > 1e-5);
  CHECK(probed / exact >= 0.3);
  CHECK(probed / exact <= 3.0);
}

TEST_CASE("matrix market export is deterministic text") {
  Eigen::SparseMatrix<double> m(2, 2);
  std::vector<Eigen::Triplet<double>> trips = {
      {0, 0, 1.5}, {1, 0, -2.0}, {1, 1, 3.0}};
  m.setFromTriplets(trips.begin(), trips.end());
  const std::string path =
      (std::filesystem::temp_directory_path() / "harmoniq-mm-test.mtx")
          .string();
  write_matrix_market(path, m);
  CHECK(read_text_file(path) ==
        "%%MatrixMarket matrix coordinate real general\n"
        "2 2 3\n"
        "1 1 1.5\n"
        "2 1 -2\n"
        "2 2 3\n");
  std::filesystem::remove(path);
}
