#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "doctest.h"
#include "harmoniq/classical.hpp"
#include "harmoniq/dynamical.hpp"
#include "harmoniq/errors.hpp"
#include "harmoniq/site_set.hpp"

using namespace harmoniq;

namespace {

// Closed-form solution u(t) = cos(Om t) u0 + Om^{-1} sin(Om t) v0 for unit
// masses, Om = sqrt(D).
ClassicalState exact_solution(const Eigen::MatrixXd& d,
                              const ClassicalState& init, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
  const Eigen::VectorXd om = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXd cu = es.eigenvectors().transpose() * init.u;
  Eigen::VectorXd cv = es.eigenvectors().transpose() * init.v;
  Eigen::VectorXd ut(cu.size()), vt(cu.size());
  for (Eigen::Index i = 0; i < cu.size(); ++i) {
    const double w = om[i];
    if (w > 1e-12) {
      ut[i] = std::cos(w * t) * cu[i] + std::sin(w * t) / w * cv[i];
      vt[i] = -w * std::sin(w * t) * cu[i] + std::cos(w * t) * cv[i];
    } else {
      ut[i] = cu[i] + t * cv[i];
      vt[i] = cv[i];
    }
  }
  ClassicalState out;
  out.u = es.eigenvectors() * ut;
  out.v = es.eigenvectors() * vt;
  out.t = t;
  return out;
}

}  // namespace

TEST_CASE("single fixed site oscillates at sqrt(2)") {
  const Stencil st = stencil_preset("nn-chain");
  const SiteSet sites = build_site_set({1}, Boundary::Fixed);
  const Eigen::SparseMatrix<double> d = assemble_D(st, sites);
  REQUIRE(Eigen::MatrixXd(d)(0, 0) == doctest::Approx(2.0));

  ClassicalState init;
  init.u = Eigen::VectorXd::Constant(1, 1.0);
  init.v = Eigen::VectorXd::Zero(1);

  VerletConfig cfg;
  cfg.dt = 1e-4;
  cfg.steps = 10000;  // t = 1
  cfg.snapshot_stride = 10000;
  const ClassicalTrajectory traj =
      verlet_evolve(init, d, Eigen::VectorXd::Ones(1), cfg);
  const double expected = std::cos(std::sqrt(2.0) * 1.0);
  CHECK(traj.snapshots.back().u[0] ==
        doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("kick-drift-kick converges at second order") {
  const Stencil st = stencil_preset("nnn-chain");
  const SiteSet sites = build_site_set({8}, Boundary::Fixed);
  const Eigen::SparseMatrix<double> d = assemble_D(st, sites);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist(0.0, 1.0);
  ClassicalState init;
  init.u.resize(8);
  init.v.resize(8);
  for (int i = 0; i < 8; ++i) init.u[i] = dist(rng);
  for (int i = 0; i < 8; ++i) init.v[i] = dist(rng);

  const double T = 3.0;
  const ClassicalState ref = exact_solution(Eigen::MatrixXd(d), init, T);

  std::vector<double> errs;
  for (double dt : {0.02, 0.01}) {
    VerletConfig cfg;
    cfg.dt = dt;
    cfg.steps = std::lround(T / dt);
    cfg.snapshot_stride = cfg.steps;
    const ClassicalTrajectory traj =
        verlet_evolve(init, d, Eigen::VectorXd::Ones(8), cfg);
    errs.push_back((traj.snapshots.back().u - ref.u).norm());
  }
  CHECK(errs[0] / errs[1] >= 3.5);
  CHECK(errs[0] / errs[1] <= 4.5);
}

TEST_CASE("energy stays on budget over a long run") {
  const Stencil st = stencil_preset("diatomic");
  const MassModel mm = mass_model_of(st);
  const SiteSet sites = build_site_set({16}, Boundary::Fixed);
  const Eigen::SparseMatrix<double> d = assemble_D(st, sites);
  const Eigen::VectorXd masses = mm.dof_masses(sites.size());

  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist(0.0, 1.0);
  ClassicalState init;
  init.u.setZero(32);
  init.v.resize(32);
  for (int i = 0; i < 32; ++i) init.v[i] = dist(rng);

  VerletConfig cfg;
  cfg.dt = 0.01;
  cfg.steps = 1000;  // t = 10
  cfg.snapshot_stride = 100;
  const ClassicalTrajectory traj = verlet_evolve(init, d, masses, cfg);
  const double e0 = total_energy(init, d, masses);
  for (const ClassicalState& s : traj.snapshots)
    CHECK(std::abs(total_energy(s, d, masses) - e0) <= 1e-3 * e0);
}

TEST_CASE("an unstable step size aborts instead of reporting garbage") {
  const Stencil st = stencil_preset("nnn-chain");
  const SiteSet sites = build_site_set({16}, Boundary::Fixed);
  const Eigen::SparseMatrix<double> d = assemble_D(st, sites);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist(0.0, 1.0);
  ClassicalState init;
  init.u.resize(16);
  init.v.setZero(16);
  for (int i = 0; i < 16; ++i) init.u[i] = dist(rng);

  VerletConfig cfg;
  cfg.dt = 1.5;  // stability limit is 2/debye = 1 for this chain
  cfg.steps = 2000;
  cfg.snapshot_stride = 2000;
  CHECK_THROWS_AS(verlet_evolve(init, d, Eigen::VectorXd::Ones(16), cfg),
                  VerificationError);
}

TEST_CASE("snapshot stride counts stride multiples plus the final step") {
  const Stencil st = stencil_preset("nn-chain");
  const SiteSet sites = build_site_set({2}, Boundary::Fixed);
  const Eigen::SparseMatrix<double> d = assemble_D(st, sites);
  ClassicalState init;
  init.u = Eigen::VectorXd::Constant(2, 0.5);
  init.v = Eigen::VectorXd::Zero(2);

  VerletConfig cfg;
  cfg.dt = 0.01;
  cfg.steps = 10;
  cfg.snapshot_stride = 3;
  const ClassicalTrajectory traj =
      verlet_evolve(init, d, Eigen::VectorXd::Ones(2), cfg);
  REQUIRE(traj.snapshots.size() == 5);  // t = 0, 3dt, 6dt, 9dt, 10dt
  CHECK(traj.snapshots[1].t == doctest::Approx(0.03));
  CHECK(traj.snapshots.back().t == doctest::Approx(0.1));

  cfg.steps = 0;
  const ClassicalTrajectory only_start =
      verlet_evolve(init, d, Eigen::VectorXd::Ones(2), cfg);
  CHECK(only_start.snapshots.size() == 1);

  cfg.steps = 10;
  cfg.dt = -1.0;
  CHECK_THROWS_AS(verlet_evolve(init, d, Eigen::VectorXd::Ones(2), cfg),
                  InvalidInputError);
}
