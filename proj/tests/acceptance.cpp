// Release gate for the library: every check prints one PASS/FAIL line with
// the measured value next to its pinned tolerance, and the process exits
// nonzero if any check fails. Tolerances are frozen here on purpose; loosen
// them only with a recorded reason.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "harmoniq/bauer.hpp"
#include "harmoniq/classical.hpp"
#include "harmoniq/dynamical.hpp"
#include "harmoniq/errors.hpp"
#include "harmoniq/evolve.hpp"
#include "harmoniq/factorization.hpp"
#include "harmoniq/io.hpp"
#include "harmoniq/presets.hpp"
#include "harmoniq/q_operator.hpp"
#include "harmoniq/scalar_factor.hpp"
#include "harmoniq/schrodinger.hpp"
#include "harmoniq/sos.hpp"
#include "harmoniq/stencil.hpp"

using namespace harmoniq;

namespace {

int g_failures = 0;
int g_index = 0;

void report(bool ok, const std::string& what, const std::string& detail) {
  ++g_index;
  std::printf("%s %2d  %-52s %s\n", ok ? "PASS" : "FAIL", g_index,
              what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void run(const std::string& what, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(false, what, std::string("exception: ") + e.what());
  }
}

std::string fmt(double x) { return format_double(x); }

double torus_mismatch(const LaurentPolynomial& p, const Factorization& f,
                      int grid) {
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    const Eigen::VectorXd theta =
        Eigen::VectorXd::Constant(1, 2.0 * M_PI * i / grid);
    worst = std::max(worst, (f.gram(theta) - p.eval(theta)).norm());
  }
  return worst;
}

// Gram of two random degree-1 block polynomials in two variables (the
// generically rank-2 family used by the optimizer checks).
LaurentPolynomial random_rank2_gram(std::uint64_t seed) {
  const int m = 2;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const std::vector<Offset> corner = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::vector<std::vector<Eigen::MatrixXd>> q(2);
  for (auto& factor : q)
    for (std::size_t j = 0; j < corner.size(); ++j) {
      Eigen::MatrixXd blk(m, m);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) blk(r, c) = dist(rng);
      factor.push_back(blk);
    }
  LaurentPolynomial p;
  p.dim = 2;
  p.block_size = m;
  p.degree = 1;
  for (const Offset& l : hypercube_offsets(2, -1, 1)) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m, m);
    for (const auto& factor : q)
      for (std::size_t ja = 0; ja < corner.size(); ++ja)
        for (std::size_t jb = 0; jb < corner.size(); ++jb)
          if (sub(corner[ja], corner[jb]) == l)
            c += factor[ja].transpose() * factor[jb];
    if (c.norm() > 0.0) p.blocks.emplace(l, c);
  }
  return p;
}

ClassicalState random_state(const SiteSet& sites, int block_size,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  const Eigen::Index n = static_cast<Eigen::Index>(sites.size()) * block_size;
  ClassicalState cs;
  cs.u.resize(n);
  cs.v.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) cs.u[i] = dist(rng);
  for (Eigen::Index i = 0; i < n; ++i) cs.v[i] = dist(rng);
  return cs;
}

}  // namespace

int main() {
  const std::filesystem::path work =
      std::filesystem::temp_directory_path() / "harmoniq-acceptance";
  std::filesystem::remove_all(work);
  std::filesystem::create_directories(work);

  // 1. Root splitting reproduces the closed-form chain factor, fast.
  run("scalar factor matches the closed form", [&] {
    const LaurentPolynomial p =
        LaurentPolynomial::from_stencil(stencil_preset("nnn-chain"));
    const auto t0 = std::chrono::steady_clock::now();
    const Factorization f = factorize_scalar_1d(p);
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    std::array<double, 3> got{};
    for (int j = 0; j <= 2; ++j) got[static_cast<std::size_t>(j)] =
        f.block_or_zero(0, Offset{j})(0, 0);
    const Factorization closed = factorization_preset("nnn-chain");
    std::array<double, 3> want{};
    for (int j = 0; j <= 2; ++j) want[static_cast<std::size_t>(j)] =
        closed.block_or_zero(0, Offset{j})(0, 0);

    // Gauge freedom: overall sign and coefficient reversal.
    double best = 1e300;
    for (int rev = 0; rev < 2; ++rev) {
      for (double sign : {1.0, -1.0}) {
        double diff = 0.0;
        for (int j = 0; j <= 2; ++j) {
          const double w = want[static_cast<std::size_t>(rev ? 2 - j : j)];
          diff = std::max(diff,
                          std::abs(sign * got[static_cast<std::size_t>(j)] - w));
        }
        best = std::min(best, diff);
      }
    }
    report(best <= 1e-6 && sec < 1.0,
           "scalar factor matches the closed form",
           "coeff diff " + fmt(best) + " (tol 1e-6), " + fmt(sec) + " s");
  });

  // 2. Dispersion scan agrees with the analytic branch.
  run("dispersion scan matches the analytic branch", [&] {
    const Stencil st = stencil_preset("nnn-chain");
    const MassModel mm = mass_model_of(st);
    const DispersionScan scan = dispersion_scan(st, mm, 256);
    double worst = 0.0;
    for (const DispersionSample& s : scan.samples) {
      const double theta = s.theta[0];
      const double expect = 2.0 * (1.0 - std::cos(theta)) -
                            (1.0 / 3.0) * (1.0 - std::cos(2.0 * theta));
      worst = std::max(worst, std::abs(s.eigenvalues[0] - expect));
    }
    const double debye = debye_frequency(st, mm);
    const bool ok = worst <= 1e-12 && std::abs(debye - 2.0) <= 1e-12;
    report(ok, "dispersion scan matches the analytic branch",
           "max dev " + fmt(worst) + " (tol 1e-12), debye " + fmt(debye));
  });

  // 3. Matrix factorization of the two-mass chain meets a tight Gram bound.
  run("two-mass chain factorization meets the Gram bound", [&] {
    const LaurentPolynomial p =
        LaurentPolynomial::from_stencil(stencil_preset("diatomic"));
    BauerOptions opts;
    opts.residual_tolerance = 1e-9;
    const Factorization f = factorize_bauer_1d(p, opts);
    const double gram = torus_mismatch(p, f, 128);
    const double exact =
        residual_coefficients(p, factorization_preset("diatomic"));
    const bool ok = gram <= 1e-8 && exact <= 1e-14;
    report(ok, "two-mass chain factorization meets the Gram bound",
           "gram " + fmt(gram) + " (tol 1e-8) via " + f.method +
               ", closed-form residual " + fmt(exact));
  });

  // 4. Assembled Q^T Q equals the force-constant matrix on finite lattices.
  run("Q^T Q equals the force constants on finite lattices", [&] {
    double worst = 0.0;
    std::string worst_case = "none";
    for (const char* name :
         {"nnn-chain", "nn-chain", "diatomic", "synthetic-2d"}) {
      const Stencil st = stencil_preset(name);
      const Factorization f = factorization_preset(name);
      for (int n = 4; n <= 8; ++n) {
        for (Boundary b : {Boundary::Fixed, Boundary::Periodic}) {
          const std::vector<int> extents =
              st.dim == 2 ? std::vector<int>{n, n} : std::vector<int>{n};
          const SiteSet sites = build_site_set(extents, b);
          const QOperator q(f, sites);
          const Eigen::SparseMatrix<double> qs = q.to_sparse();
          const Eigen::MatrixXd qtq =
              Eigen::MatrixXd(Eigen::SparseMatrix<double>(qs.transpose()) *
                              qs);
          const Eigen::MatrixXd d = Eigen::MatrixXd(assemble_D(st, sites));
          const double diff = (qtq - d).cwiseAbs().maxCoeff();
          if (diff > worst) {
            worst = diff;
            worst_case = std::string(name) + " n=" + std::to_string(n) +
                         (b == Boundary::Fixed ? " fixed" : " periodic");
          }
        }
      }
    }
    report(worst <= 1e-13, "Q^T Q equals the force constants on finite lattices",
           "max entry diff " + fmt(worst) + " (tol 1e-13) at " + worst_case);
  });

  // 5/6. Wave packet on the chain against the classical integrator.
  {
    PresetOutcome packet;
    bool ran = false;
    run("quantum packet tracks the classical integrator", [&] {
      PresetOptions opts;
      opts.out_dir = (work / "wavepacket").string();
      opts.oracle = true;
      const auto t0 = std::chrono::steady_clock::now();
      packet = run_experiment_preset("nnn-wavepacket", opts);
      const double sec =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      ran = true;
      const double v = packet.metrics.at("velocity_rel_l2");
      const double u = packet.metrics.at("displacement_rel_l2");
      report(v <= 1e-3 && u <= 1e-3 && sec < 60.0,
             "quantum packet tracks the classical integrator",
             "rel l2: v " + fmt(v) + ", u " + fmt(u) + " (tol 1e-3), " +
                 fmt(sec) + " s (< 60)");
    });
    run("packet run conserves norm and energy", [&] {
      if (!ran) {
        report(false, "packet run conserves norm and energy",
               "upstream run failed");
        return;
      }
      const double nd = packet.metrics.at("norm_drift");
      const double ed = packet.metrics.at("energy_drift");
      report(nd <= 1e-8 && ed <= 1e-6,
             "packet run conserves norm and energy",
             "norm drift " + fmt(nd) + " (tol 1e-8), energy drift " + fmt(ed) +
                 " (tol 1e-6)");
    });
  }

  // 7. Strang splitting converges at second order against a tight
  // Krylov reference.
  run("split-step error shrinks at second order", [&] {
    const Stencil st = stencil_preset("nnn-chain");
    const MassModel mm = mass_model_of(st);
    const SiteSet sites = build_site_set({32}, Boundary::Fixed);
    const QOperator q(factorization_preset("nnn-chain"), sites);
    const HamiltonianOperator h(q, mm);

    const double omega = std::sqrt(
        eval_dynamical_matrix(st, Eigen::VectorXd::Constant(1, M_PI / 2.0))(0, 0)
            .real());
    const ClassicalState cs = chain_wavepacket(sites, 8.0, 3.0, M_PI / 2.0,
                                               omega);
    const SchrodingerState psi0 = encode_state(cs, h);
    const double T = 8.0;

    EvolutionConfig ref_cfg;
    ref_cfg.method = EvolutionMethod::Krylov;
    ref_cfg.tolerance = 1e-12;
    const Eigen::VectorXcd ref = evolve(psi0, h, T, ref_cfg).concat();

    std::vector<double> errs;
    for (double dt : {0.2, 0.1, 0.05, 0.025}) {
      EvolutionConfig cfg;
      cfg.method = EvolutionMethod::Trotter;
      cfg.trotter_order = 2;
      cfg.dt = dt;
      errs.push_back((evolve(psi0, h, T, cfg).concat() - ref).norm());
    }
    bool ok = true;
    std::string ratios;
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
      const double r = errs[i] / errs[i + 1];
      if (!ratios.empty()) ratios += ", ";
      ratios += fmt(r);
      ok = ok && r >= 3.2 && r <= 4.8;
    }
    report(ok, "split-step error shrinks at second order",
           "ratios " + ratios + " (window [3.2, 4.8])");
  });

  // 8. The optimizer solves a generically rank-2 family, and rank 1 is
  // genuinely insufficient on a designated instance.
  run("optimizer handles the rank-2 family", [&] {
    const std::uint64_t master = 424242;
    int solved = 0;
    double worst_solved = 0.0;
    for (int i = 0; i < 20; ++i) {
      const LaurentPolynomial p =
          random_rank2_gram(derive_seed(master, static_cast<std::uint64_t>(i)));
      const SosResult r = factorize_sos(p, 2, 1, {});
      const double resid = r.factorization.residual_coeff;
      if (r.status == SosStatus::Converged && resid <= 1e-7) {
        ++solved;
        worst_solved = std::max(worst_solved, resid);
      }
    }

    const LaurentPolynomial designated =
        random_rank2_gram(derive_seed(master, 0));
    const SosResult rank1 = factorize_sos(designated, 1, 1, {});
    const bool rank1_stalls = rank1.status != SosStatus::Converged &&
                              rank1.factorization.residual_coeff > 1e-3;

    report(solved >= 18 && rank1_stalls, "optimizer handles the rank-2 family",
           std::to_string(solved) + "/20 solved (need 18, worst residual " +
               fmt(worst_solved) + " <= 1e-7); rank-1 residual " +
               fmt(rank1.factorization.residual_coeff) + " (> 1e-3)");
  });

  // 9. Encode/decode round-trips random classical states.
  run("state encoding round-trips", [&] {
    struct Case {
      const char* name;
      std::vector<int> extents;
    };
    double worst = 0.0;
    for (const Case& c :
         {Case{"nnn-chain", {24}}, Case{"nn-chain", {24}},
          Case{"diatomic", {16}}, Case{"synthetic-2d", {6, 6}}}) {
      const Stencil st = stencil_preset(c.name);
      const MassModel mm = mass_model_of(st);
      const SiteSet sites = build_site_set(c.extents, Boundary::Fixed);
      const QOperator q(factorization_preset(c.name), sites);
      const HamiltonianOperator h(q, mm);
      for (int trial = 0; trial < 100; ++trial) {
        const ClassicalState cs = random_state(
            sites, st.block_size(), derive_seed(7, static_cast<std::uint64_t>(trial)));
        const DecodeResult back = decode_state(encode_state(cs, h), h);
        worst = std::max(worst, (back.state.u - cs.u).norm() / cs.u.norm());
        worst = std::max(worst, (back.state.v - cs.v).norm() / cs.v.norm());
      }
    }
    report(worst <= 1e-10, "state encoding round-trips",
           "worst rel error " + fmt(worst) + " (tol 1e-10)");
  });

  // 10. Coefficient-norm budget holds for every factorization in use:
  // the shipped presets, the band-recursion factor, and optimizer fits.
  run("coefficient-norm budget holds", [&] {
    bool all_ok = true;
    std::string detail;
    for (const char* name :
         {"nnn-chain", "nn-chain", "diatomic", "synthetic-2d"}) {
      const Stencil st = stencil_preset(name);
      const LaurentPolynomial p = LaurentPolynomial::from_stencil(st);
      const ParsevalReport rep =
          parseval_bound_check(p, factorization_preset(name),
                               mass_model_of(st), 128);
      all_ok = all_ok && rep.ok;
      if (!detail.empty()) detail += ", ";
      detail += std::string(name) + " " + fmt(rep.coeff_norm_sq_sum) + "<=" +
                fmt(rep.bound);
    }
    {
      const Stencil st = stencil_preset("diatomic");
      const LaurentPolynomial p = LaurentPolynomial::from_stencil(st);
      BauerOptions bopt;
      bopt.residual_tolerance = 1e-9;
      const ParsevalReport rep = parseval_bound_check(
          p, factorize_bauer_1d(p, bopt), mass_model_of(st), 128);
      all_ok = all_ok && rep.ok;
      detail += ", band " + fmt(rep.coeff_norm_sq_sum) + "<=" + fmt(rep.bound);
    }
    const MassModel unit{{1.0, 1.0}, 1};
    for (std::uint64_t i : {1, 2, 3}) {
      const LaurentPolynomial p = random_rank2_gram(derive_seed(424242, i));
      const SosResult r = factorize_sos(p, 2, 1, {});
      const ParsevalReport rep =
          parseval_bound_check(p, r.factorization, unit, 128);
      all_ok = all_ok && rep.ok;
      detail += ", fit" + std::to_string(i) + " " +
                fmt(rep.coeff_norm_sq_sum) + "<=" + fmt(rep.bound);
    }
    report(all_ok, "coefficient-norm budget holds", detail);
  });

  // 11. The ensemble run is deterministic and its burst spreads.
  run("ensemble run is deterministic and spreads", [&] {
    PresetOptions a;
    a.out_dir = (work / "ensemble-a").string();
    PresetOptions b;
    b.out_dir = (work / "ensemble-b").string();
    const PresetOutcome ra = run_experiment_preset("diatomic-ensemble", a);
    const PresetOutcome rb = run_experiment_preset("diatomic-ensemble", b);
    const bool identical =
        read_text_file(ra.files.at(0)) == read_text_file(rb.files.at(0));

    bool growing = true;
    double prev = -1.0;
    std::string moments;
    for (int t : {0, 10, 20, 30, 40}) {
      const double m2 = ra.metrics.at("second_moment_" + std::to_string(t));
      growing = growing && m2 > prev;
      prev = m2;
      if (!moments.empty()) moments += ", ";
      moments += fmt(m2);
    }
    report(identical && growing, "ensemble run is deterministic and spreads",
           std::string(identical ? "bytes identical" : "BYTES DIFFER") +
               "; second moments " + moments);
  });

  // 12. Scattering off a vacancy keeps its energy books balanced.
  run("vacancy scattering keeps the energy books", [&] {
    PresetOptions opts;
    opts.out_dir = (work / "vacancy").string();
    const PresetOutcome r = run_experiment_preset("vacancy-scatter", opts);
    const double nd = r.metrics.at("norm_drift");
    const double ed = r.metrics.at("energy_drift");
    const double closure = r.metrics.at("closure_max");
    const double rec = r.metrics.at("recovery_residual");
    const bool ok =
        nd <= 1e-8 && ed <= 1e-6 && closure <= 1e-6 && rec <= 1e-6;
    report(ok, "vacancy scattering keeps the energy books",
           "norm " + fmt(nd) + ", energy " + fmt(ed) + ", closure " +
               fmt(closure) + ", recovery " + fmt(rec));
  });

  std::printf("%d/%d checks passed\n", g_index - g_failures, g_index);
  return g_failures == 0 ? 0 : 1;
}
