#include "harmoniq/presets.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "harmoniq/classical.hpp"
#include "harmoniq/dynamical.hpp"
#include "harmoniq/errors.hpp"
#include "harmoniq/factorization.hpp"
#include "harmoniq/io.hpp"
#include "harmoniq/sos.hpp"
#include "harmoniq/version.hpp"

namespace harmoniq {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  std::uint64_t z = (master ^ counter) + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ClassicalState chain_wavepacket(const SiteSet& s, double x0, double sigma,
                                double k0, double omega) {
  if (s.dim != 1) throw InvalidInputError("wave packets here are 1D");
  ClassicalState cs;
  cs.u.resize(static_cast<Eigen::Index>(s.size()));
  for (std::size_t j = 0; j < s.sites.size(); ++j) {
    const double x = s.sites[j][0];
    cs.u[static_cast<Eigen::Index>(j)] =
        std::exp(-(x - x0) * (x - x0) / (2.0 * sigma * sigma)) *
        std::cos(k0 * x);
  }
  cs.v = -omega * cs.u;
  return cs;
}

std::vector<std::string> experiment_preset_names() {
  return {"nnn-wavepacket", "diatomic-ensemble", "vacancy-scatter",
          "factor-sweep"};
}

namespace {

std::string method_name(EvolutionMethod m) {
  return m == EvolutionMethod::Krylov ? "krylov" : "trotter";
}

std::string out_path(const PresetOptions& opts, const std::string& file) {
  std::filesystem::create_directories(opts.out_dir);
  return (std::filesystem::path(opts.out_dir) / file).string();
}

void stamp(CsvDocument& doc, const std::string& preset) {
  doc.meta("artifact_version", std::string(kArtifactVersion));
  doc.meta("preset", preset);
}

PresetOutcome run_nnn_wavepacket(const PresetOptions& opts) {
  const Stencil st = stencil_preset("nnn-chain");
  const MassModel mm = mass_model_of(st);
  const SiteSet sites = build_site_set({127}, Boundary::Fixed);
  const Factorization f = factorization_preset("nnn-chain");
  const QOperator q = assemble_Q(f, sites, &st);
  const HamiltonianOperator h(q, mm);
  const Eigen::SparseMatrix<double> d = assemble_D(st, sites);

  const double k0 = M_PI / 2.0;
  const double omega =
      std::sqrt(eval_dynamical_matrix(st, Eigen::VectorXd::Constant(1, k0))(0, 0)
                    .real());
  const double x0 = 127.0 / 4.0;
  const double sigma = 6.0;
  const ClassicalState cs0 = chain_wavepacket(sites, x0, sigma, k0, omega);
  const SchrodingerState psi0 = encode_state(cs0, h);

  EvolutionConfig cfg;
  cfg.method = opts.method;
  cfg.dt = opts.dt > 0.0 ? opts.dt : 0.02;
  const double t_final = 60.0;
  const double stride = 5.0;

  CsvDocument doc;
  stamp(doc, "nnn-wavepacket");
  doc.meta("stencil", std::string("nnn-chain"));
  doc.meta("extents", std::string("127"));
  doc.meta("boundary", std::string("fixed"));
  doc.meta("method", method_name(cfg.method));
  if (cfg.method == EvolutionMethod::Trotter) doc.meta("dt", cfg.dt);
  doc.meta("x0", x0);
  doc.meta("sigma", sigma);
  doc.meta("k0", k0);
  doc.meta("omega", omega);
  doc.meta("energy", psi0.energy);
  doc.meta("t_final", t_final);
  doc.header(snapshot_header(1));

  PresetOutcome out;
  double max_recovery = 0.0;
  double max_leak = 0.0;
  SchrodingerState psi = psi0;
  DecodeResult dec = decode_state(psi, h, 1e-6, false);
  append_snapshot_rows(doc, 0.0, dec.state.u, dec.state.v, 1);
  for (double t = stride; t <= t_final + 1e-9; t += stride) {
    psi = evolve(psi, h, stride, cfg);
    dec = decode_state(psi, h, 1e-6, false);
    max_recovery = std::max(max_recovery, dec.recovery_residual);
    max_leak = std::max(max_leak, dec.imag_leakage);
    append_snapshot_rows(doc, psi.t, dec.state.u, dec.state.v, 1);
  }
  const std::string qpath = out_path(opts, "nnn-wavepacket-quantum.csv");
  doc.write(qpath);
  out.files.push_back(qpath);

  out.metrics["energy"] = psi0.energy;
  out.metrics["norm_drift"] = std::abs(psi.norm() - 1.0);
  const ClassicalState decoded_final = dec.state;
  out.metrics["energy_drift"] =
      std::abs(total_energy(decoded_final, d, mm.dof_masses(
                                static_cast<int>(sites.size()))) /
                   psi0.energy -
               1.0);
  out.metrics["recovery_residual_max"] = max_recovery;
  out.metrics["imag_leakage_max"] = max_leak;

  if (opts.oracle) {
    VerletConfig vc;
    vc.dt = 5e-4;
    vc.steps = static_cast<long>(std::lround(t_final / vc.dt));
    vc.snapshot_stride = static_cast<long>(std::lround(stride / vc.dt));
    vc.debye_frequency = debye_frequency(st, mm);
    const ClassicalTrajectory traj =
        verlet_evolve(cs0, d, mm.dof_masses(static_cast<int>(sites.size())),
                      vc);

    CsvDocument cdoc;
    stamp(cdoc, "nnn-wavepacket");
    cdoc.meta("integrator", std::string("velocity-verlet"));
    cdoc.meta("dt", vc.dt);
    cdoc.meta("t_final", t_final);
    cdoc.header(snapshot_header(1));
    for (const ClassicalState& snap : traj.snapshots)
      append_snapshot_rows(cdoc, snap.t, snap.u, snap.v, 1);
    const std::string cpath = out_path(opts, "nnn-wavepacket-classical.csv");
    cdoc.write(cpath);
    out.files.push_back(cpath);

    const ClassicalState& ref = traj.snapshots.back();
    out.metrics["velocity_rel_l2"] =
        (decoded_final.v - ref.v).norm() / ref.v.norm();
    out.metrics["displacement_rel_l2"] =
        (decoded_final.u - ref.u).norm() / ref.u.norm();
  }
  return out;
}

PresetOutcome run_diatomic_ensemble(const PresetOptions& opts) {
  const Stencil st = stencil_preset("diatomic");
  const MassModel mm = mass_model_of(st);
  const int n_cells = 64;
  const SiteSet sites = build_site_set({n_cells}, Boundary::Fixed);
  const Factorization f = factorization_preset("diatomic");
  const QOperator q = assemble_Q(f, sites, &st);
  const HamiltonianOperator h(q, mm);

  const std::uint64_t master = opts.seed ? opts.seed : 2002;
  const int realizations = 1024;
  const double sigma = 6.0;
  const double center = (n_cells - 1) / 2.0;
  const std::vector<double> times = {0.0, 10.0, 20.0, 30.0, 40.0};
  const int n_atoms = n_cells * st.atoms_per_cell;

  EvolutionConfig cfg;
  cfg.method = opts.method;
  cfg.dt = opts.dt > 0.0 ? opts.dt : 0.02;

  Eigen::MatrixXd mean_ke = Eigen::MatrixXd::Zero(
      n_atoms, static_cast<Eigen::Index>(times.size()));
  double mean_energy = 0.0;

  for (int real = 0; real < realizations; ++real) {
    std::mt19937_64 rng(derive_seed(master, static_cast<std::uint64_t>(real)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    ClassicalState cs;
    cs.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sites.size()) * 2);
    cs.v.resize(cs.u.size());
    for (int cell = 0; cell < n_cells; ++cell) {
      const double env =
          std::exp(-(cell - center) * (cell - center) / (2.0 * sigma * sigma));
      for (int c = 0; c < 2; ++c) cs.v[cell * 2 + c] = env * gauss(rng);
    }
    SchrodingerState psi = encode_state(cs, h);
    mean_energy += psi.energy;

    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      if (ti > 0) psi = evolve(psi, h, times[ti] - times[ti - 1], cfg);
      Eigen::VectorXd ke = local_kinetic_energy(psi, h, st.atoms_per_cell);
      if (opts.shots > 0) {
        // Sampled estimate: shots draws from the normalized kinetic
        // distribution, rescaled to the kinetic total.
        const double total = ke.sum();
        if (total > 0.0) {
          std::discrete_distribution<int> pick(ke.data(),
                                               ke.data() + ke.size());
          Eigen::VectorXd counts = Eigen::VectorXd::Zero(ke.size());
          for (int shot = 0; shot < opts.shots; ++shot) counts[pick(rng)] += 1;
          ke = counts * (total / opts.shots);
        }
      }
      mean_ke.col(static_cast<Eigen::Index>(ti)) += ke;
    }
  }
  mean_ke /= realizations;
  mean_energy /= realizations;

  CsvDocument doc;
  stamp(doc, "diatomic-ensemble");
  doc.meta("stencil", std::string("diatomic"));
  doc.meta("cells", std::uint64_t(n_cells));
  doc.meta("boundary", std::string("fixed"));
  doc.meta("realizations", std::uint64_t(realizations));
  doc.meta("seed", master);
  doc.meta("sigma", sigma);
  doc.meta("method", method_name(cfg.method));
  if (cfg.method == EvolutionMethod::Trotter) doc.meta("dt", cfg.dt);
  if (opts.shots > 0) doc.meta("shots", std::uint64_t(opts.shots));
  doc.meta("mean_energy", mean_energy);
  doc.header({"time", "atom", "mean_kinetic"});

  PresetOutcome out;
  for (std::size_t ti = 0; ti < times.size(); ++ti)
    for (int a = 0; a < n_atoms; ++a)
      doc.row({format_double(times[ti]), std::to_string(a),
               format_double(mean_ke(a, static_cast<Eigen::Index>(ti)))});
  const std::string path = out_path(opts, "diatomic-ensemble-profile.csv");
  doc.write(path);
  out.files.push_back(path);

  // Spatial second moment of the kinetic profile per snapshot; the ensemble
  // burst spreads, so these grow with time.
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const auto col = mean_ke.col(static_cast<Eigen::Index>(ti));
    double wsum = 0.0, mu = 0.0;
    for (int a = 0; a < n_atoms; ++a) {
      const double x = a / 2 + 0.5 * (a % 2);
      wsum += col[a];
      mu += col[a] * x;
    }
    mu /= wsum;
    double m2 = 0.0;
    for (int a = 0; a < n_atoms; ++a) {
      const double x = a / 2 + 0.5 * (a % 2);
      m2 += col[a] * (x - mu) * (x - mu);
    }
    out.metrics["second_moment_" + std::to_string(static_cast<int>(times[ti]))] =
        m2 / wsum;
  }
  out.metrics["mean_energy"] = mean_energy;
  return out;
}

PresetOutcome run_vacancy_scatter(const PresetOptions& opts) {
  const Stencil st = stencil_preset("synthetic-2d");
  const MassModel mm = mass_model_of(st);

  std::vector<Offset> mask;
  for (int x = 40; x <= 43; ++x)
    for (int y = 6; y <= 9; ++y) mask.push_back({x, y});
  const SiteSet sites = build_site_set({64, 16}, Boundary::Fixed, mask);
  const Factorization f = factorization_preset("synthetic-2d");
  const QOperator q = assemble_Q(f, sites, &st);
  const HamiltonianOperator h(q, mm);
  const Eigen::SparseMatrix<double> d = assemble_D(st, sites);
  const Eigen::VectorXd masses =
      mm.dof_masses(static_cast<int>(sites.size()));

  // Traveling packet along x in the stiff branch of the x-bond Gram block.
  const double kx = M_PI / 2.0;
  const Eigen::MatrixXd bond = f.block_or_zero(0, {1, 0});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bond.transpose() * bond);
  const Eigen::VectorXd pol = es.eigenvectors().col(1);
  const double omega =
      2.0 * std::sin(kx / 2.0) * std::sqrt(es.eigenvalues()[1]);
  const double x0 = 20.0, y0 = 8.0, sigma = 3.0;

  ClassicalState cs;
  cs.u.resize(static_cast<Eigen::Index>(sites.size()) * 2);
  cs.v.resize(cs.u.size());
  for (std::size_t j = 0; j < sites.sites.size(); ++j) {
    const double x = sites.sites[j][0];
    const double y = sites.sites[j][1];
    const double env = std::exp(
        -((x - x0) * (x - x0) + (y - y0) * (y - y0)) / (2.0 * sigma * sigma));
    cs.u.segment(static_cast<Eigen::Index>(j) * 2, 2) =
        env * std::cos(kx * x) * pol;
    cs.v.segment(static_cast<Eigen::Index>(j) * 2, 2) =
        omega * env * std::sin(kx * x) * pol;
  }
  const SchrodingerState psi0 = encode_state(cs, h);

  EvolutionConfig cfg;
  cfg.method = opts.method;
  cfg.dt = opts.dt > 0.0 ? opts.dt : 0.02;
  const double t_final = 32.0;
  const double stride = 8.0;

  CsvDocument budget;
  stamp(budget, "vacancy-scatter");
  budget.meta("stencil", std::string("synthetic-2d"));
  budget.meta("extents", std::string("64x16"));
  budget.meta("vacancy", std::string("x 40..43, y 6..9"));
  budget.meta("boundary", std::string("fixed"));
  budget.meta("method", method_name(cfg.method));
  if (cfg.method == EvolutionMethod::Trotter) budget.meta("dt", cfg.dt);
  budget.meta("kx", kx);
  budget.meta("omega", omega);
  budget.meta("energy", psi0.energy);
  budget.header({"time", "norm", "ke_reflected", "ke_vacancy_band",
                 "ke_transmitted", "ke_total", "pe_total", "closure"});

  PresetOutcome out;
  double worst_closure = 0.0;
  SchrodingerState psi = psi0;
  for (double t = 0.0; t <= t_final + 1e-9; t += stride) {
    if (t > 0.0) psi = evolve(psi, h, stride, cfg);
    const Eigen::VectorXd ke = local_kinetic_energy(psi, h, 1);
    double left = 0.0, band = 0.0, right = 0.0;
    for (std::size_t j = 0; j < sites.sites.size(); ++j) {
      const int x = sites.sites[j][0];
      const double v = ke[static_cast<Eigen::Index>(j)];
      if (x < 40)
        left += v;
      else if (x <= 43)
        band += v;
      else
        right += v;
    }
    const double ke_total = left + band + right;
    const double pe_total = psi.energy * psi.bottom.squaredNorm();
    const double closure =
        std::abs(ke_total + pe_total - psi.energy) / psi.energy;
    worst_closure = std::max(worst_closure, closure);
    budget.row_values({psi.t, psi.norm(), left, band, right, ke_total,
                       pe_total, closure});
    if (t + stride > t_final + 1e-9) {
      out.metrics["ke_transmitted_fraction"] = right / psi.energy;
      out.metrics["ke_reflected_fraction"] = left / psi.energy;
    }
  }
  const std::string bpath = out_path(opts, "vacancy-scatter-budget.csv");
  budget.write(bpath);
  out.files.push_back(bpath);

  const DecodeResult dec = decode_state(psi, h, 1e-6, false);
  CsvDocument fin;
  stamp(fin, "vacancy-scatter");
  fin.meta("time", psi.t);
  fin.header(snapshot_header(2));
  append_snapshot_rows(fin, psi.t, dec.state.u, dec.state.v, 2);
  const std::string fpath = out_path(opts, "vacancy-scatter-final.csv");
  fin.write(fpath);
  out.files.push_back(fpath);

  out.metrics["energy"] = psi0.energy;
  out.metrics["norm_drift"] = std::abs(psi.norm() - 1.0);
  out.metrics["energy_drift"] =
      std::abs(total_energy(dec.state, d, masses) / psi0.energy - 1.0);
  out.metrics["closure_max"] = worst_closure;
  out.metrics["recovery_residual"] = dec.recovery_residual;
  return out;
}

PresetOutcome run_factor_sweep(const PresetOptions& opts) {
  const Stencil st = stencil_preset("synthetic-2d");
  const LaurentPolynomial p = LaurentPolynomial::from_stencil(st);
  const std::uint64_t master = opts.seed ? opts.seed : 4004;

  CsvDocument doc;
  stamp(doc, "factor-sweep");
  doc.meta("stencil", std::string("synthetic-2d"));
  doc.meta("seed", master);
  doc.header({"rank", "degree", "residual_coeff", "residual_torus",
              "converged", "iterations", "restarts", "seed"});

  PresetOutcome out;
  double best = std::numeric_limits<double>::infinity();
  for (int rank = 1; rank <= 3; ++rank)
    for (int degree = 1; degree <= 2; ++degree) {
      SosOptions so;
      so.random_seed =
          derive_seed(master, static_cast<std::uint64_t>(rank * 10 + degree));
      const SosResult res = factorize_sos(p, rank, degree, so);
      doc.row({std::to_string(rank), std::to_string(degree),
               format_double(res.factorization.residual_coeff),
               format_double(res.factorization.residual_torus),
               res.status == SosStatus::Converged ? "yes" : "no",
               std::to_string(res.iterations),
               std::to_string(res.restarts_used),
               std::to_string(res.seed_used)});
      best = std::min(best, res.factorization.residual_coeff);
    }
  const std::string path = out_path(opts, "factor-sweep-table.csv");
  doc.write(path);
  out.files.push_back(path);
  out.metrics["best_residual"] = best;
  return out;
}

}  // namespace

PresetOutcome run_experiment_preset(const std::string& name,
                                    const PresetOptions& opts) {
  if (name == "nnn-wavepacket") return run_nnn_wavepacket(opts);
  if (name == "diatomic-ensemble") return run_diatomic_ensemble(opts);
  if (name == "vacancy-scatter") return run_vacancy_scatter(opts);
  if (name == "factor-sweep") return run_factor_sweep(opts);
  throw InvalidInputError("unknown experiment preset: " + name);
}

}  // namespace harmoniq
