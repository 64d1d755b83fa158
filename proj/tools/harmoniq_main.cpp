#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
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
#include "harmoniq/version.hpp"

namespace {

using namespace harmoniq;

// A stencil argument is a file path, a path missing its .json suffix, or a
// builtin preset name.
Stencil resolve_stencil(const std::string& arg) {
  namespace fs = std::filesystem;
  if (fs::exists(arg)) return load_stencil_file(arg);
  if (fs::exists(arg + ".json")) return load_stencil_file(arg + ".json");
  if (is_stencil_preset(arg)) return stencil_preset(arg);
  throw InvalidInputError("no stencil file or preset named '" + arg + "'");
}

std::vector<int> parse_extents(const std::string& text, int dim) {
  std::vector<int> out;
  std::string cur;
  for (char ch : text + ",") {
    if (ch == ',' || ch == 'x') {
      if (!cur.empty()) out.push_back(std::stoi(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (static_cast<int>(out.size()) == 1 && dim > 1)
    out.assign(static_cast<std::size_t>(dim), out[0]);
  if (static_cast<int>(out.size()) != dim)
    throw InvalidInputError("extents '" + text + "' do not match dimension " +
                            std::to_string(dim));
  return out;
}

Boundary parse_boundary(const std::string& text) {
  if (text == "fixed") return Boundary::Fixed;
  if (text == "periodic") return Boundary::Periodic;
  throw InvalidInputError("boundary must be fixed or periodic");
}

EvolutionMethod parse_method(const std::string& text) {
  if (text == "krylov") return EvolutionMethod::Krylov;
  if (text == "trotter") return EvolutionMethod::Trotter;
  throw InvalidInputError("method must be krylov or trotter");
}

void print_certificate(const Factorization& f) {
  std::cout << "method              : " << f.method << "\n";
  std::cout << "rank, degree        : " << f.rank << ", " << f.degree << "\n";
  std::cout << "coefficient residual: " << format_double(f.residual_coeff)
            << "\n";
  std::cout << "torus residual      : " << format_double(f.residual_torus)
            << "\n";
  std::cout << "recovery capable    : " << (f.recovery_capable ? "yes" : "no")
            << "\n";
}

Factorization factorize_auto(const Stencil& st, const std::string& algorithm,
                             int rank, int degree, std::uint64_t seed) {
  const LaurentPolynomial p = LaurentPolynomial::from_stencil(st);
  std::string algo = algorithm;
  if (algo == "auto") {
    if (st.dim == 1 && p.block_size == 1)
      algo = "roots";
    else if (st.dim == 1)
      algo = "bauer";
    else
      algo = "sos";
  }
  if (algo == "roots") {
    if (st.dim != 1 || p.block_size != 1)
      throw InvalidInputError("root splitting is for scalar 1D symbols");
    return factorize_scalar_1d(p);
  }
  if (algo == "bauer") {
    if (st.dim != 1)
      throw InvalidInputError("the banded Cholesky route is 1D only");
    return factorize_bauer_1d(p);
  }
  if (algo == "sos") {
    SosOptions so;
    so.random_seed = seed ? seed : 1;
    const int r = rank > 0 ? rank : p.block_size;
    const int q = degree > 0 ? degree : p.degree;
    SosResult res = factorize_sos(p, r, q, so);
    if (res.status != SosStatus::Converged)
      throw ConvergenceError(
          "optimizer did not reach the residual tolerance; best residual " +
          format_double(res.factorization.residual_coeff) +
          " (try a larger rank/degree or another seed)");
    return res.factorization;
  }
  throw InvalidInputError("algorithm must be auto, roots, bauer, or sos");
}

int run_factorize(const std::string& stencil_arg, const std::string& algorithm,
                  int rank, int degree, std::uint64_t seed, int grid,
                  const std::string& out) {
  const Stencil st = resolve_stencil(stencil_arg);
  Factorization f = factorize_auto(st, algorithm, rank, degree, seed);
  const LaurentPolynomial p = LaurentPolynomial::from_stencil(st);
  certify(f, p, std::max(grid, 2 * f.degree + 2));
  print_certificate(f);

  const ParsevalReport rep =
      parseval_bound_check(p, f, mass_model_of(st),
                           std::max(grid, 2 * f.degree + 2));
  std::cout << "parseval            : sum |Q|_F^2 = "
            << format_double(rep.coeff_norm_sq_sum)
            << " <= " << format_double(rep.bound)
            << (rep.ok ? " (ok)" : " (VIOLATED)") << "\n";
  if (!rep.ok)
    throw VerificationError("factor coefficient mass exceeds the torus bound");
  if (!out.empty()) {
    write_text_file(out, factorization_to_json(f));
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

int run_verify(const std::string& stencil_arg, const std::string& factor_path,
               int grid, const std::string& extents_text, double tol) {
  const Stencil st = resolve_stencil(stencil_arg);
  const LaurentPolynomial p = LaurentPolynomial::from_stencil(st);
  Factorization f = std::filesystem::exists(factor_path)
                        ? load_factorization_file(factor_path)
                        : factorization_preset(factor_path);
  if (f.block_size != p.block_size || f.dim != p.dim)
    throw InvalidInputError("factorization shape does not match the stencil");
  const int g = std::max(grid, 2 * std::max(f.degree, p.degree) + 2);
  certify(f, p, g);
  print_certificate(f);

  const ParsevalReport rep = parseval_bound_check(p, f, mass_model_of(st), g);
  std::cout << "parseval            : sum |Q|_F^2 = "
            << format_double(rep.coeff_norm_sq_sum)
            << " <= " << format_double(rep.bound)
            << (rep.ok ? " (ok)" : " (VIOLATED)") << "\n";
  std::cout << "alpha sum (reported): " << format_double(rep.alpha_sum)
            << " vs budget " << format_double(rep.alpha_budget) << "\n";

  const std::vector<int> extents =
      parse_extents(extents_text.empty() ? std::to_string(2 * f.degree + 4)
                                         : extents_text,
                    st.dim);
  for (Boundary b : {Boundary::Fixed, Boundary::Periodic}) {
    const SiteSet sites = build_site_set(extents, b);
    const QOperator q = assemble_Q(f, sites);
    const double resid = verify_QTQ(q, assemble_D(st, sites));
    std::cout << "lattice check ("
              << (b == Boundary::Fixed ? "fixed" : "periodic")
              << "): |Q^T Q - D| / |D| = " << format_double(resid) << "\n";
    if (resid > tol)
      throw VerificationError("lattice residual exceeds tolerance " +
                              format_double(tol));
  }
  if (f.residual_torus > tol)
    throw VerificationError("torus residual exceeds tolerance " +
                            format_double(tol));
  if (!rep.ok)
    throw VerificationError("factor coefficient mass exceeds the torus bound");
  std::cout << "verified\n";
  return 0;
}

int run_dispersion(const std::string& stencil_arg, int grid,
                   const std::string& out) {
  const Stencil st = resolve_stencil(stencil_arg);
  const MassModel mm = mass_model_of(st);
  const int g = grid > 0 ? grid : default_scan_grid(st.dim);
  const DispersionScan scan = dispersion_scan(st, mm, g);
  const double debye = debye_frequency(st, mm, g);
  std::cout << "grid points         : " << scan.samples.size() << "\n";
  std::cout << "min omega^2         : " << format_double(scan.min_eigenvalue)
            << "\n";
  std::cout << "debye frequency     : " << format_double(debye) << "\n";
  std::cout << "verlet stability dt : " << format_double(2.0 / debye) << "\n";

  if (!out.empty()) {
    CsvDocument doc;
    doc.meta("artifact_version", std::string(kArtifactVersion));
    doc.meta("grid", std::uint64_t(g));
    doc.meta("debye", debye);
    std::vector<std::string> cols;
    for (int a = 0; a < st.dim; ++a)
      cols.push_back("theta_" + std::to_string(a));
    for (int b = 0; b < st.block_size(); ++b)
      cols.push_back("omega2_" + std::to_string(b));
    doc.header(cols);
    for (const DispersionSample& s : scan.samples) {
      std::vector<double> vals;
      for (int a = 0; a < st.dim; ++a) vals.push_back(s.theta[a]);
      for (Eigen::Index b = 0; b < s.eigenvalues.size(); ++b)
        vals.push_back(s.eigenvalues[b]);
      doc.row_values(vals);
    }
    doc.write(out);
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

int run_simulate(const std::string& stencil_arg, const std::string& factor_arg,
                 const std::string& extents_text, const std::string& boundary,
                 double T, int snapshots, const std::string& method_text,
                 double dt, std::uint64_t seed, bool oracle, double oracle_dt,
                 const std::string& out_dir) {
  const Stencil st = resolve_stencil(stencil_arg);
  const LaurentPolynomial p = LaurentPolynomial::from_stencil(st);
  const MassModel mm = mass_model_of(st);

  Factorization f;
  if (factor_arg.empty()) {
    f = factorize_auto(st, "auto", 0, 0, seed);
  } else if (std::filesystem::exists(factor_arg)) {
    f = load_factorization_file(factor_arg);
  } else if (has_factorization_preset(factor_arg)) {
    f = factorization_preset(factor_arg);
  } else {
    throw InvalidInputError("no factorization file or preset named '" +
                            factor_arg + "'");
  }
  certify(f, p, std::max(64, 2 * std::max(f.degree, p.degree) + 2));

  const std::vector<int> extents = parse_extents(extents_text, st.dim);
  const SiteSet sites = build_site_set(extents, parse_boundary(boundary));
  const QOperator q(f, sites);
  const Eigen::SparseMatrix<double> d = assemble_D(st, sites);
  const double lattice_resid = verify_QTQ(q, d);
  std::cout << "lattice residual    : " << format_double(lattice_resid)
            << "\n";
  if (lattice_resid > 1e-6)
    throw VerificationError(
        "refusing to simulate: |Q^T Q - D| / |D| = " +
        format_double(lattice_resid) + " exceeds 1e-6");
  const HamiltonianOperator h(q, mm);
  const Eigen::VectorXd masses =
      mm.dof_masses(static_cast<int>(sites.size()));

  // Scalar chains get a wave packet; everything else a seeded velocity burst.
  ClassicalState cs0;
  if (st.dim == 1 && st.block_size() == 1) {
    const double k0 = M_PI / 2.0;
    const double omega = std::sqrt(
        eval_dynamical_matrix(st, Eigen::VectorXd::Constant(1, k0))(0, 0)
            .real());
    cs0 = chain_wavepacket(sites, extents[0] / 4.0,
                           std::max(2.0, extents[0] / 20.0), k0, omega);
  } else {
    std::mt19937_64 rng(seed ? seed : 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    cs0.u = Eigen::VectorXd::Zero(q.cols());
    cs0.v.resize(q.cols());
    for (Eigen::Index i = 0; i < cs0.v.size(); ++i) cs0.v[i] = gauss(rng);
  }

  EvolutionConfig cfg;
  cfg.method = parse_method(method_text);
  if (dt > 0.0) cfg.dt = dt;

  SchrodingerState psi = encode_state(cs0, h);
  const double e0 = psi.energy;
  std::cout << "energy              : " << format_double(e0) << "\n";

  CsvDocument doc;
  doc.meta("artifact_version", std::string(kArtifactVersion));
  doc.meta("stencil", stencil_arg);
  doc.meta("extents", extents_text);
  doc.meta("boundary", boundary);
  doc.meta("method", method_text);
  if (cfg.method == EvolutionMethod::Trotter) doc.meta("dt", cfg.dt);
  if (seed) doc.meta("seed", seed);
  doc.meta("t_final", T);
  doc.meta("energy", e0);
  doc.header(snapshot_header(st.block_size()));

  const int n_snap = std::max(1, snapshots);
  const double stride = T / n_snap;
  DecodeResult dec = decode_state(psi, h, 1e-6, false);
  append_snapshot_rows(doc, 0.0, dec.state.u, dec.state.v, st.block_size());
  for (int i = 1; i <= n_snap; ++i) {
    psi = evolve(psi, h, stride, cfg);
    dec = decode_state(psi, h, 1e-6, false);
    if (dec.recovery_residual > 1e-6)
      std::cerr << "warning: decoded bottom block left range(Q) by "
                << format_double(dec.recovery_residual) << " at t = "
                << format_double(psi.t) << "\n";
    append_snapshot_rows(doc, psi.t, dec.state.u, dec.state.v,
                         st.block_size());
  }
  std::filesystem::create_directories(out_dir);
  const std::string qpath =
      (std::filesystem::path(out_dir) / "sim-quantum.csv").string();
  doc.write(qpath);
  std::cout << "wrote " << qpath << "\n";
  std::cout << "norm drift          : "
            << format_double(std::abs(psi.norm() - 1.0)) << "\n";
  std::cout << "energy drift        : "
            << format_double(
                   std::abs(total_energy(dec.state, d, masses) / e0 - 1.0))
            << "\n";

  if (oracle) {
    VerletConfig vc;
    vc.dt = oracle_dt;
    vc.steps = static_cast<long>(std::lround(T / vc.dt));
    vc.snapshot_stride = std::max<long>(1, vc.steps / n_snap);
    vc.debye_frequency = debye_frequency(st, mm);
    const ClassicalTrajectory traj = verlet_evolve(cs0, d, masses, vc);
    CsvDocument cdoc;
    cdoc.meta("artifact_version", std::string(kArtifactVersion));
    cdoc.meta("integrator", std::string("velocity-verlet"));
    cdoc.meta("dt", vc.dt);
    cdoc.header(snapshot_header(st.block_size()));
    for (const ClassicalState& snap : traj.snapshots)
      append_snapshot_rows(cdoc, snap.t, snap.u, snap.v, st.block_size());
    const std::string cpath =
        (std::filesystem::path(out_dir) / "sim-classical.csv").string();
    cdoc.write(cpath);
    std::cout << "wrote " << cpath << "\n";
    const ClassicalState& ref = traj.snapshots.back();
    std::cout << "velocity rel l2     : "
              << format_double((dec.state.v - ref.v).norm() / ref.v.norm())
              << "\n";
    std::cout << "displacement rel l2 : "
              << format_double((dec.state.u - ref.u).norm() / ref.u.norm())
              << "\n";
  }
  return 0;
}

int run_preset_list() {
  std::cout << "stencil presets:\n";
  for (const std::string& n : stencil_preset_names()) {
    std::cout << "  " << n;
    if (has_factorization_preset(n)) std::cout << "  (closed-form factor)";
    std::cout << "\n";
  }
  std::cout << "experiment presets:\n";
  for (const std::string& n : experiment_preset_names())
    std::cout << "  " << n << "\n";
  return 0;
}

int run_preset_export(const std::string& name, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> names;
  if (name == "all")
    names = stencil_preset_names();
  else
    names.push_back(name);
  for (const std::string& n : names) {
    const Stencil st = stencil_preset(n);
    const std::string spath =
        (std::filesystem::path(out_dir) / (n + ".json")).string();
    write_text_file(spath, stencil_to_json(st));
    std::cout << "wrote " << spath << "\n";
    if (has_factorization_preset(n)) {
      const std::string fpath =
          (std::filesystem::path(out_dir) / (n + ".factor.json")).string();
      write_text_file(fpath, factorization_to_json(factorization_preset(n)));
      std::cout << "wrote " << fpath << "\n";
    }
  }
  return 0;
}

int run_preset_run(const std::string& name, const PresetOptions& opts) {
  const PresetOutcome outcome = run_experiment_preset(name, opts);
  for (const std::string& f : outcome.files) std::cout << "wrote " << f << "\n";
  for (const auto& [k, v] : outcome.metrics)
    std::cout << k << " = " << format_double(v) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "spectral factor toolkit: turn a harmonic lattice stencil into a "
      "one-sided factor, run the equivalent Schrodinger evolution, and check "
      "it against the classical integrator"};
  app.require_subcommand(1);

  std::string stencil_arg, factor_arg, algorithm = "auto", out, out_dir = ".";
  std::string extents_text, boundary = "fixed", method_text = "krylov";
  std::string preset_name;
  int rank = 0, degree = 0, grid = 0, snapshots = 12, shots = 0;
  double T = 10.0, dt = 0.0, tol = 1e-6, oracle_dt = 1e-3;
  std::uint64_t seed = 0;
  bool oracle = false;

  CLI::App* fac = app.add_subcommand(
      "factorize", "factor a stencil's symbol and certify the result");
  fac->add_option("stencil", stencil_arg, "stencil file or preset")
      ->required();
  fac->add_option("--algorithm", algorithm, "auto|roots|bauer|sos");
  fac->add_option("--r", rank, "factor count (sos)");
  fac->add_option("--q", degree, "factor degree (sos)");
  fac->add_option("--seed", seed, "optimizer seed (sos)");
  fac->add_option("--grid", grid, "certification grid per axis");
  fac->add_option("--out", out, "write the factorization JSON here");

  CLI::App* ver = app.add_subcommand(
      "verify", "re-certify a factorization against a stencil");
  ver->add_option("stencil", stencil_arg, "stencil file or preset")
      ->required();
  ver->add_option("factorization", factor_arg,
                  "factorization JSON or preset name")
      ->required();
  ver->add_option("--grid", grid, "certification grid per axis");
  ver->add_option("--L", extents_text, "lattice extents, e.g. 8 or 12,12");
  ver->add_option("--tol", tol, "acceptance tolerance");

  CLI::App* dis = app.add_subcommand(
      "dispersion", "scan the mass-weighted symbol spectrum");
  dis->add_option("stencil", stencil_arg, "stencil file or preset")
      ->required();
  dis->add_option("--grid", grid, "grid points per axis");
  dis->add_option("--out", out, "write the scan CSV here");

  CLI::App* sim = app.add_subcommand(
      "simulate", "evolve the encoded wavefunction on a finite lattice");
  sim->add_option("stencil", stencil_arg, "stencil file or preset")
      ->required();
  sim->add_option("--factor", factor_arg,
                  "factorization JSON or preset (default: factorize now)");
  sim->add_option("--L", extents_text, "lattice extents, e.g. 127 or 64,16")
      ->required();
  sim->add_option("--boundary", boundary, "fixed|periodic");
  sim->add_option("--T", T, "evolution time");
  sim->add_option("--snapshots", snapshots, "snapshot count");
  sim->add_option("--method", method_text, "krylov|trotter");
  sim->add_option("--dt", dt, "trotter step");
  sim->add_option("--seed", seed, "initial-condition seed");
  sim->add_flag("--oracle", oracle, "also run velocity verlet and diff");
  sim->add_option("--oracle-dt", oracle_dt, "verlet step");
  sim->add_option("--out", out_dir, "output directory");

  CLI::App* pre = app.add_subcommand("preset", "packaged lattices and runs");
  CLI::App* pre_list = pre->add_subcommand("list", "list presets");
  CLI::App* pre_export =
      pre->add_subcommand("export", "write preset stencil/factor JSON");
  pre_export->add_option("name", preset_name, "preset name or 'all'")
      ->required();
  pre_export->add_option("--out", out_dir, "output directory");
  CLI::App* pre_run = pre->add_subcommand("run", "run an experiment preset");
  pre_run->add_option("name", preset_name, "experiment preset")->required();
  pre_run->add_option("--out", out_dir, "output directory");
  pre_run->add_option("--seed", seed, "master seed (0 = preset default)");
  pre_run->add_option("--method", method_text, "krylov|trotter");
  pre_run->add_option("--dt", dt, "trotter step");
  pre_run->add_option("--shots", shots, "sampled observables (0 = exact)");
  pre_run->add_flag("--oracle", oracle, "also run the classical integrator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(fac))
      return run_factorize(stencil_arg, algorithm, rank, degree, seed, grid,
                           out);
    if (app.got_subcommand(ver))
      return run_verify(stencil_arg, factor_arg, grid, extents_text, tol);
    if (app.got_subcommand(dis)) return run_dispersion(stencil_arg, grid, out);
    if (app.got_subcommand(sim))
      return run_simulate(stencil_arg, factor_arg, extents_text, boundary, T,
                          snapshots, method_text, dt, seed, oracle, oracle_dt,
                          out_dir);
    if (app.got_subcommand(pre)) {
      if (pre->got_subcommand(pre_list)) return run_preset_list();
      if (pre->got_subcommand(pre_export))
        return run_preset_export(preset_name, out_dir);
      if (pre->got_subcommand(pre_run)) {
        PresetOptions opts;
        opts.out_dir = out_dir;
        opts.seed = seed;
        opts.method = parse_method(method_text);
        opts.dt = dt;
        opts.shots = shots;
        opts.oracle = oracle;
        return run_preset_run(preset_name, opts);
      }
      std::cerr << "error: preset needs a subcommand (list|export|run)\n";
      return 2;
    }
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const VerificationError& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
