#include "harmoniq/evolve.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <vector>

#include "harmoniq/errors.hpp"

namespace harmoniq {

namespace {

using Complex = std::complex<double>;

// exp(-i tau T) e_0 for a real symmetric T (the Lanczos projection).
Eigen::VectorXcd expm_tridiag_e0(const Eigen::MatrixXd& t, double tau) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  const Eigen::VectorXd phases = es.eigenvalues() * tau;
  Eigen::VectorXcd diag(phases.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    diag[i] = std::polar(1.0, -phases[i]);
  const Eigen::VectorXd first_row = es.eigenvectors().row(0);
  return es.eigenvectors().cast<Complex>() *
         diag.cwiseProduct(first_row.cast<Complex>());
}

}  // namespace

SchrodingerState evolve_krylov(const SchrodingerState& psi,
                               const HamiltonianOperator& h, double T,
                               const EvolutionConfig& cfg) {
  if (cfg.krylov_dim < 4) throw InvalidInputError("krylov dimension < 4");
  if (T < 0.0) throw InvalidInputError("evolution time must be >= 0");
  Eigen::VectorXcd state = psi.concat();
  if (state.size() != h.dim())
    throw InvalidInputError("wavefunction does not match the operator");
  if (T == 0.0) return psi;

  const Eigen::Index n = state.size();
  const int kmax =
      static_cast<int>(std::min<Eigen::Index>(cfg.krylov_dim, n));
  const double t_end = psi.t + T;
  double remaining = T;
  double tau = remaining;

  while (remaining > 1e-12 * std::max(1.0, T)) {
    const double norm = state.norm();
    if (norm == 0.0) throw InvalidInputError("cannot evolve the zero state");

    // One Lanczos basis per accepted step; tau adaptation below reuses it,
    // since the basis does not depend on the step size.
    Eigen::MatrixXcd basis(n, kmax + 1);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(kmax);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(kmax);
    basis.col(0) = state / norm;
    int built = 0;
    bool invariant = false;
    double scale = 0.0;
    for (int j = 0; j < kmax; ++j) {
      Eigen::VectorXcd w = h.apply(basis.col(j));
      alpha[j] = basis.col(j).dot(w).real();
      w -= alpha[j] * basis.col(j);
      if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
      // Full reorthogonalization keeps the basis orthonormal to round-off,
      // which is what preserves the norm over long runs.
      for (int i = 0; i <= j; ++i) w -= basis.col(i).dot(w) * basis.col(i);
      beta[j] = w.norm();
      scale = std::max({scale, std::abs(alpha[j]), beta[j]});
      built = j + 1;
      if (beta[j] <= 1e-13 * std::max(1.0, scale)) {
        invariant = true;  // the subspace is exactly H-invariant
        break;
      }
      basis.col(j + 1) = w / beta[j];
    }

    Eigen::MatrixXd tk = Eigen::MatrixXd::Zero(built, built);
    for (int j = 0; j < built; ++j) {
      tk(j, j) = alpha[j];
      if (j + 1 < built) {
        tk(j, j + 1) = beta[j];
        tk(j + 1, j) = beta[j];
      }
    }

    tau = std::min(tau, remaining);
    Eigen::VectorXcd y;
    double err = 0.0;
    for (;;) {
      y = expm_tridiag_e0(tk, tau);
      err = invariant ? 0.0 : beta[built - 1] * std::abs(y[built - 1]);
      if (err <= cfg.tolerance) break;
      tau *= 0.5;
      if (tau < 1e-12 * std::max(1.0, T))
        throw ConvergenceError(
            "krylov step size collapsed; raise the subspace dimension or the "
            "tolerance");
    }

    state = norm * (basis.leftCols(built) * y);
    remaining -= tau;
    if (err < 0.01 * cfg.tolerance) tau *= 2.0;
  }

  SchrodingerState out =
      SchrodingerState::split(state, h.top_size(), psi.energy, t_end);
  return out;
}

namespace {

// One splitting term: factor s, offset alpha. Couples top block at each
// domain site k with the bottom block of factor s at site k + alpha, the
// same 2m x 2m generator everywhere (the per-cell masses repeat), so one
// eigendecomposition serves every site.
struct SplitTerm {
  int s = 0;
  std::vector<int> target;  // codomain site index per domain site
  Eigen::MatrixXd coupling;  // C = Q^(s)_alpha * M^{-1/2} (cell diagonal)
};

std::vector<SplitTerm> build_terms(const HamiltonianOperator& h) {
  const QOperator& q = h.q();
  const Factorization& f = q.factorization();
  const SiteSet& domain = q.domain();
  const SiteSet& codomain = q.codomain_sites();
  const int m = f.block_size;
  const Eigen::VectorXd inv_cell = h.inv_sqrt_mass().head(m);

  std::vector<SplitTerm> terms;
  for (int s = 0; s < f.rank; ++s)
    for (const auto& [off, blk] : f.factors[static_cast<std::size_t>(s)]) {
      if (blk.norm() == 0.0) continue;
      SplitTerm term;
      term.s = s;
      term.coupling = blk * inv_cell.asDiagonal();
      term.target.resize(domain.sites.size());
      for (std::size_t k = 0; k < domain.sites.size(); ++k) {
        Offset t = add(domain.sites[k], off);
        if (domain.boundary == Boundary::Periodic) t = codomain.wrap(t);
        const int idx = codomain.index_of(t);
        if (idx < 0)
          throw VerificationError("split term scatters outside the codomain");
        term.target[k] = idx;
      }
      terms.push_back(std::move(term));
    }
  return terms;
}

// exp(-i tau G) for G = -[[0, C^T], [C, 0]].
Eigen::MatrixXcd term_rotation(const Eigen::MatrixXd& c, double tau) {
  const int m = static_cast<int>(c.rows());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  g.topRightCorner(m, m) = -c.transpose();
  g.bottomLeftCorner(m, m) = -c;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  Eigen::VectorXcd diag(2 * m);
  for (int i = 0; i < 2 * m; ++i)
    diag[i] = std::polar(1.0, -tau * es.eigenvalues()[i]);
  return es.eigenvectors().cast<Complex>() * diag.asDiagonal() *
         es.eigenvectors().transpose().cast<Complex>();
}

void apply_term(const SplitTerm& term, const Eigen::MatrixXcd& rot, int m,
                Eigen::Index csites, Eigen::VectorXcd& top,
                Eigen::VectorXcd& bottom) {
  Eigen::VectorXcd z(2 * m);
  for (std::size_t k = 0; k < term.target.size(); ++k) {
    const Eigen::Index toff = static_cast<Eigen::Index>(k) * m;
    const Eigen::Index boff =
        (static_cast<Eigen::Index>(term.s) * csites + term.target[k]) * m;
    z.head(m) = top.segment(toff, m);
    z.tail(m) = bottom.segment(boff, m);
    z = rot * z;
    top.segment(toff, m) = z.head(m);
    bottom.segment(boff, m) = z.tail(m);
  }
}

}  // namespace

SchrodingerState evolve_trotter(const SchrodingerState& psi,
                                const HamiltonianOperator& h, double T,
                                const EvolutionConfig& cfg) {
  if (cfg.dt <= 0.0) throw InvalidInputError("trotter needs dt > 0");
  if (cfg.trotter_order != 1 && cfg.trotter_order != 2)
    throw InvalidInputError("trotter order must be 1 or 2");
  if (T < 0.0) throw InvalidInputError("evolution time must be >= 0");
  if (psi.top.size() != h.top_size() || psi.bottom.size() != h.bottom_size())
    throw InvalidInputError("wavefunction does not match the operator");
  if (T == 0.0) return psi;

  const long steps = std::max<long>(1, std::lround(T / cfg.dt));
  const double dt = T / static_cast<double>(steps);
  const int m = h.q().factorization().block_size;
  const Eigen::Index csites =
      static_cast<Eigen::Index>(h.q().codomain_sites().size());

  const std::vector<SplitTerm> terms = build_terms(h);
  const double sub = cfg.trotter_order == 2 ? 0.5 * dt : dt;
  std::vector<Eigen::MatrixXcd> rotations;
  rotations.reserve(terms.size());
  for (const SplitTerm& t : terms)
    rotations.push_back(term_rotation(t.coupling, sub));

  Eigen::VectorXcd top = psi.top;
  Eigen::VectorXcd bottom = psi.bottom;
  for (long step = 0; step < steps; ++step) {
    for (std::size_t i = 0; i < terms.size(); ++i)
      apply_term(terms[i], rotations[i], m, csites, top, bottom);
    if (cfg.trotter_order == 2)
      for (std::size_t i = terms.size(); i-- > 0;)
        apply_term(terms[i], rotations[i], m, csites, top, bottom);
  }

  SchrodingerState out;
  out.top = std::move(top);
  out.bottom = std::move(bottom);
  out.energy = psi.energy;
  out.t = psi.t + T;
  return out;
}

SchrodingerState evolve(const SchrodingerState& psi,
                        const HamiltonianOperator& h, double T,
                        const EvolutionConfig& cfg) {
  return cfg.method == EvolutionMethod::Krylov
             ? evolve_krylov(psi, h, T, cfg)
             : evolve_trotter(psi, h, T, cfg);
}

}  // namespace harmoniq
