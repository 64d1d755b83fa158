#pragma once

#include "harmoniq/schrodinger.hpp"

namespace harmoniq {

enum class EvolutionMethod { Krylov, Trotter };

struct EvolutionConfig {
  EvolutionMethod method = EvolutionMethod::Krylov;
  double dt = 0.05;        // Trotter step (Krylov steps adaptively)
  int krylov_dim = 32;     // >= 4
  double tolerance = 1e-9; // per-step subspace residual target
  int trotter_order = 2;   // 1 or 2
};

// Lanczos propagator for psi(t+tau) = exp(-i tau H) psi(t): builds a Krylov
// basis per step, exponentiates the tridiagonal projection, and adapts the
// step until the standard subspace residual estimate meets the tolerance.
SchrodingerState evolve_krylov(const SchrodingerState& psi,
                               const HamiltonianOperator& h, double T,
                               const EvolutionConfig& cfg);

// Splitting into per-(factor, offset) Hermitian terms. Each term pairs every
// domain site with one shifted codomain site and acts as the same 2m x 2m
// rotation on all pairs, so its exponential is exact and cheap. Order 1 and
// 2 (Strang) compositions.
SchrodingerState evolve_trotter(const SchrodingerState& psi,
                                const HamiltonianOperator& h, double T,
                                const EvolutionConfig& cfg);

SchrodingerState evolve(const SchrodingerState& psi,
                        const HamiltonianOperator& h, double T,
                        const EvolutionConfig& cfg);

}  // namespace harmoniq
