#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "harmoniq/evolve.hpp"
#include "harmoniq/site_set.hpp"
#include "harmoniq/stencil.hpp"

namespace harmoniq {

// Packaged experiments runnable from the CLI (`preset run <name>`) and
// reused in-process by the acceptance suite.
//   nnn-wavepacket    : 1D next-nearest-neighbor chain, Gaussian packet,
//                       quantum evolution vs the classical integrator.
//   diatomic-ensemble : two-mass chain, random-velocity ensemble, per-atom
//                       mean kinetic energy profile over time.
//   vacancy-scatter   : 2D synthetic lattice with a masked square, packet
//                       scattering with an energy budget report.
//   factor-sweep      : rank/degree sweep table on a synthetic 2D instance.
struct PresetOptions {
  std::string out_dir = ".";
  std::uint64_t seed = 0;  // 0 -> preset default
  EvolutionMethod method = EvolutionMethod::Krylov;
  double dt = 0.0;         // 0 -> preset default
  int shots = 0;           // 0 -> exact observables
  bool oracle = false;     // also run the classical integrator and diff
};

struct PresetOutcome {
  std::vector<std::string> files;            // paths written
  std::map<std::string, double> metrics;     // named summary numbers
};

std::vector<std::string> experiment_preset_names();
PresetOutcome run_experiment_preset(const std::string& name,
                                    const PresetOptions& opts);

// Gaussian wave packet over a 1D chain of scalar displacements:
// u_j = exp(-(j-x0)^2 / (2 sigma^2)) cos(k0 j), v_j = -omega * u_j,
// omega the dispersion frequency at k0.
ClassicalState chain_wavepacket(const SiteSet& s, double x0, double sigma,
                                double k0, double omega);

// Per-realization engine seeds derived from one master seed by counter
// (splitmix64 of master xor counter), so ensembles are reproducible and
// realization-order independent.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter);

}  // namespace harmoniq
