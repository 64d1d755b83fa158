#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "harmoniq/offset.hpp"

namespace harmoniq {

// Force-constant stencil of a translation-invariant harmonic lattice:
// one block D_l per inter-cell offset l, acting on the m = atoms_per_cell*dim
// displacement components of a unit cell. The equations of motion are
//   M u''_j = -sum_l D_l u_{j+l},
// so the symmetry constraint is D_{-l} = D_l^T. The loader enforces it
// exactly and records the size of the correction it had to apply.
struct Stencil {
  int dim = 0;            // spatial dimension d
  int cutoff = 0;         // interaction range p (offsets live in [-p, p]^d)
  int atoms_per_cell = 1; // basis size
  std::vector<double> masses;            // one per basis atom, > 0
  std::map<Offset, Eigen::MatrixXd> blocks;  // offset -> m x m block

  double symmetrization_correction = 0.0;

  int block_size() const { return atoms_per_cell * dim; }
  const Eigen::MatrixXd* block(const Offset& l) const;
};

// Diagonal mass model: one mass per basis atom, replicated over the d
// displacement components of that atom (atom-major within a cell).
struct MassModel {
  std::vector<double> cell_masses;
  int dim = 1;

  int block_size() const { return static_cast<int>(cell_masses.size()) * dim; }

  // Per-component masses of one cell, length block_size().
  Eigen::VectorXd cell_diagonal() const;
  // Same, replicated over n_cells cells.
  Eigen::VectorXd dof_masses(std::size_t n_cells) const;
};

MassModel mass_model_of(const Stencil& st);

// Parse from a JSON document (see docs/stencil-format.md). Shipped preset
// names: nnn-chain, nnn-chain-altsign, nn-chain, diatomic, synthetic-2d.
Stencil load_stencil(const std::string& json_text);
Stencil load_stencil_file(const std::string& path);
std::string stencil_to_json(const Stencil& st);

std::vector<std::string> stencil_preset_names();
bool is_stencil_preset(const std::string& name);
Stencil stencil_preset(const std::string& name);

}  // namespace harmoniq
