#include "harmoniq/stencil.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "harmoniq/errors.hpp"
#include "json.hpp"

namespace harmoniq {

using nlohmann::json;

const Eigen::MatrixXd* Stencil::block(const Offset& l) const {
  auto it = blocks.find(l);
  return it == blocks.end() ? nullptr : &it->second;
}

Eigen::VectorXd MassModel::cell_diagonal() const {
  const int na = static_cast<int>(cell_masses.size());
  Eigen::VectorXd d(na * dim);
  for (int a = 0; a < na; ++a)
    for (int c = 0; c < dim; ++c) d[a * dim + c] = cell_masses[a];
  return d;
}

Eigen::VectorXd MassModel::dof_masses(std::size_t n_cells) const {
  const Eigen::VectorXd cell = cell_diagonal();
  Eigen::VectorXd d(static_cast<Eigen::Index>(n_cells) * cell.size());
  for (std::size_t i = 0; i < n_cells; ++i)
    d.segment(static_cast<Eigen::Index>(i) * cell.size(), cell.size()) = cell;
  return d;
}

MassModel mass_model_of(const Stencil& st) {
  return MassModel{st.masses, st.dim};
}

namespace {

Eigen::MatrixXd parse_block_matrix(const json& arr, int m,
                                   const std::string& where) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != m * m)
    throw InvalidInputError("stencil block at " + where + ": matrix must be " +
                            std::to_string(m * m) + " row-major reals");
  Eigen::MatrixXd b(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const json& v = arr[i * m + j];
      if (!v.is_number())
        throw InvalidInputError("stencil block at " + where +
                                ": non-numeric matrix entry");
      b(i, j) = v.get<double>();
    }
  return b;
}

}  // namespace

Stencil load_stencil(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("stencil document is not valid JSON: ") +
                            e.what());
  }
  if (!doc.is_object()) throw InvalidInputError("stencil document must be a JSON object");

  Stencil st;
  for (const char* key : {"dim", "cutoff", "atoms_per_cell"}) {
    if (!doc.contains(key) || !doc[key].is_number_integer())
      throw InvalidInputError(std::string("stencil field '") + key +
                              "' missing or not an integer");
  }
  st.dim = doc["dim"].get<int>();
  st.cutoff = doc["cutoff"].get<int>();
  st.atoms_per_cell = doc["atoms_per_cell"].get<int>();
  if (st.dim < 1 || st.dim > 3)
    throw InvalidInputError("stencil dim must be 1, 2, or 3");
  if (st.cutoff < 0) throw InvalidInputError("stencil cutoff must be >= 0");
  if (st.atoms_per_cell < 1)
    throw InvalidInputError("stencil atoms_per_cell must be >= 1");

  if (doc.contains("masses")) {
    const json& ms = doc["masses"];
    if (!ms.is_array() || static_cast<int>(ms.size()) != st.atoms_per_cell)
      throw InvalidInputError("stencil masses must list one mass per basis atom");
    for (const json& v : ms) {
      if (!v.is_number() || v.get<double>() <= 0.0)
        throw InvalidInputError("stencil masses must be positive numbers");
      st.masses.push_back(v.get<double>());
    }
  } else {
    st.masses.assign(static_cast<std::size_t>(st.atoms_per_cell), 1.0);
  }

  if (!doc.contains("blocks") || !doc["blocks"].is_array() ||
      doc["blocks"].empty())
    throw InvalidInputError("stencil must carry a non-empty blocks array");

  const int m = st.block_size();
  for (const json& entry : doc["blocks"]) {
    if (!entry.is_object() || !entry.contains("offset") ||
        !entry.contains("matrix"))
      throw InvalidInputError("each stencil block needs 'offset' and 'matrix'");
    const json& off = entry["offset"];
    if (!off.is_array() || static_cast<int>(off.size()) != st.dim)
      throw InvalidInputError("stencil block offset must have dim components");
    Offset l(st.dim);
    for (int a = 0; a < st.dim; ++a) {
      if (!off[a].is_number_integer())
        throw InvalidInputError("stencil block offsets must be integers");
      l[a] = off[a].get<int>();
      if (l[a] < -st.cutoff || l[a] > st.cutoff)
        throw InvalidInputError("stencil block offset " + format_offset(l) +
                                " exceeds the declared cutoff");
    }
    if (st.blocks.count(l))
      throw InvalidInputError("duplicate stencil block at offset " +
                              format_offset(l));
    st.blocks.emplace(l, parse_block_matrix(entry["matrix"], m, format_offset(l)));
  }

  // Symmetry closure D_{-l} = D_l^T: every stored offset needs its negation,
  // and the pair is averaged into exact transposes.
  for (const auto& [l, b] : st.blocks) {
    (void)b;
    if (!st.blocks.count(negate(l)))
      throw InvalidInputError("stencil stores offset " + format_offset(l) +
                              " but not its negation; the force-constant "
                              "symmetry D(-l) = D(l)^T cannot hold");
  }
  // The average (D_l + D_{-l}^T)/2 is bitwise transpose-consistent between l
  // and -l (IEEE addition commutes), so placement stays exactly symmetric.
  double correction = 0.0;
  std::map<Offset, Eigen::MatrixXd> sym;
  for (const auto& [l, b] : st.blocks) {
    const Eigen::MatrixXd& bn = st.blocks.at(negate(l));
    Eigen::MatrixXd avg = 0.5 * (b + bn.transpose());
    correction += (b - avg).norm();
    sym.emplace(l, std::move(avg));
  }
  st.blocks = std::move(sym);
  st.symmetrization_correction = correction;
  return st;
}

Stencil load_stencil_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stencil file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return load_stencil(ss.str());
  } catch (const InvalidInputError& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
}

std::string stencil_to_json(const Stencil& st) {
  json doc;
  doc["dim"] = st.dim;
  doc["cutoff"] = st.cutoff;
  doc["atoms_per_cell"] = st.atoms_per_cell;
  doc["masses"] = st.masses;
  json blocks = json::array();
  const int m = st.block_size();
  for (const auto& [l, b] : st.blocks) {
    json entry;
    entry["offset"] = l;
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) flat.push_back(b(i, j));
    entry["matrix"] = flat;
    blocks.push_back(entry);
  }
  doc["blocks"] = blocks;
  return doc.dump(2) + "\n";
}

namespace {

Stencil make_scalar_chain(int cutoff, std::map<int, double> coeffs) {
  Stencil st;
  st.dim = 1;
  st.cutoff = cutoff;
  st.atoms_per_cell = 1;
  st.masses = {1.0};
  for (const auto& [l, c] : coeffs) {
    Eigen::MatrixXd b(1, 1);
    b(0, 0) = c;
    st.blocks.emplace(Offset{l}, b);
  }
  return st;
}

Eigen::MatrixXd mat2(double a00, double a01, double a10, double a11) {
  Eigen::MatrixXd b(2, 2);
  b << a00, a01, a10, a11;
  return b;
}

Stencil make_diatomic() {
  Stencil st;
  st.dim = 1;
  st.cutoff = 1;
  st.atoms_per_cell = 2;
  st.masses = {1.0, 1.5};
  st.blocks.emplace(Offset{0}, mat2(2, -1, -1, 2));
  st.blocks.emplace(Offset{-1}, mat2(0, -1, 0, 0));
  st.blocks.emplace(Offset{1}, mat2(0, 0, -1, 0));
  return st;
}

// 2D elastic-style lattice built as the Gram polynomial of fixed degree-1
// factor blocks, so an exact rank-1 factorization exists by construction
// (all entries dyadic rationals, hence exact in binary floating point).
Stencil make_synthetic_2d() {
  Stencil st;
  st.dim = 2;
  st.cutoff = 1;
  st.atoms_per_cell = 1;
  st.masses = {1.0};
  st.blocks.emplace(Offset{0, 0}, mat2(3.625, 1.25, 1.25, 3.625));
  st.blocks.emplace(Offset{1, 0}, mat2(-1.5, -0.25, -0.5, -0.8125));
  st.blocks.emplace(Offset{-1, 0}, mat2(-1.5, -0.5, -0.25, -0.8125));
  st.blocks.emplace(Offset{0, 1}, mat2(-0.8125, -0.5, -0.25, -1.5));
  st.blocks.emplace(Offset{0, -1}, mat2(-0.8125, -0.25, -0.5, -1.5));
  st.blocks.emplace(Offset{1, -1}, mat2(0.5, 0, 0.25, 0.5));
  st.blocks.emplace(Offset{-1, 1}, mat2(0.5, 0.25, 0, 0.5));
  return st;
}

}  // namespace

std::vector<std::string> stencil_preset_names() {
  return {"nnn-chain", "nnn-chain-altsign", "nn-chain", "diatomic",
          "synthetic-2d"};
}

bool is_stencil_preset(const std::string& name) {
  for (const auto& n : stencil_preset_names())
    if (n == name) return true;
  return false;
}

Stencil stencil_preset(const std::string& name) {
  if (name == "nnn-chain")
    return make_scalar_chain(
        2, {{-2, 1.0 / 6.0}, {-1, -1.0}, {0, 5.0 / 3.0}, {1, -1.0}, {2, 1.0 / 6.0}});
  if (name == "nnn-chain-altsign")
    return make_scalar_chain(
        2, {{-2, -1.0 / 6.0}, {-1, 1.0}, {0, 5.0 / 3.0}, {1, 1.0}, {2, -1.0 / 6.0}});
  if (name == "nn-chain")
    return make_scalar_chain(1, {{-1, -1.0}, {0, 2.0}, {1, -1.0}});
  if (name == "diatomic") return make_diatomic();
  if (name == "synthetic-2d") return make_synthetic_2d();
  throw InvalidInputError("unknown stencil preset: " + name);
}

}  // namespace harmoniq
