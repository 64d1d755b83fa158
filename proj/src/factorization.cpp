#include "harmoniq/factorization.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include "harmoniq/errors.hpp"
#include "json.hpp"

namespace harmoniq {

using nlohmann::json;

Eigen::MatrixXd Factorization::block_or_zero(int s, const Offset& j) const {
  const auto& f = factors.at(static_cast<std::size_t>(s));
  auto it = f.find(j);
  if (it != f.end()) return it->second;
  return Eigen::MatrixXd::Zero(block_size, block_size);
}

Eigen::MatrixXcd Factorization::eval_factor(int s,
                                            const Eigen::VectorXd& theta) const {
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(block_size, block_size);
  for (const auto& [j, b] : factors.at(static_cast<std::size_t>(s))) {
    double phase = 0.0;
    for (int a = 0; a < dim; ++a) phase += theta[a] * j[a];
    q += std::polar(1.0, phase) * b;
  }
  return q;
}

Eigen::MatrixXcd Factorization::gram(const Eigen::VectorXd& theta) const {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(block_size, block_size);
  for (int s = 0; s < rank; ++s) {
    const Eigen::MatrixXcd q = eval_factor(s, theta);
    g += q.adjoint() * q;
  }
  return g;
}

Eigen::MatrixXd Factorization::stacked_zero_block() const {
  Eigen::MatrixXd z(rank * block_size, block_size);
  const Offset zero(dim, 0);
  for (int s = 0; s < rank; ++s)
    z.middleRows(s * block_size, block_size) = block_or_zero(s, zero);
  return z;
}

double Factorization::norm_sq_sum() const {
  double sum = 0.0;
  for (const auto& f : factors)
    for (const auto& [j, b] : f) {
      (void)j;
      sum += b.squaredNorm();
    }
  return sum;
}

double residual_coefficients(const LaurentPolynomial& p,
                             const Factorization& f) {
  if (p.block_size != f.block_size || p.dim != f.dim)
    throw InvalidInputError("factorization does not match the polynomial shape");
  // The declared degree may overstate the support (trailing zero blocks);
  // only genuinely nonzero coefficients beyond the factor range are fatal.
  int effective = 0;
  for (const auto& [l, b] : p.blocks)
    if (b.norm() > 0.0)
      for (int c : l) effective = std::max(effective, std::abs(c));
  if (f.degree < effective)
    throw InvalidInputError(
        "factor degree is below the polynomial degree; coefficients beyond "
        "the factor support can never match");
  double sum = 0.0;
  const std::vector<Offset> support = hypercube_offsets(p.dim, -f.degree, f.degree);
  const std::vector<Offset> corner = hypercube_offsets(p.dim, 0, f.degree);
  for (const Offset& l : support) {
    Eigen::MatrixXd r = p.block_or_zero(l);
    for (int s = 0; s < f.rank; ++s) {
      const auto& blocks = f.factors[static_cast<std::size_t>(s)];
      for (const Offset& j : corner) {
        const Offset jl = add(j, l);
        if (!in_corner_box(jl, f.degree)) continue;
        auto itj = blocks.find(j);
        auto itjl = blocks.find(jl);
        if (itj == blocks.end() || itjl == blocks.end()) continue;
        r -= itjl->second.transpose() * itj->second;
      }
    }
    sum += r.squaredNorm();
  }
  return std::sqrt(sum);
}

double residual_torus(const LaurentPolynomial& p, const Factorization& f,
                      int grid) {
  if (grid <= 2 * f.degree)
    throw InvalidInputError(
        "torus residual grid must exceed twice the factor degree, otherwise "
        "coefficient aliasing can hide a mismatch");
  double worst = 0.0;
  std::vector<int> g(p.dim, 0);
  const double step = 2.0 * M_PI / grid;
  while (true) {
    Eigen::VectorXd theta(p.dim);
    for (int a = 0; a < p.dim; ++a) theta[a] = step * g[a];
    worst = std::max(worst, (p.eval(theta) - f.gram(theta)).norm());
    int a = p.dim - 1;
    for (; a >= 0; --a) {
      if (++g[a] < grid) break;
      g[a] = 0;
    }
    if (a < 0) break;
  }
  return worst;
}

LaurentPolynomial synthesize(const Factorization& f) {
  LaurentPolynomial p;
  p.dim = f.dim;
  p.block_size = f.block_size;
  p.degree = f.degree;
  const std::vector<Offset> corner = hypercube_offsets(f.dim, 0, f.degree);
  for (const Offset& l : hypercube_offsets(f.dim, -f.degree, f.degree)) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(f.block_size, f.block_size);
    bool any = false;
    for (int s = 0; s < f.rank; ++s) {
      const auto& blocks = f.factors[static_cast<std::size_t>(s)];
      for (const Offset& j : corner) {
        const Offset jl = add(j, l);
        if (!in_corner_box(jl, f.degree)) continue;
        auto itj = blocks.find(j);
        auto itjl = blocks.find(jl);
        if (itj == blocks.end() || itjl == blocks.end()) continue;
        c += itjl->second.transpose() * itj->second;
        any = true;
      }
    }
    if (any && c.norm() > 0.0) p.blocks.emplace(l, std::move(c));
  }
  // Trim the declared degree to the support actually produced.
  int deg = 0;
  for (const auto& [l, b] : p.blocks) {
    (void)b;
    for (int c : l) deg = std::max(deg, std::abs(c));
  }
  p.degree = deg;
  return p;
}

ParsevalReport parseval_bound_check(const LaurentPolynomial& p,
                                    const Factorization& f,
                                    const MassModel& mm, int grid) {
  ParsevalReport rep;
  rep.coeff_norm_sq_sum = f.norm_sq_sum();

  const Eigen::VectorXd inv_sqrt =
      mm.cell_diagonal().array().sqrt().inverse().matrix();

  double max_fro = 0.0;
  double max_weighted = 0.0;
  std::vector<int> g(p.dim, 0);
  const double step = 2.0 * M_PI / grid;
  while (true) {
    Eigen::VectorXd theta(p.dim);
    for (int a = 0; a < p.dim; ++a) theta[a] = step * g[a];
    const Eigen::MatrixXcd val = p.eval(theta);
    max_fro = std::max(max_fro, val.norm());
    const Eigen::MatrixXcd weighted =
        inv_sqrt.asDiagonal() * val * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(weighted);
    max_weighted = std::max(max_weighted, es.eigenvalues().maxCoeff());
    int a = p.dim - 1;
    for (; a >= 0; --a) {
      if (++g[a] < grid) break;
      g[a] = 0;
    }
    if (a < 0) break;
  }
  rep.bound = p.block_size * max_fro;
  rep.ok = rep.coeff_norm_sq_sum <= rep.bound * (1.0 + 1e-6);

  // Reported only: sum of mass-weighted spectral norms against the coarse
  // budget debye * atoms_per_cell * dim (a per-term magnitude heuristic, not
  // a theorem; the Frobenius bound above is the certified one).
  rep.alpha_budget = std::sqrt(std::max(0.0, max_weighted)) *
                     static_cast<double>(mm.cell_masses.size()) * mm.dim;
  double alpha = 0.0;
  for (const auto& fs : f.factors)
    for (const auto& [j, b] : fs) {
      (void)j;
      alpha += (b * inv_sqrt.asDiagonal()).operatorNorm();
    }
  rep.alpha_sum = alpha;
  return rep;
}

void certify(Factorization& f, const LaurentPolynomial& p, int grid) {
  f.residual_coeff = residual_coefficients(p, f);
  f.residual_torus = residual_torus(p, f, grid);
  const Eigen::MatrixXd z = f.stacked_zero_block();
  if (z.rows() >= z.cols()) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
    f.recovery_capable = qr.rank() == f.block_size;
  } else {
    f.recovery_capable = false;
  }
}

namespace {

json factor_blocks_to_json(const std::map<Offset, Eigen::MatrixXd>& blocks,
                           int m) {
  json arr = json::array();
  for (const auto& [j, b] : blocks) {
    json entry;
    entry["offset"] = j;
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m) * m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) flat.push_back(b(r, c));
    entry["matrix"] = flat;
    arr.push_back(entry);
  }
  return arr;
}

}  // namespace

std::string factorization_to_json(const Factorization& f) {
  json doc;
  doc["dim"] = f.dim;
  doc["block_size"] = f.block_size;
  doc["rank"] = f.rank;
  doc["degree"] = f.degree;
  json factors = json::array();
  for (const auto& fs : f.factors)
    factors.push_back(factor_blocks_to_json(fs, f.block_size));
  doc["factors"] = factors;
  json meta;
  meta["residual_coeff"] = f.residual_coeff;
  meta["residual_torus"] = f.residual_torus;
  meta["recovery_capable"] = f.recovery_capable;
  meta["method"] = f.method;
  meta["converged"] = f.converged;
  meta["iterations"] = f.iterations;
  meta["seed"] = f.seed;
  doc["metadata"] = meta;
  return doc.dump(2) + "\n";
}

Factorization load_factorization(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidInputError(
        std::string("factorization document is not valid JSON: ") + e.what());
  }
  Factorization f;
  for (const char* key : {"dim", "block_size", "rank", "degree"}) {
    if (!doc.contains(key) || !doc[key].is_number_integer())
      throw InvalidInputError(std::string("factorization field '") + key +
                              "' missing or not an integer");
  }
  f.dim = doc["dim"].get<int>();
  f.block_size = doc["block_size"].get<int>();
  f.rank = doc["rank"].get<int>();
  f.degree = doc["degree"].get<int>();
  if (f.dim < 1 || f.block_size < 1 || f.rank < 1 || f.degree < 0)
    throw InvalidInputError("factorization shape fields out of range");
  if (!doc.contains("factors") || !doc["factors"].is_array() ||
      static_cast<int>(doc["factors"].size()) != f.rank)
    throw InvalidInputError("factorization must carry one factor per rank");

  const int m = f.block_size;
  for (const json& fs : doc["factors"]) {
    std::map<Offset, Eigen::MatrixXd> blocks;
    if (!fs.is_array())
      throw InvalidInputError("each factor must be an array of blocks");
    for (const json& entry : fs) {
      if (!entry.is_object() || !entry.contains("offset") ||
          !entry.contains("matrix"))
        throw InvalidInputError("each factor block needs 'offset' and 'matrix'");
      const json& off = entry["offset"];
      if (!off.is_array() || static_cast<int>(off.size()) != f.dim)
        throw InvalidInputError("factor block offset must have dim components");
      Offset j(f.dim);
      for (int a = 0; a < f.dim; ++a) {
        if (!off[a].is_number_integer())
          throw InvalidInputError("factor block offsets must be integers");
        j[a] = off[a].get<int>();
        if (j[a] < 0 || j[a] > f.degree)
          throw InvalidInputError("factor block offset " + format_offset(j) +
                                  " outside [0, degree]^dim");
      }
      if (blocks.count(j))
        throw InvalidInputError("duplicate factor block at offset " +
                                format_offset(j));
      const json& mat = entry["matrix"];
      if (!mat.is_array() || static_cast<int>(mat.size()) != m * m)
        throw InvalidInputError("factor block matrix must be block_size^2 reals");
      Eigen::MatrixXd b(m, m);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) b(r, c) = mat[r * m + c].get<double>();
      blocks.emplace(std::move(j), std::move(b));
    }
    f.factors.push_back(std::move(blocks));
  }

  if (doc.contains("metadata") && doc["metadata"].is_object()) {
    const json& meta = doc["metadata"];
    if (meta.contains("residual_coeff"))
      f.residual_coeff = meta["residual_coeff"].get<double>();
    if (meta.contains("residual_torus"))
      f.residual_torus = meta["residual_torus"].get<double>();
    if (meta.contains("recovery_capable"))
      f.recovery_capable = meta["recovery_capable"].get<bool>();
    if (meta.contains("method")) f.method = meta["method"].get<std::string>();
    if (meta.contains("converged")) f.converged = meta["converged"].get<bool>();
    if (meta.contains("iterations"))
      f.iterations = meta["iterations"].get<int>();
    if (meta.contains("seed")) f.seed = meta["seed"].get<std::uint64_t>();
  }
  return f;
}

Factorization load_factorization_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open factorization file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return load_factorization(ss.str());
  } catch (const InvalidInputError& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
}

namespace {

Factorization make_exact(int dim, int m, int degree,
                         std::vector<std::map<Offset, Eigen::MatrixXd>> factors) {
  Factorization f;
  f.dim = dim;
  f.block_size = m;
  f.rank = static_cast<int>(factors.size());
  f.degree = degree;
  f.factors = std::move(factors);
  f.method = "exact";
  f.converged = true;
  return f;
}

Eigen::MatrixXd scalar(double v) {
  Eigen::MatrixXd b(1, 1);
  b(0, 0) = v;
  return b;
}

Eigen::MatrixXd mat2(double a00, double a01, double a10, double a11) {
  Eigen::MatrixXd b(2, 2);
  b << a00, a01, a10, a11;
  return b;
}

}  // namespace

bool has_factorization_preset(const std::string& name) {
  return name == "nnn-chain" || name == "nn-chain" || name == "diatomic" ||
         name == "synthetic-2d";
}

Factorization factorization_preset(const std::string& name) {
  if (name == "nnn-chain") {
    const double s = 1.0 / std::sqrt(3.0);
    std::map<Offset, Eigen::MatrixXd> b;
    b.emplace(Offset{0}, scalar(0.5 * (1.0 + s)));
    b.emplace(Offset{1}, scalar(-1.0));
    b.emplace(Offset{2}, scalar(0.5 * (1.0 - s)));
    return make_exact(1, 1, 2, {std::move(b)});
  }
  if (name == "nn-chain") {
    std::map<Offset, Eigen::MatrixXd> b;
    b.emplace(Offset{0}, scalar(1.0));
    b.emplace(Offset{1}, scalar(-1.0));
    return make_exact(1, 1, 1, {std::move(b)});
  }
  if (name == "diatomic") {
    std::map<Offset, Eigen::MatrixXd> b;
    b.emplace(Offset{0}, mat2(1, 0, 1, -1));
    b.emplace(Offset{1}, mat2(0, -1, 0, 0));
    return make_exact(1, 2, 1, {std::move(b)});
  }
  if (name == "synthetic-2d") {
    std::map<Offset, Eigen::MatrixXd> b;
    b.emplace(Offset{0, 0}, mat2(1.5, 0.25, 0.25, 1.5));
    b.emplace(Offset{1, 0}, mat2(-1, -0.25, 0, -0.5));
    b.emplace(Offset{0, 1}, mat2(-0.5, 0, -0.25, -1));
    return make_exact(2, 2, 1, {std::move(b)});
  }
  throw InvalidInputError("no closed-form factorization preset named " + name);
}

}  // namespace harmoniq
