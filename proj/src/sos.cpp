#include "harmoniq/sos.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <random>

#include "harmoniq/errors.hpp"

namespace harmoniq {

namespace {

struct Workspace {
  int dim, m, rank, degree;
  std::vector<Offset> corner;   // factor offsets, lex
  std::vector<Offset> support;  // residual offsets, lex
  std::map<Offset, int> corner_index;
  std::vector<Eigen::MatrixXd> data;  // C_l per support entry

  int num_j() const { return static_cast<int>(corner.size()); }
  int unknowns() const { return rank * num_j() * m * m; }
  int residuals() const { return static_cast<int>(support.size()) * m * m; }

  int xcol(int s, int jidx, int e, int f) const {
    return ((s * num_j() + jidx) * m + f) * m + e;
  }
};

Workspace make_workspace(const LaurentPolynomial& p, int rank, int degree) {
  Workspace w;
  w.dim = p.dim;
  w.m = p.block_size;
  w.rank = rank;
  w.degree = degree;
  w.corner = hypercube_offsets(p.dim, 0, degree);
  w.support = hypercube_offsets(p.dim, -degree, degree);
  for (int j = 0; j < static_cast<int>(w.corner.size()); ++j)
    w.corner_index.emplace(w.corner[static_cast<std::size_t>(j)], j);
  w.data.reserve(w.support.size());
  for (const Offset& l : w.support) w.data.push_back(p.block_or_zero(l));
  return w;
}

// Unpack the flat vector into per-(s, j) blocks.
std::vector<std::vector<Eigen::MatrixXd>> unpack(const Workspace& w,
                                                 const Eigen::VectorXd& x) {
  std::vector<std::vector<Eigen::MatrixXd>> q(
      static_cast<std::size_t>(w.rank),
      std::vector<Eigen::MatrixXd>(w.corner.size()));
  int pos = 0;
  for (int s = 0; s < w.rank; ++s)
    for (std::size_t j = 0; j < w.corner.size(); ++j) {
      q[static_cast<std::size_t>(s)][j] =
          Eigen::Map<const Eigen::MatrixXd>(x.data() + pos, w.m, w.m);
      pos += w.m * w.m;
    }
  return q;
}

// Residual r = vec(model - data) per support offset; optional dense Jacobian.
void residual_and_jacobian(const Workspace& w, const Eigen::VectorXd& x,
                           Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
  const auto q = unpack(w, x);
  const int m = w.m;
  r.resize(w.residuals());
  if (jac) jac->setZero(w.residuals(), w.unknowns());

  for (std::size_t li = 0; li < w.support.size(); ++li) {
    const Offset& l = w.support[li];
    Eigen::MatrixXd model = Eigen::MatrixXd::Zero(m, m);
    for (int s = 0; s < w.rank; ++s)
      for (std::size_t j = 0; j < w.corner.size(); ++j) {
        const Offset jl = add(w.corner[j], l);
        auto it = w.corner_index.find(jl);
        if (it == w.corner_index.end()) continue;
        model += q[static_cast<std::size_t>(s)][static_cast<std::size_t>(
                      it->second)]
                     .transpose() *
                 q[static_cast<std::size_t>(s)][j];
      }
    const Eigen::MatrixXd res = model - w.data[li];
    const int row0 = static_cast<int>(li) * m * m;
    for (int b = 0; b < m; ++b)
      for (int a = 0; a < m; ++a) r[row0 + b * m + a] = res(a, b);

    if (!jac) continue;
    for (int s = 0; s < w.rank; ++s)
      for (std::size_t k = 0; k < w.corner.size(); ++k) {
        // d(model)/dQ_k via the j = k term: model += Q_{k+l}^T dQ_k.
        auto itp = w.corner_index.find(add(w.corner[k], l));
        if (itp != w.corner_index.end()) {
          const Eigen::MatrixXd& qkl =
              q[static_cast<std::size_t>(s)][static_cast<std::size_t>(
                  itp->second)];
          for (int b = 0; b < m; ++b)
            for (int a = 0; a < m; ++a)
              for (int e = 0; e < m; ++e)
                (*jac)(row0 + b * m + a,
                       w.xcol(s, static_cast<int>(k), e, b)) += qkl(e, a);
        }
        // d(model)/dQ_k via the j = k - l term: model += dQ_k^T Q_{k-l}.
        auto itm = w.corner_index.find(sub(w.corner[k], l));
        if (itm != w.corner_index.end()) {
          const Eigen::MatrixXd& qkm =
              q[static_cast<std::size_t>(s)][static_cast<std::size_t>(
                  itm->second)];
          for (int b = 0; b < m; ++b)
            for (int a = 0; a < m; ++a)
              for (int e = 0; e < m; ++e)
                (*jac)(row0 + b * m + a,
                       w.xcol(s, static_cast<int>(k), e, a)) += qkm(e, b);
        }
      }
  }
}

Factorization pack_result(const Workspace& w, const Eigen::VectorXd& x) {
  Factorization f;
  f.dim = w.dim;
  f.block_size = w.m;
  f.rank = w.rank;
  f.degree = w.degree;
  const auto q = unpack(w, x);
  for (int s = 0; s < w.rank; ++s) {
    std::map<Offset, Eigen::MatrixXd> blocks;
    for (std::size_t j = 0; j < w.corner.size(); ++j)
      blocks.emplace(w.corner[j], q[static_cast<std::size_t>(s)][j]);
    f.factors.push_back(std::move(blocks));
  }
  f.method = "sos";
  return f;
}

struct AttemptResult {
  Eigen::VectorXd x;
  double residual = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  SosStatus status = SosStatus::MaxIterations;
  int iterations = 0;
};

AttemptResult run_lm(const Workspace& w, const SosOptions& opts,
                     std::uint64_t seed, double init_scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-init_scale, init_scale);
  Eigen::VectorXd x(w.unknowns());
  for (int i = 0; i < x.size(); ++i) x[i] = dist(rng);

  AttemptResult out;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  residual_and_jacobian(w, x, r, nullptr);
  double fval = r.squaredNorm();
  out.history.push_back(std::sqrt(fval));

  double lambda = opts.lambda0;
  const Eigen::MatrixXd eye =
      Eigen::MatrixXd::Identity(w.unknowns(), w.unknowns());

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (std::sqrt(fval) <= opts.residual_tolerance) {
      out.status = SosStatus::Converged;
      break;
    }
    residual_and_jacobian(w, x, r, &jac);
    const Eigen::VectorXd g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance) {
      out.status = SosStatus::Stalled;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;

    bool accepted = false;
    for (int inner = 0; inner < 25 && !accepted; ++inner) {
      const Eigen::VectorXd step =
          Eigen::LDLT<Eigen::MatrixXd>(jtj + lambda * eye).solve(-g);
      const Eigen::VectorXd xn = x + step;
      Eigen::VectorXd rn;
      residual_and_jacobian(w, xn, rn, nullptr);
      const double fn = rn.squaredNorm();
      if (fn < fval) {
        x = xn;
        fval = fn;
        lambda = std::max(lambda * opts.lambda_shrink, 1e-14);
        accepted = true;
      } else {
        lambda *= opts.lambda_growth;
        if (lambda > 1e14) break;
      }
    }
    out.history.push_back(std::sqrt(fval));
    if (!accepted) {
      out.status = SosStatus::Stalled;
      ++it;
      break;
    }
  }
  if (it >= opts.max_iterations) out.status = SosStatus::MaxIterations;
  if (std::sqrt(fval) <= opts.residual_tolerance)
    out.status = SosStatus::Converged;
  out.x = x;
  out.residual = std::sqrt(fval);
  out.iterations = it;
  return out;
}

}  // namespace

void sos_residual_jacobian(const LaurentPolynomial& p, int rank, int degree,
                           const Eigen::VectorXd& x, Eigen::VectorXd& resid,
                           Eigen::MatrixXd* jac) {
  const Workspace w = make_workspace(p, rank, degree);
  if (x.size() != w.unknowns())
    throw InvalidInputError("flat block vector has the wrong length");
  residual_and_jacobian(w, x, resid, jac);
}

SosResult factorize_sos(const LaurentPolynomial& p, int rank, int degree,
                        const SosOptions& opts) {
  if (rank < 1) throw InvalidInputError("factor rank must be >= 1");
  if (degree < p.degree)
    throw InvalidInputError(
        "factor degree " + std::to_string(degree) +
        " cannot represent a polynomial of degree " + std::to_string(p.degree));

  const Workspace w = make_workspace(p, rank, degree);

  SosResult result;
  result.seed_used = opts.random_seed;

  // Degenerate but legal: the zero polynomial factors as zero blocks.
  double data_scale = 0.0;
  for (const Eigen::MatrixXd& c : w.data)
    data_scale = std::max(data_scale, c.norm());
  if (data_scale == 0.0) {
    result.factorization =
        pack_result(w, Eigen::VectorXd::Zero(w.unknowns()));
    result.status = SosStatus::Converged;
    result.residual_history = {0.0};
    certify(result.factorization, p, 2 * degree + 2);
    return result;
  }

  const double init_scale =
      opts.init_scale > 0.0
          ? opts.init_scale
          : std::sqrt(data_scale / (rank * w.num_j() * w.m));

  AttemptResult best;
  int attempts = std::max(1, opts.max_restarts);
  for (int t = 0; t < attempts; ++t) {
    AttemptResult attempt = run_lm(w, opts, opts.random_seed + t, init_scale);
    if (attempt.residual < best.residual) {
      best = std::move(attempt);
      result.seed_used = opts.random_seed + t;
      result.restarts_used = t;
    }
    if (best.status == SosStatus::Converged &&
        best.residual <= opts.residual_tolerance)
      break;
  }

  result.factorization = pack_result(w, best.x);
  result.factorization.converged = best.status == SosStatus::Converged;
  result.factorization.iterations = best.iterations;
  result.factorization.seed = result.seed_used;
  result.residual_history = std::move(best.history);
  result.status = best.status;
  result.iterations = best.iterations;
  certify(result.factorization, p, std::max(64, 2 * degree + 2));
  return result;
}

}  // namespace harmoniq
