#include "harmoniq/laurent.hpp"

#include <cmath>
#include <complex>

#include "harmoniq/errors.hpp"

namespace harmoniq {

const Eigen::MatrixXd* LaurentPolynomial::block(const Offset& l) const {
  auto it = blocks.find(l);
  return it == blocks.end() ? nullptr : &it->second;
}

Eigen::MatrixXd LaurentPolynomial::block_or_zero(const Offset& l) const {
  const Eigen::MatrixXd* b = block(l);
  if (b) return *b;
  return Eigen::MatrixXd::Zero(block_size, block_size);
}

Eigen::MatrixXcd LaurentPolynomial::eval(const Eigen::VectorXd& theta) const {
  if (theta.size() != dim)
    throw InvalidInputError("Laurent evaluation point has wrong dimension");
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(block_size, block_size);
  for (const auto& [l, b] : blocks) {
    double phase = 0.0;
    for (int a = 0; a < dim; ++a) phase -= theta[a] * l[a];
    p += std::polar(1.0, phase) * b;
  }
  return p;
}

double LaurentPolynomial::max_block_norm() const {
  double mx = 0.0;
  for (const auto& [l, b] : blocks) {
    (void)l;
    mx = std::max(mx, b.norm());
  }
  return mx;
}

LaurentPolynomial LaurentPolynomial::from_stencil(const Stencil& st) {
  LaurentPolynomial p;
  p.dim = st.dim;
  p.block_size = st.block_size();
  p.degree = st.cutoff;
  p.blocks = st.blocks;
  return p;
}

}  // namespace harmoniq
