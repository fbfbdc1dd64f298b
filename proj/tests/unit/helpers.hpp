#pragma once

#include <random>
#include <vector>

#include "promprune/tensor_core.hpp"

namespace testutil {

using promprune::Index;

inline promprune::TokenMatrix gaussian(Index n, Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  promprune::TokenMatrix m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = g(rng);
  return m;
}

// Haar-ish orthogonal matrix from the Q factor of a Gaussian matrix.
inline promprune::Matrix orthogonal(Index d, std::mt19937_64& rng) {
  promprune::Matrix a = gaussian(d, d, rng);
  Eigen::HouseholderQR<promprune::Matrix> qr(a);
  return qr.householderQ() * promprune::Matrix::Identity(d, d);
}

inline std::vector<Index> permutation(Index n, std::mt19937_64& rng) {
  std::vector<Index> p(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

inline promprune::TokenMatrix permute_rows(const promprune::TokenMatrix& m,
                                           const std::vector<Index>& p) {
  promprune::TokenMatrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(p[static_cast<size_t>(i)]);
  return out;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) / scale;
}

}  // namespace testutil
