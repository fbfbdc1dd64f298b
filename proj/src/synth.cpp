#include "promprune/synth.hpp"

#include <cmath>
#include <random>
#include <string>

namespace promprune {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

SyntheticSample synth_tokens(Index n, Index d, Index k_directions, double noise,
                             std::uint64_t seed) {
  if (n < 1 || d < 1) {
    throw Error(ErrorKind::invalid_input, "n and d must be >= 1");
  }
  if (k_directions < 1 || k_directions > std::min(n, d)) {
    throw Error(ErrorKind::invalid_input,
                "k_directions must lie in [1, " +
                    std::to_string(std::min(n, d)) + "]");
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw Error(ErrorKind::invalid_input, "noise must be finite and >= 0");
  }

  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> gauss;
  std::exponential_distribution<double> expo(1.0);

  Matrix raw(d, k_directions);
  for (Index j = 0; j < k_directions; ++j) {
    for (Index i = 0; i < d; ++i) raw(i, j) = gauss(rng);
  }
  const Matrix directions =
      Eigen::HouseholderQR<Matrix>(raw).householderQ() *
      Matrix::Identity(d, k_directions);

  // Weight 0.9 on the anchor direction, the rest spread at random.
  const double spread = k_directions > 1 ? 0.1 : 0.0;

  SyntheticSample sample;
  sample.tokens.resize(n, d);
  sample.saliency.resize(n);
  Vector weights(k_directions);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < k_directions; ++j) weights(j) = expo(rng);
    weights *= spread / weights.sum();
    weights(i % k_directions) += 1.0 - spread;
    Vector row = directions * weights;
    for (Index c = 0; c < d; ++c) row(c) += noise * gauss(rng);
    sample.tokens.row(i) = row.transpose();
    sample.saliency(i) =
        std::abs(row.dot(directions.col(0))) + noise * std::abs(gauss(rng));
  }
  return sample;
}

}  // namespace promprune
