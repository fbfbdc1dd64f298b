#pragma once

#include <string_view>

#include "promprune/tensor_core.hpp"

namespace promprune {

enum class EntropyMetric { spectral, feature_norm, attention };

std::string_view to_string(EntropyMetric metric);
EntropyMetric parse_entropy_metric(std::string_view name);

struct EntropyReport {
  double raw_entropy = 0.0;         // nats
  double normalized_entropy = 0.0;  // raw / normalizer, in [0, 1]
  EntropyMetric metric = EntropyMetric::spectral;
  double normalizer = 0.0;          // log of the support size

  bool operator==(const EntropyReport&) const = default;
};

/// Shannon entropy of the squared singular values of the token matrix,
/// normalized by log(min(N, d)). Throws degenerate_input on an all-zero matrix.
EntropyReport spectral_entropy(const TokenMatrix& tokens);

/// Entropy of the distribution of row l2 norms, normalized by log N.
EntropyReport feature_norm_entropy(const TokenMatrix& tokens);

/// Entropy of a head-averaged attention vector, normalized by log N.
EntropyReport attention_entropy(const Vector& saliency);

/// Shared core: entropy of nonnegative weights over a support of `support`
/// outcomes. Weights below `floor_ratio * max` count as zero.
EntropyReport entropy_of_weights(const Vector& weights, Index support,
                                 EntropyMetric metric,
                                 double floor_ratio = 0.0);

}  // namespace promprune
