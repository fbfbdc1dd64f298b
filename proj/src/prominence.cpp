#include "promprune/prominence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace promprune {

std::string_view to_string(EntropyMetric metric) {
  switch (metric) {
    case EntropyMetric::spectral: return "spectral";
    case EntropyMetric::feature_norm: return "norm";
    case EntropyMetric::attention: return "attn";
  }
  return "spectral";
}

EntropyMetric parse_entropy_metric(std::string_view name) {
  if (name == "spectral") return EntropyMetric::spectral;
  if (name == "norm") return EntropyMetric::feature_norm;
  if (name == "attn") return EntropyMetric::attention;
  throw Error(ErrorKind::invalid_input,
              "unknown entropy metric '" + std::string(name) + "'");
}

EntropyReport entropy_of_weights(const Vector& weights, Index support,
                                 EntropyMetric metric, double floor_ratio) {
  EntropyReport report;
  report.metric = metric;
  report.normalizer = support > 1 ? std::log(static_cast<double>(support)) : 0.0;

  const double peak = weights.maxCoeff();
  const double cutoff = floor_ratio * peak;
  double total = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights(i) > cutoff) total += weights(i);
  }

  double h = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights(i) <= cutoff) continue;  // 0 log 0 = 0
    const double p = weights(i) / total;
    h -= p * std::log(p);
  }
  report.raw_entropy = std::max(h, 0.0);
  report.normalized_entropy =
      report.normalizer > 0.0
          ? std::clamp(report.raw_entropy / report.normalizer, 0.0, 1.0)
          : 0.0;
  return report;
}

EntropyReport spectral_entropy(const TokenMatrix& tokens) {
  // The Gram matrix is symmetric by construction.
  SquareMatrix gram = gram_matrix(tokens);
  const SymmetricSpectrum spectrum = detail::eigenvalues_in_place(gram);
  if (!(spectrum.eigenvalues(0) > 0.0)) {
    throw Error(ErrorKind::degenerate_input,
                "spectral entropy undefined for an all-zero token matrix");
  }
  return entropy_of_weights(spectrum.eigenvalues, spectrum.rank_bound,
                            EntropyMetric::spectral, 1e-12);
}

EntropyReport feature_norm_entropy(const TokenMatrix& tokens) {
  validate_tokens(tokens);
  const Vector norms = tokens.rowwise().norm();
  if (!(norms.maxCoeff() > 0.0)) {
    throw Error(ErrorKind::degenerate_input,
                "feature-norm entropy undefined for an all-zero token matrix");
  }
  return entropy_of_weights(norms, tokens.rows(), EntropyMetric::feature_norm);
}

EntropyReport attention_entropy(const Vector& saliency) {
  if (saliency.size() < 1 || !saliency.allFinite()) {
    throw Error(ErrorKind::invalid_input,
                "attention vector must be non-empty and finite");
  }
  if (saliency.minCoeff() < 0.0) {
    throw Error(ErrorKind::invalid_input, "attention has negative entries");
  }
  if (!(saliency.sum() > 0.0)) {
    throw Error(ErrorKind::invalid_input, "attention sums to zero");
  }
  return entropy_of_weights(saliency, saliency.size(),
                            EntropyMetric::attention);
}

}  // namespace promprune
