#include "promprune/budget.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace promprune {

std::string_view to_string(DiversityMethod method) {
  switch (method) {
    case DiversityMethod::dpp: return "dpp";
    case DiversityMethod::fps: return "fps";
    case DiversityMethod::facility_location: return "fl";
  }
  return "dpp";
}

DiversityMethod parse_diversity_method(std::string_view name) {
  if (name == "dpp") return DiversityMethod::dpp;
  if (name == "fps") return DiversityMethod::fps;
  if (name == "fl" || name == "facility_location") {
    return DiversityMethod::facility_location;
  }
  throw Error(ErrorKind::invalid_input,
              "unknown diversity method '" + std::string(name) + "'");
}

double preset_mu(EncoderPreset preset) {
  switch (preset) {
    case EncoderPreset::clip: return kClipMu;
    case EncoderPreset::qwen25vl: return kQwen25VlMu;
  }
  return kClipMu;
}

EncoderPreset parse_encoder_preset(std::string_view name) {
  if (name == "clip") return EncoderPreset::clip;
  if (name == "qwen25vl") return EncoderPreset::qwen25vl;
  throw Error(ErrorKind::invalid_input,
              "unknown encoder preset '" + std::string(name) + "'");
}

void CompressConfig::validate() const {
  if (total_budget < 1) {
    throw Error(ErrorKind::invalid_budget, "total budget must be >= 1");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorKind::invalid_input, "tau must be positive");
  }
  if (!(mu > 0.0 && mu < 1.0)) {
    throw Error(ErrorKind::invalid_input, "mu must lie in (0, 1)");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorKind::invalid_input, "epsilon must be nonnegative");
  }
}

namespace {

double checked_entropy(double h) {
  constexpr double kSlack = 1e-9;
  if (!std::isfinite(h) || h < -kSlack || h > 1.0 + kSlack) {
    throw Error(ErrorKind::invalid_input,
                "normalized entropy outside [0, 1]: " + std::to_string(h));
  }
  return std::clamp(h, 0.0, 1.0);
}

}  // namespace

BudgetSplit allocate_budget(double normalized_entropy,
                            const CompressConfig& config) {
  config.validate();
  const double h = checked_entropy(normalized_entropy);
  BudgetSplit split;
  split.normalized_entropy = h;
  split.coverage_ratio = 1.0 / (1.0 + std::exp(-(h - config.mu) / config.tau));
  const double budget = static_cast<double>(config.total_budget);
  // ratio < 1 unless the exponent underflows (argument above ~37, not
  // reachable with the presets); t_sal is then 0.
  split.t_cov = std::min(static_cast<Index>(std::floor(budget * split.coverage_ratio)),
                         config.total_budget);
  split.t_sal = config.total_budget - split.t_cov;
  return split;
}

BudgetSplit fixed_budget(double normalized_entropy, Index t_sal_fixed,
                         const CompressConfig& config) {
  config.validate();
  if (t_sal_fixed < 0 || t_sal_fixed > config.total_budget) {
    throw Error(ErrorKind::invalid_budget,
                "fixed saliency budget must lie in [0, total budget]");
  }
  BudgetSplit split;
  split.normalized_entropy = checked_entropy(normalized_entropy);
  split.t_sal = t_sal_fixed;
  split.t_cov = config.total_budget - t_sal_fixed;
  split.coverage_ratio = static_cast<double>(split.t_cov) /
                         static_cast<double>(config.total_budget);
  return split;
}

}  // namespace promprune
