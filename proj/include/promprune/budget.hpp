#pragma once

#include <optional>
#include <string_view>

#include "promprune/tensor_core.hpp"

namespace promprune {

enum class DiversityMethod { dpp, fps, facility_location };

std::string_view to_string(DiversityMethod method);
DiversityMethod parse_diversity_method(std::string_view name);

// Sigmoid midpoints calibrated per vision encoder family.
enum class EncoderPreset { clip, qwen25vl };

inline constexpr double kClipMu = 0.42;
inline constexpr double kQwen25VlMu = 0.5744;
inline constexpr double kDefaultTau = 0.02;

double preset_mu(EncoderPreset preset);
EncoderPreset parse_encoder_preset(std::string_view name);

enum class FpsStart { lowest_index, highest_saliency };

struct CompressConfig {
  Index total_budget = 64;
  double mu = kClipMu;
  double tau = kDefaultTau;
  DiversityMethod diversity = DiversityMethod::dpp;
  double epsilon = kDefaultNormEpsilon;
  FpsStart fps_start = FpsStart::lowest_index;

  void validate() const;
};

struct BudgetSplit {
  Index t_sal = 0;
  Index t_cov = 0;
  double normalized_entropy = 0.0;
  double coverage_ratio = 0.0;  // sigmoid output before flooring

  Index total() const { return t_sal + t_cov; }
  bool operator==(const BudgetSplit&) const = default;
};

/// Splits the budget with t_cov = floor(T * sigmoid((h - mu) / tau)).
/// Entropies within 1e-9 outside [0, 1] are clamped; beyond that it throws.
BudgetSplit allocate_budget(double normalized_entropy,
                            const CompressConfig& config);

/// Fixed split used by the ablation mode; coverage_ratio is t_cov / T.
BudgetSplit fixed_budget(double normalized_entropy, Index t_sal_fixed,
                         const CompressConfig& config);

}  // namespace promprune
