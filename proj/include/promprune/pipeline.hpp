#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "promprune/budget.hpp"
#include "promprune/index_set.hpp"
#include "promprune/prominence.hpp"
#include "promprune/selection.hpp"

namespace promprune {

enum class Stage { saliency, coverage };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view name);

struct PhaseTimings {
  double entropy_us = 0.0;
  double allocation_us = 0.0;
  double stage1_us = 0.0;
  double stage2_us = 0.0;
  double total_us = 0.0;  // entropy through stage 2 and assembly
  double diagnostics_us = 0.0;  // post-selection checks, not in total
};

struct SelectionResult {
  Index total_budget = 0;
  IndexSet selected;                // ascending, size T
  std::vector<Stage> stage_of;      // aligned with `selected`
  std::vector<Index> coverage_order;  // stage-2 pick order
  BudgetSplit split;
  EntropyReport entropy;
  // Deterministic diagnostics: coverage_logdet, min_pairwise_cosine_distance,
  // dpp_fallback_picks.
  std::map<std::string, double> diagnostics;
  PhaseTimings timings;  // wall clock; excluded from equality and output files

  IndexSet stage_indices(Stage stage) const;

  bool operator==(const SelectionResult& other) const;
};

/// Entropy-guided budget split followed by saliency top-k and diversity
/// completion over the remaining tokens.
SelectionResult compress(const TokenMatrix& tokens,
                         const SaliencyVector& saliency,
                         const CompressConfig& config);

/// Same pipeline with the split forced to (t_sal_fixed, T - t_sal_fixed).
SelectionResult compress_fixed(const TokenMatrix& tokens,
                               const SaliencyVector& saliency,
                               Index t_sal_fixed, const CompressConfig& config);

}  // namespace promprune
