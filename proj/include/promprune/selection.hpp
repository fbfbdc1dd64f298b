#pragma once

#include <limits>
#include <span>
#include <vector>

#include "promprune/budget.hpp"
#include "promprune/index_set.hpp"
#include "promprune/tensor_core.hpp"

namespace promprune {

/// Per-token nonnegative saliency, length N.
using SaliencyVector = Vector;

enum class AttentionReduction { cls_row, global_average };

/// Averages per-head scores (H x N) across heads. In cls_row mode each row is
/// a head's CLS-to-token attention; in global_average mode each row is the
/// mean attention a token receives in that head. Both reduce identically.
SaliencyVector reduce_head_attention(const Matrix& head_scores,
                                     AttentionReduction mode);

void validate_saliency(const SaliencyVector& saliency, Index n_tokens);

/// Indices of the k largest scores, ties toward the lower index.
IndexSet saliency_topk(const SaliencyVector& saliency, Index k);

/// L[a][b] = cosine similarity of pool rows a and b. The diagonal is exactly 1
/// for nonzero rows and 0 for zero rows.
SquareMatrix cosine_kernel(const TokenMatrix& tokens, const IndexSet& pool,
                           double epsilon = kDefaultNormEpsilon);

/// Output of the greedy diversity selectors.
struct GreedyTrace {
  IndexSet selected;         // ascending
  std::vector<Index> order;  // pick order (token indices)
  // Per greedy pick: log residual variance (dpp), min distance at pick time
  // (fps, +inf for the start token), or marginal objective gain (fl).
  // Fallback picks have no entry.
  std::vector<double> gains;
  Index fallback_picks = 0;
};

struct DppOptions {
  double jitter = 1e-10;
  // Greedy stops once every remaining residual variance is below this.
  double rank_threshold = 1e-8;
  double epsilon = kDefaultNormEpsilon;
  // Scores for filling past the numerical rank (descending). Ascending index
  // order when empty.
  std::span<const double> fallback_scores = {};
};

/// Greedy MAP inference for log det(L_S) with incremental Cholesky updates.
/// Residuals are refreshed lazily; since they never increase, this picks the
/// same sequence as refreshing every candidate at every step.
GreedyTrace dpp_greedy_map(const TokenMatrix& tokens, const IndexSet& pool,
                           Index k, const DppOptions& options = {});

struct FpsOptions {
  FpsStart start = FpsStart::lowest_index;
  double epsilon = kDefaultNormEpsilon;
  std::span<const double> saliency = {};  // needed for highest_saliency
};

/// Farthest point sampling under d(i, j) = 1 - cos(i, j).
GreedyTrace fps_select(const TokenMatrix& tokens, const IndexSet& pool,
                       Index k, const FpsOptions& options = {});

/// Greedy facility location with s(i, j) = clip((cos + 1) / 2, 0, 1) and unit
/// weights over the pool.
GreedyTrace facility_location_select(const TokenMatrix& tokens,
                                     const IndexSet& pool, Index k,
                                     double epsilon = kDefaultNormEpsilon);

}  // namespace promprune
