#pragma once

// Slow reference implementations used to check the greedy selectors. They
// build their own kernels with explicit pair loops and never call into the
// fast selection code.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "promprune/index_set.hpp"
#include "promprune/selection.hpp"

namespace promprune::oracle {

inline constexpr std::uint64_t kMaxEnumeratedSubsets = 1'000'000;

/// Cosine kernel over the pool built from per-pair dot products.
SquareMatrix naive_cosine_kernel(const TokenMatrix& tokens,
                                 const IndexSet& pool);

/// log det of kernel(subset) (+ jitter on the diagonal); -inf when singular.
double log_det(const SquareMatrix& kernel, std::span<const Index> positions,
               double jitter = 0.0);

/// log det(L_S) for token indices `subset` drawn from `pool`.
double subset_log_det(const TokenMatrix& tokens, const IndexSet& pool,
                      const IndexSet& subset, double jitter = 0.0);

/// Greedy DPP that recomputes the full determinant for every candidate at
/// every step. Same jitter, rank threshold, and fallback rule as the fast
/// selector. Returns token indices in pick order.
std::vector<Index> naive_greedy_dpp(const TokenMatrix& tokens,
                                    const IndexSet& pool, Index k,
                                    const DppOptions& options = {});

struct SubsetOptimum {
  IndexSet subset;
  double value = 0.0;
};

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Exact argmax of log det(L_S) over |S| = k; ties go to the
/// lexicographically smallest subset. Throws instance_too_large when
/// C(|pool|, k) exceeds kMaxEnumeratedSubsets.
SubsetOptimum brute_force_max_logdet(const TokenMatrix& tokens,
                                     const IndexSet& pool, Index k);

/// F(S) = sum over pool of max_{j in S} s(i, j), unit weights.
double facility_location_value(const TokenMatrix& tokens, const IndexSet& pool,
                               const IndexSet& subset);

SubsetOptimum brute_force_facility_location(const TokenMatrix& tokens,
                                            const IndexSet& pool, Index k);

/// Replays farthest point sampling from the trace's first pick with a full
/// pairwise distance table and checks every later pick. Returns a description
/// of the first violation, if any.
std::optional<std::string> verify_fps(const TokenMatrix& tokens,
                                      const IndexSet& pool,
                                      const std::vector<Index>& order);

struct DppTrialSummary {
  Index trials = 0;
  Index mismatches = 0;          // fast greedy != naive greedy
  Index exceeded_optimum = 0;    // greedy log det > exhaustive optimum
  double min_ratio = 1.0;        // greedy det / optimal det
  double median_ratio = 1.0;
  std::vector<double> ratios;
  std::vector<std::string> failures;

  bool ok() const { return mismatches == 0 && exceeded_optimum == 0; }
};

/// Seeded random instances with 2 <= N <= max_n and 1 <= k <= min(max_k, N).
/// Each trial draws from its own sub-seed, so results do not depend on how
/// trials are scheduled.
DppTrialSummary run_dpp_trials(Index trials, Index max_n, Index max_k,
                               std::uint64_t seed);

}  // namespace promprune::oracle
