#include "promprune/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "promprune/synth.hpp"

namespace promprune::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_pool(const TokenMatrix& tokens, const IndexSet& pool, Index k) {
  validate_tokens(tokens);
  if (!pool.fits(tokens.rows())) {
    throw Error(ErrorKind::invalid_input, "pool index out of range");
  }
  if (k < 0 || k > pool.size()) {
    throw Error(ErrorKind::invalid_budget, "k exceeds pool size");
  }
}

// Visits every k-combination of {0..n-1} in lexicographic order.
template <typename Visit>
void for_each_combination(Index n, Index k, Visit&& visit) {
  std::vector<Index> comb(static_cast<size_t>(k));
  for (Index i = 0; i < k; ++i) comb[static_cast<size_t>(i)] = i;
  while (true) {
    visit(std::span<const Index>(comb));
    Index i = k - 1;
    while (i >= 0 && comb[static_cast<size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++comb[static_cast<size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
    }
  }
}

void guard_enumeration(Index n, Index k) {
  if (binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k)) >
      kMaxEnumeratedSubsets) {
    throw Error(ErrorKind::instance_too_large,
                "C(" + std::to_string(n) + ", " + std::to_string(k) +
                    ") exceeds the enumeration guard");
  }
}

IndexSet to_tokens(const IndexSet& pool, std::span<const Index> positions) {
  std::vector<Index> out;
  for (Index p : positions) out.push_back(pool[p]);
  return IndexSet::from_unsorted(std::move(out));
}

std::vector<Index> positions_of(const IndexSet& pool,
                                std::span<const Index> tokens) {
  std::vector<Index> out;
  for (Index idx : tokens) {
    auto it = std::lower_bound(pool.begin(), pool.end(), idx);
    if (it == pool.end() || *it != idx) {
      throw Error(ErrorKind::invalid_input, "subset is not inside the pool");
    }
    out.push_back(static_cast<Index>(it - pool.begin()));
  }
  return out;
}

std::vector<Index> positions_in(const IndexSet& pool, const IndexSet& subset) {
  return positions_of(pool, subset.indices());
}

SquareMatrix similarity_table(const TokenMatrix& tokens, const IndexSet& pool) {
  SquareMatrix s = naive_cosine_kernel(tokens, pool);
  for (Index i = 0; i < s.rows(); ++i) {
    for (Index j = 0; j < s.cols(); ++j) {
      s(i, j) = std::clamp((s(i, j) + 1.0) / 2.0, 0.0, 1.0);
    }
  }
  return s;
}

}  // namespace

SquareMatrix naive_cosine_kernel(const TokenMatrix& tokens,
                                 const IndexSet& pool) {
  const Index n = pool.size();
  std::vector<double> norms(static_cast<size_t>(n));
  for (Index a = 0; a < n; ++a) {
    double sum = 0.0;
    for (Index c = 0; c < tokens.cols(); ++c) {
      sum += tokens(pool[a], c) * tokens(pool[a], c);
    }
    norms[static_cast<size_t>(a)] = std::sqrt(sum);
  }
  SquareMatrix kernel(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      const double na = norms[static_cast<size_t>(a)];
      const double nb = norms[static_cast<size_t>(b)];
      if (na == 0.0 || nb == 0.0) {
        kernel(a, b) = 0.0;
      } else if (a == b) {
        kernel(a, b) = 1.0;
      } else {
        double dot = 0.0;
        for (Index c = 0; c < tokens.cols(); ++c) {
          dot += tokens(pool[a], c) * tokens(pool[b], c);
        }
        kernel(a, b) = dot / (na * nb);
      }
    }
  }
  return kernel;
}

double log_det(const SquareMatrix& kernel, std::span<const Index> positions,
               double jitter) {
  const Index m = static_cast<Index>(positions.size());
  if (m == 0) return 0.0;
  SquareMatrix sub(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) {
      sub(a, b) = kernel(positions[static_cast<size_t>(a)],
                         positions[static_cast<size_t>(b)]);
    }
    sub(a, a) += jitter;
  }
  const double det = Eigen::PartialPivLU<SquareMatrix>(sub).determinant();
  return det > 0.0 ? std::log(det) : kNegInf;
}

double subset_log_det(const TokenMatrix& tokens, const IndexSet& pool,
                      const IndexSet& subset, double jitter) {
  const std::vector<Index> pos = positions_in(pool, subset);
  return log_det(naive_cosine_kernel(tokens, pool), pos, jitter);
}

std::vector<Index> naive_greedy_dpp(const TokenMatrix& tokens,
                                    const IndexSet& pool, Index k,
                                    const DppOptions& options) {
  check_pool(tokens, pool, k);
  const SquareMatrix kernel = naive_cosine_kernel(tokens, pool);
  const Index n = pool.size();

  std::vector<Index> chosen;  // pool positions
  std::vector<char> taken(static_cast<size_t>(n), 0);
  auto det_of = [&](const std::vector<Index>& pos) {
    const Index m = static_cast<Index>(pos.size());
    if (m == 0) return 1.0;
    SquareMatrix sub(m, m);
    for (Index a = 0; a < m; ++a) {
      for (Index b = 0; b < m; ++b) {
        sub(a, b) = kernel(pos[static_cast<size_t>(a)], pos[static_cast<size_t>(b)]);
      }
      sub(a, a) += options.jitter;
    }
    return Eigen::PartialPivLU<SquareMatrix>(sub).determinant();
  };

  while (static_cast<Index>(chosen.size()) < k) {
    const double base = det_of(chosen);
    Index best = -1;
    double best_ratio = 0.0;
    for (Index c = 0; c < n; ++c) {
      if (taken[static_cast<size_t>(c)]) continue;
      std::vector<Index> trial = chosen;
      trial.push_back(c);
      const double ratio = det_of(trial) / base;
      if (best < 0 || ratio > best_ratio) {
        best = c;
        best_ratio = ratio;
      }
    }
    if (best_ratio < options.rank_threshold) break;
    chosen.push_back(best);
    taken[static_cast<size_t>(best)] = 1;
  }

  std::vector<Index> order;
  for (Index p : chosen) order.push_back(pool[p]);
  if (static_cast<Index>(order.size()) < k) {
    std::vector<Index> rest;
    for (Index p = 0; p < n; ++p) {
      if (!taken[static_cast<size_t>(p)]) rest.push_back(pool[p]);
    }
    if (!options.fallback_scores.empty()) {
      // Selection sort keeps the lowest index on equal scores.
      for (size_t i = 0; i < rest.size(); ++i) {
        size_t best = i;
        for (size_t j = i + 1; j < rest.size(); ++j) {
          if (options.fallback_scores[static_cast<size_t>(rest[j])] >
              options.fallback_scores[static_cast<size_t>(rest[best])]) {
            best = j;
          }
        }
        std::rotate(rest.begin() + static_cast<std::ptrdiff_t>(i),
                    rest.begin() + static_cast<std::ptrdiff_t>(best),
                    rest.begin() + static_cast<std::ptrdiff_t>(best) + 1);
      }
    }
    for (size_t i = 0; static_cast<Index>(order.size()) < k; ++i) {
      order.push_back(rest[i]);
    }
  }
  return order;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    if (result > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * num / i;
  }
  return result;
}

SubsetOptimum brute_force_max_logdet(const TokenMatrix& tokens,
                                     const IndexSet& pool, Index k) {
  check_pool(tokens, pool, k);
  guard_enumeration(pool.size(), k);
  const SquareMatrix kernel = naive_cosine_kernel(tokens, pool);
  std::vector<Index> best;
  double best_value = kNegInf;
  bool first = true;
  for_each_combination(pool.size(), k, [&](std::span<const Index> comb) {
    const double value = log_det(kernel, comb);
    if (first || value > best_value) {
      best.assign(comb.begin(), comb.end());
      best_value = value;
      first = false;
    }
  });
  return {to_tokens(pool, best), best_value};
}

double facility_location_value(const TokenMatrix& tokens, const IndexSet& pool,
                               const IndexSet& subset) {
  const std::vector<Index> pos = positions_in(pool, subset);
  const SquareMatrix s = similarity_table(tokens, pool);
  double total = 0.0;
  for (Index i = 0; i < pool.size(); ++i) {
    double best = 0.0;
    for (Index j : pos) best = std::max(best, s(i, j));
    total += best;
  }
  return total;
}

SubsetOptimum brute_force_facility_location(const TokenMatrix& tokens,
                                            const IndexSet& pool, Index k) {
  check_pool(tokens, pool, k);
  guard_enumeration(pool.size(), k);
  const SquareMatrix s = similarity_table(tokens, pool);
  std::vector<Index> best;
  double best_value = -1.0;
  for_each_combination(pool.size(), k, [&](std::span<const Index> comb) {
    double value = 0.0;
    for (Index i = 0; i < pool.size(); ++i) {
      double cover = 0.0;
      for (Index j : comb) cover = std::max(cover, s(i, j));
      value += cover;
    }
    if (value > best_value) {
      best.assign(comb.begin(), comb.end());
      best_value = value;
    }
  });
  return {to_tokens(pool, best), best_value};
}

std::optional<std::string> verify_fps(const TokenMatrix& tokens,
                                      const IndexSet& pool,
                                      const std::vector<Index>& order) {
  constexpr double kTol = 1e-12;
  const SquareMatrix kernel = naive_cosine_kernel(tokens, pool);
  std::vector<Index> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    return "duplicate pick";
  }
  const std::vector<Index> order_pos = positions_of(pool, order);

  std::vector<char> taken(static_cast<size_t>(pool.size()), 0);
  for (size_t m = 0; m < order_pos.size(); ++m) {
    if (m > 0) {
      // min distance of every free candidate to picks 0..m-1
      std::vector<double> min_dist(static_cast<size_t>(pool.size()),
                                   std::numeric_limits<double>::infinity());
      double max_min = -std::numeric_limits<double>::infinity();
      for (Index c = 0; c < pool.size(); ++c) {
        if (taken[static_cast<size_t>(c)]) continue;
        for (size_t t = 0; t < m; ++t) {
          min_dist[static_cast<size_t>(c)] =
              std::min(min_dist[static_cast<size_t>(c)],
                       1.0 - kernel(c, order_pos[t]));
        }
        max_min = std::max(max_min, min_dist[static_cast<size_t>(c)]);
      }
      const Index pick = order_pos[m];
      const double got = min_dist[static_cast<size_t>(pick)];
      std::ostringstream why;
      if (got < max_min - kTol) {
        why << "pick " << m << " (token " << order[m] << ") has min distance "
            << got << " but the maximum is " << max_min;
        return why.str();
      }
      for (Index c = 0; c < pick; ++c) {
        if (!taken[static_cast<size_t>(c)] &&
            min_dist[static_cast<size_t>(c)] > got + kTol) {
          why << "pick " << m << " skipped lower token " << pool[c]
              << " with larger min distance";
          return why.str();
        }
      }
    }
    taken[static_cast<size_t>(order_pos[m])] = 1;
  }
  return std::nullopt;
}

DppTrialSummary run_dpp_trials(Index trials, Index max_n, Index max_k,
                               std::uint64_t seed) {
  if (trials < 1 || max_n < 2 || max_k < 1) {
    throw Error(ErrorKind::invalid_input,
                "need trials >= 1, max_n >= 2 and max_k >= 1");
  }
  DppTrialSummary summary;
  summary.trials = trials;
  // Mixing the seed first keeps nearby seeds from sharing trials.
  const std::uint64_t base = splitmix64(seed);
  for (Index t = 0; t < trials; ++t) {
    std::mt19937_64 rng(splitmix64(base + static_cast<std::uint64_t>(t)));
    const Index n = std::uniform_int_distribution<Index>(2, max_n)(rng);
    const Index k =
        std::uniform_int_distribution<Index>(1, std::min(max_k, n))(rng);
    const Index d =
        std::uniform_int_distribution<Index>(k, std::max<Index>(k, 8))(rng);
    std::normal_distribution<double> gauss;
    TokenMatrix tokens(n, d);
    for (Index i = 0; i < n; ++i) {
      for (Index c = 0; c < d; ++c) tokens(i, c) = gauss(rng);
    }
    const IndexSet pool = IndexSet::range(n);

    const GreedyTrace fast = dpp_greedy_map(tokens, pool, k);
    const std::vector<Index> naive = naive_greedy_dpp(tokens, pool, k);
    if (fast.order != naive) {
      ++summary.mismatches;
      summary.failures.push_back("trial " + std::to_string(t) +
                                 ": incremental and naive greedy disagree");
    }

    const SubsetOptimum best = brute_force_max_logdet(tokens, pool, k);
    const double greedy_value = subset_log_det(tokens, pool, fast.selected);
    if (greedy_value > best.value + 1e-9) {
      ++summary.exceeded_optimum;
      summary.failures.push_back("trial " + std::to_string(t) +
                                 ": greedy exceeds exhaustive optimum");
    }
    const double ratio = best.value == kNegInf
                             ? 1.0
                             : std::exp(greedy_value - best.value);
    summary.ratios.push_back(ratio);
  }
  std::vector<double> sorted = summary.ratios;
  std::sort(sorted.begin(), sorted.end());
  summary.min_ratio = sorted.front();
  const size_t mid = sorted.size() / 2;
  summary.median_ratio = sorted.size() % 2 == 1
                             ? sorted[mid]
                             : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return summary;
}

}  // namespace promprune::oracle
