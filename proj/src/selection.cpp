#include "promprune/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace promprune {

namespace {

void check_selector_args(const TokenMatrix& tokens, const IndexSet& pool,
                         Index k) {
  validate_tokens(tokens);
  if (!pool.fits(tokens.rows())) {
    throw Error(ErrorKind::invalid_input, "pool index out of range");
  }
  if (k < 0 || k > pool.size()) {
    throw Error(ErrorKind::invalid_budget,
                "cannot select " + std::to_string(k) + " tokens from a pool of " +
                    std::to_string(pool.size()));
  }
}

// Normalized pool rows, P x d.
TokenMatrix pool_rows(const TokenMatrix& tokens, const IndexSet& pool,
                      double epsilon) {
  TokenMatrix rows(pool.size(), tokens.cols());
  for (Index p = 0; p < pool.size(); ++p) {
    const double norm = tokens.row(pool[p]).norm();
    if (norm == 0.0) {
      rows.row(p).setZero();
    } else {
      rows.row(p) = (1.0 / (norm + epsilon)) * tokens.row(pool[p]);
    }
  }
  return rows;
}

// Cosine self-similarity: exactly 1 for nonzero rows, 0 for zero rows.
Vector unit_diagonal(const TokenMatrix& normalized) {
  Vector diag(normalized.rows());
  for (Index p = 0; p < normalized.rows(); ++p) {
    diag(p) = normalized.row(p).squaredNorm() > 0.0 ? 1.0 : 0.0;
  }
  return diag;
}

// Max-heap over stale marginal gains; ties resolve to the lowest position.
struct HeapEntry {
  double gain;
  Index pos;
};

struct HeapOrder {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.pos > b.pos;
  }
};

class LazyGreedy {
 public:
  explicit LazyGreedy(const std::vector<double>& initial)
      : stamp_(initial.size(), 0) {
    heap_.reserve(initial.size());
    for (size_t p = 0; p < initial.size(); ++p) {
      heap_.push_back({initial[p], static_cast<Index>(p)});
    }
    std::make_heap(heap_.begin(), heap_.end(), HeapOrder{});
  }

  // Candidate with the largest up-to-date gain at `step`. Stale candidates
  // are handed to `refresh`, which must overwrite the gain with its value at
  // `step`. Gains must never increase between steps; stale gains are then
  // upper bounds and the first up-to-date entry on top is the exact maximum.
  template <typename Refresh>
  HeapEntry pop_best(Index step, Refresh&& refresh) {
    while (true) {
      std::pop_heap(heap_.begin(), heap_.end(), HeapOrder{});
      HeapEntry top = heap_.back();
      heap_.pop_back();
      if (stamp_[static_cast<size_t>(top.pos)] == step) return top;
      refresh(top);
      stamp_[static_cast<size_t>(top.pos)] = step;
      push_back(top);
    }
  }

  void push_back(const HeapEntry& entry) {
    heap_.push_back(entry);
    std::push_heap(heap_.begin(), heap_.end(), HeapOrder{});
  }

  bool empty() const { return heap_.empty(); }

 private:
  std::vector<HeapEntry> heap_;
  std::vector<Index> stamp_;
};

GreedyTrace finish(std::vector<Index> order, std::vector<double> gains,
                   Index fallback) {
  GreedyTrace trace;
  trace.selected = IndexSet::from_unsorted(order);
  trace.order = std::move(order);
  trace.gains = std::move(gains);
  trace.fallback_picks = fallback;
  return trace;
}

}  // namespace

SaliencyVector reduce_head_attention(const Matrix& head_scores,
                                     AttentionReduction /*mode*/) {
  if (head_scores.rows() < 1 || head_scores.cols() < 1) {
    throw Error(ErrorKind::invalid_input,
                "head scores need at least one head and one token");
  }
  if (!head_scores.allFinite() || head_scores.minCoeff() < 0.0) {
    throw Error(ErrorKind::invalid_input,
                "head scores must be finite and nonnegative");
  }
  return head_scores.colwise().mean().transpose();
}

void validate_saliency(const SaliencyVector& saliency, Index n_tokens) {
  if (saliency.size() != n_tokens) {
    throw Error(ErrorKind::invalid_input,
                "saliency length " + std::to_string(saliency.size()) +
                    " does not match " + std::to_string(n_tokens) + " tokens");
  }
  if (!saliency.allFinite() || (n_tokens > 0 && saliency.minCoeff() < 0.0)) {
    throw Error(ErrorKind::invalid_input,
                "saliency must be finite and nonnegative");
  }
}

IndexSet saliency_topk(const SaliencyVector& saliency, Index k) {
  validate_saliency(saliency, saliency.size());
  if (k < 0 || k > saliency.size()) {
    throw Error(ErrorKind::invalid_budget,
                "top-k of " + std::to_string(k) + " exceeds " +
                    std::to_string(saliency.size()) + " tokens");
  }
  std::vector<Index> order(static_cast<size_t>(saliency.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](Index a, Index b) {
                      if (saliency(a) != saliency(b)) {
                        return saliency(a) > saliency(b);
                      }
                      return a < b;
                    });
  order.resize(static_cast<size_t>(k));
  return IndexSet::from_unsorted(std::move(order));
}

SquareMatrix cosine_kernel(const TokenMatrix& tokens, const IndexSet& pool,
                           double epsilon) {
  check_selector_args(tokens, pool, 0);
  if (pool.empty()) {
    throw Error(ErrorKind::invalid_input, "cosine kernel over an empty pool");
  }
  const TokenMatrix rows = pool_rows(tokens, pool, epsilon);
  const Vector diag = unit_diagonal(rows);
  if (diag.sum() == 0.0) {
    throw Error(ErrorKind::invalid_input, "all pooled rows are zero");
  }
  SquareMatrix kernel = rows * rows.transpose();
  kernel.diagonal() = diag;
  return kernel;
}

GreedyTrace dpp_greedy_map(const TokenMatrix& tokens, const IndexSet& pool,
                           Index k, const DppOptions& options) {
  check_selector_args(tokens, pool, k);
  if (!options.fallback_scores.empty() &&
      static_cast<Index>(options.fallback_scores.size()) != tokens.rows()) {
    throw Error(ErrorKind::invalid_input,
                "fallback scores must cover every token");
  }
  if (k == 0) return {};

  const Index n_pool = pool.size();
  const TokenMatrix rows = pool_rows(tokens, pool, options.epsilon);
  const Vector diag = unit_diagonal(rows);

  // residual[p] = L_pp - ||c_p||^2 for the picks c_p has been updated against.
  std::vector<double> residual(static_cast<size_t>(n_pool));
  for (Index p = 0; p < n_pool; ++p) {
    residual[static_cast<size_t>(p)] = diag(p) + options.jitter;
  }
  TokenMatrix chol = TokenMatrix::Zero(n_pool, k);
  TokenMatrix picked_rows(k, tokens.cols());
  std::vector<Index> picked_pos;
  std::vector<double> picked_scale;
  std::vector<Index> synced(static_cast<size_t>(n_pool), 0);
  std::vector<char> taken(static_cast<size_t>(n_pool), 0);
  std::vector<Index> order;
  std::vector<double> gains;
  Vector cross(k);

  // Brings an entry up to date with all picks so far.
  auto refresh = [&](HeapEntry& entry) {
    const Index a = entry.pos;
    const Index from = synced[static_cast<size_t>(a)];
    const Index to = static_cast<Index>(picked_pos.size());
    cross.head(to - from).noalias() =
        picked_rows.middleRows(from, to - from) * rows.row(a).transpose();
    double& r = residual[static_cast<size_t>(a)];
    for (Index t = from; t < to; ++t) {
      const Index j = picked_pos[static_cast<size_t>(t)];
      const double e = (cross(t - from) -
                        chol.row(j).head(t).dot(chol.row(a).head(t))) /
                       picked_scale[static_cast<size_t>(t)];
      chol(a, t) = e;
      r -= e * e;
    }
    synced[static_cast<size_t>(a)] = to;
    entry.gain = r;
  };

  LazyGreedy greedy(residual);
  for (Index step = 0; step < k; ++step) {
    const HeapEntry best = greedy.pop_best(step, refresh);
    if (best.gain < options.rank_threshold) {
      // Every remaining residual is at most best.gain.
      greedy.push_back(best);
      break;
    }
    picked_rows.row(step) = rows.row(best.pos);
    picked_pos.push_back(best.pos);
    picked_scale.push_back(std::sqrt(best.gain));
    taken[static_cast<size_t>(best.pos)] = 1;
    order.push_back(pool[best.pos]);
    gains.push_back(std::log(best.gain));
  }

  const Index missing = k - static_cast<Index>(order.size());
  if (missing > 0) {
    std::vector<Index> rest;
    for (Index p = 0; p < n_pool; ++p) {
      if (!taken[static_cast<size_t>(p)]) rest.push_back(p);
    }
    if (!options.fallback_scores.empty()) {
      const auto& scores = options.fallback_scores;
      std::stable_sort(rest.begin(), rest.end(), [&](Index a, Index b) {
        return scores[static_cast<size_t>(pool[a])] >
               scores[static_cast<size_t>(pool[b])];
      });
    }
    for (Index i = 0; i < missing; ++i) {
      order.push_back(pool[rest[static_cast<size_t>(i)]]);
    }
  }
  return finish(std::move(order), std::move(gains), missing);
}

GreedyTrace fps_select(const TokenMatrix& tokens, const IndexSet& pool,
                       Index k, const FpsOptions& options) {
  check_selector_args(tokens, pool, k);
  if (k == 0) return {};

  const Index n_pool = pool.size();
  Index start = 0;
  if (options.start == FpsStart::highest_saliency) {
    if (static_cast<Index>(options.saliency.size()) != tokens.rows()) {
      throw Error(ErrorKind::invalid_input,
                  "highest-saliency start needs a saliency score per token");
    }
    for (Index p = 1; p < n_pool; ++p) {
      if (options.saliency[static_cast<size_t>(pool[p])] >
          options.saliency[static_cast<size_t>(pool[start])]) {
        start = p;
      }
    }
  }

  const TokenMatrix rows = pool_rows(tokens, pool, options.epsilon);
  Vector min_dist =
      Vector::Constant(n_pool, std::numeric_limits<double>::infinity());
  std::vector<char> taken(static_cast<size_t>(n_pool), 0);
  std::vector<Index> order{pool[start]};
  std::vector<double> gains{std::numeric_limits<double>::infinity()};
  taken[static_cast<size_t>(start)] = 1;

  Index last = start;
  for (Index step = 1; step < k; ++step) {
    const Vector dist =
        (1.0 - (rows * rows.row(last).transpose()).array()).matrix();
    min_dist = min_dist.cwiseMin(dist);
    Index best = -1;
    for (Index p = 0; p < n_pool; ++p) {
      if (taken[static_cast<size_t>(p)]) continue;
      if (best < 0 || min_dist(p) > min_dist(best)) best = p;
    }
    taken[static_cast<size_t>(best)] = 1;
    order.push_back(pool[best]);
    gains.push_back(min_dist(best));
    last = best;
  }
  return finish(std::move(order), std::move(gains), 0);
}

GreedyTrace facility_location_select(const TokenMatrix& tokens,
                                     const IndexSet& pool, Index k,
                                     double epsilon) {
  check_selector_args(tokens, pool, k);
  if (k == 0) return {};

  const Index n_pool = pool.size();
  const TokenMatrix rows = pool_rows(tokens, pool, epsilon);
  SquareMatrix sim = rows * rows.transpose();
  sim.diagonal() = unit_diagonal(rows);
  sim = ((sim.array() + 1.0) * 0.5).cwiseMax(0.0).cwiseMin(1.0).matrix();

  // coverage(i) = max_{j in S} s(i, j); empty S covers nothing.
  Vector coverage = Vector::Zero(n_pool);
  auto marginal = [&](Index j) {
    return (sim.col(j) - coverage).cwiseMax(0.0).sum();
  };

  std::vector<double> initial(static_cast<size_t>(n_pool));
  for (Index j = 0; j < n_pool; ++j) initial[static_cast<size_t>(j)] = marginal(j);

  LazyGreedy greedy(initial);
  std::vector<Index> order;
  std::vector<double> gains;
  for (Index step = 0; step < k; ++step) {
    const HeapEntry best =
        greedy.pop_best(step, [&](HeapEntry& e) { e.gain = marginal(e.pos); });
    coverage = coverage.cwiseMax(sim.col(best.pos));
    order.push_back(pool[best.pos]);
    gains.push_back(best.gain);
  }
  return finish(std::move(order), std::move(gains), 0);
}

}  // namespace promprune
