#include "promprune/pipeline.hpp"

#include <chrono>
#include <optional>
#include <string>

namespace promprune {

std::string_view to_string(Stage stage) {
  return stage == Stage::saliency ? "saliency" : "coverage";
}

Stage parse_stage(std::string_view name) {
  if (name == "saliency") return Stage::saliency;
  if (name == "coverage") return Stage::coverage;
  throw Error(ErrorKind::parse, "unknown stage '" + std::string(name) + "'");
}

IndexSet SelectionResult::stage_indices(Stage stage) const {
  std::vector<Index> out;
  for (size_t i = 0; i < stage_of.size(); ++i) {
    if (stage_of[i] == stage) out.push_back(selected.indices()[i]);
  }
  return IndexSet::from_sorted(std::move(out));
}

bool SelectionResult::operator==(const SelectionResult& other) const {
  return total_budget == other.total_budget && selected == other.selected &&
         stage_of == other.stage_of && coverage_order == other.coverage_order &&
         split == other.split && entropy == other.entropy &&
         diagnostics == other.diagnostics;
}

namespace {

using Clock = std::chrono::steady_clock;

double micros(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration<double, std::micro>(to - from).count();
}

GreedyTrace run_stage2(const TokenMatrix& tokens, const SaliencyVector& saliency,
                       const IndexSet& pool, Index k,
                       const CompressConfig& config) {
  const std::span<const double> scores(saliency.data(),
                                       static_cast<size_t>(saliency.size()));
  switch (config.diversity) {
    case DiversityMethod::dpp: {
      DppOptions options;
      options.epsilon = config.epsilon;
      options.fallback_scores = scores;
      return dpp_greedy_map(tokens, pool, k, options);
    }
    case DiversityMethod::fps: {
      FpsOptions options;
      options.start = config.fps_start;
      options.epsilon = config.epsilon;
      options.saliency = scores;
      return fps_select(tokens, pool, k, options);
    }
    case DiversityMethod::facility_location:
      return facility_location_select(tokens, pool, k, config.epsilon);
  }
  return {};
}

void add_diagnostics(const TokenMatrix& tokens, const CompressConfig& config,
                     const GreedyTrace& coverage, SelectionResult& result) {
  const Index m = result.selected.size();
  TokenMatrix rows(m, tokens.cols());
  for (Index i = 0; i < m; ++i) rows.row(i) = tokens.row(result.selected[i]);
  rows = l2_normalize_rows(rows, config.epsilon);
  SquareMatrix kernel = rows * rows.transpose();
  for (Index i = 0; i < m; ++i) {
    kernel(i, i) = rows.row(i).squaredNorm() > 0.0 ? 1.0 : 0.0;
  }

  if (m >= 2) {
    double min_dist = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < m; ++j) {
      for (Index i = j + 1; i < m; ++i) min_dist = std::min(min_dist, 1.0 - kernel(i, j));
    }
    result.diagnostics["min_pairwise_cosine_distance"] = min_dist;
  }

  std::vector<Index> cov;
  for (Index i = 0; i < m; ++i) {
    if (result.stage_of[static_cast<size_t>(i)] == Stage::coverage) cov.push_back(i);
  }
  const Index c = static_cast<Index>(cov.size());
  SquareMatrix sub(c, c);
  for (Index a = 0; a < c; ++a) {
    for (Index b = 0; b < c; ++b) sub(a, b) = kernel(cov[a], cov[b]);
  }
  sub.diagonal().array() += DppOptions{}.jitter;
  Eigen::LLT<SquareMatrix> llt(sub);
  if (llt.info() == Eigen::Success) {
    result.diagnostics["coverage_logdet"] =
        2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  if (config.diversity == DiversityMethod::dpp) {
    result.diagnostics["dpp_fallback_picks"] =
        static_cast<double>(coverage.fallback_picks);
  }
}

SelectionResult run(const TokenMatrix& tokens, const SaliencyVector& saliency,
                    const CompressConfig& config,
                    std::optional<Index> t_sal_fixed) {
  const auto start = Clock::now();
  config.validate();
  validate_tokens(tokens);
  validate_saliency(saliency, tokens.rows());
  if (config.total_budget > tokens.rows()) {
    throw Error(ErrorKind::invalid_budget,
                "budget " + std::to_string(config.total_budget) + " exceeds " +
                    std::to_string(tokens.rows()) + " tokens");
  }

  SelectionResult result;
  result.total_budget = config.total_budget;

  result.entropy = spectral_entropy(tokens);
  const auto t_entropy = Clock::now();

  result.split = t_sal_fixed
                     ? fixed_budget(result.entropy.normalized_entropy,
                                    *t_sal_fixed, config)
                     : allocate_budget(result.entropy.normalized_entropy, config);
  const auto t_alloc = Clock::now();

  const IndexSet salient = saliency_topk(saliency, result.split.t_sal);
  const auto t_stage1 = Clock::now();

  GreedyTrace coverage;
  if (result.split.t_cov > 0) {
    const IndexSet pool = set_difference(IndexSet::range(tokens.rows()), salient);
    coverage = run_stage2(tokens, saliency, pool, result.split.t_cov, config);
  }
  const auto t_stage2 = Clock::now();

  result.selected = set_union(salient, coverage.selected);
  result.stage_of.reserve(static_cast<size_t>(result.selected.size()));
  for (Index idx : result.selected) {
    result.stage_of.push_back(salient.contains(idx) ? Stage::saliency
                                                    : Stage::coverage);
  }
  result.coverage_order = coverage.order;
  const auto t_selected = Clock::now();
  add_diagnostics(tokens, config, coverage, result);
  const auto end = Clock::now();

  result.timings.entropy_us = micros(start, t_entropy);
  result.timings.allocation_us = micros(t_entropy, t_alloc);
  result.timings.stage1_us = micros(t_alloc, t_stage1);
  result.timings.stage2_us = micros(t_stage1, t_stage2);
  result.timings.total_us = micros(start, t_selected);
  result.timings.diagnostics_us = micros(t_selected, end);
  return result;
}

}  // namespace

SelectionResult compress(const TokenMatrix& tokens,
                         const SaliencyVector& saliency,
                         const CompressConfig& config) {
  return run(tokens, saliency, config, std::nullopt);
}

SelectionResult compress_fixed(const TokenMatrix& tokens,
                               const SaliencyVector& saliency,
                               Index t_sal_fixed, const CompressConfig& config) {
  return run(tokens, saliency, config, t_sal_fixed);
}

}  // namespace promprune
