#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "helpers.hpp"
#include "promprune/oracle.hpp"
#include "promprune/selection.hpp"

using namespace promprune;

namespace {

TokenMatrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
  TokenMatrix m(static_cast<Index>(rows.size()),
                static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

IndexSet set_of(std::vector<Index> v) { return IndexSet::from_unsorted(std::move(v)); }

void check_trace(const GreedyTrace& t, const IndexSet& pool, Index k) {
  CHECK(t.selected.size() == k);
  CHECK(static_cast<Index>(t.order.size()) == k);
  CHECK(std::set<Index>(t.order.begin(), t.order.end()).size() ==
        static_cast<size_t>(k));
  for (Index idx : t.order) CHECK(pool.contains(idx));
  CHECK(IndexSet::from_unsorted(t.order) == t.selected);
}

}  // namespace

TEST_CASE("index sets") {
  const IndexSet a = set_of({5, 1, 3});
  CHECK(a.indices() == std::vector<Index>{1, 3, 5});
  CHECK(a.contains(3));
  CHECK_FALSE(a.contains(2));
  CHECK(a.fits(6));
  CHECK_FALSE(a.fits(5));
  CHECK_THROWS_AS(IndexSet::from_unsorted({1, 1}), Error);
  CHECK_THROWS_AS(IndexSet::from_sorted({2, 1}), Error);
  CHECK_THROWS_AS(IndexSet::from_sorted({-1, 1}), Error);
  const IndexSet r = IndexSet::range(6);
  CHECK(set_difference(r, a) == set_of({0, 2, 4}));
  CHECK(set_union(set_difference(r, a), a) == r);
  CHECK(disjoint(a, set_of({0, 2})));
  CHECK_FALSE(disjoint(a, set_of({0, 5})));
}

TEST_CASE("head reduction") {
  Matrix one(1, 3);
  one << 0.2, 0.5, 0.3;
  CHECK(reduce_head_attention(one, AttentionReduction::cls_row) ==
        one.row(0).transpose());

  Matrix two(2, 3);
  two << 1, 0, 3, 3, 2, 1;
  Vector expected(3);
  expected << 2, 1, 2;
  CHECK(reduce_head_attention(two, AttentionReduction::global_average) == expected);

  Matrix same(4, 3);
  for (Index h = 0; h < 4; ++h) same.row(h) << 0.25, 0.125, 0.5;
  CHECK(reduce_head_attention(same, AttentionReduction::cls_row) ==
        same.row(0).transpose());

  Matrix neg = Matrix::Ones(2, 2);
  neg(1, 0) = -0.1;
  CHECK_THROWS_AS(reduce_head_attention(neg, AttentionReduction::cls_row), Error);
}

TEST_CASE("saliency top-k") {
  Vector s(3);
  s << 0.1, 0.9, 0.5;
  CHECK(saliency_topk(s, 2) == set_of({1, 2}));
  s << 0.5, 0.5, 0.1;
  CHECK(saliency_topk(s, 1) == set_of({0}));
  CHECK(saliency_topk(s, 0).empty());
  CHECK_THROWS_AS(saliency_topk(s, 4), Error);

  std::mt19937_64 rng(61);
  std::uniform_int_distribution<int> level(0, 5);  // plenty of ties
  for (int trial = 0; trial < 100; ++trial) {
    Vector v(30);
    for (Index i = 0; i < 30; ++i) v(i) = level(rng);
    std::vector<Index> idx(30);
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Index a, Index b) { return v(a) > v(b); });
    const Index k = trial % 31;
    idx.resize(static_cast<size_t>(k));
    CHECK(saliency_topk(v, k) == IndexSet::from_unsorted(idx));
  }
}

TEST_CASE("cosine kernel") {
  const IndexSet all = IndexSet::range(3);
  CHECK(cosine_kernel(TokenMatrix::Identity(3, 3), all) == Matrix::Identity(3, 3));

  const TokenMatrix dup = rows_of({{1, 2}, {2, 4}, {0, 1}});
  const SquareMatrix k = cosine_kernel(dup, all);
  CHECK(k(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k(0, 0) == 1.0);

  const TokenMatrix zero = rows_of({{1, 0}, {0, 0}});
  const SquareMatrix z = cosine_kernel(zero, IndexSet::range(2));
  CHECK(z(1, 1) == 0.0);
  CHECK(z(0, 1) == 0.0);
  CHECK_THROWS_AS(cosine_kernel(TokenMatrix::Zero(2, 2), IndexSet::range(2)), Error);

  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const TokenMatrix t = testutil::gaussian(12, 5, rng);
    const IndexSet pool = set_of({0, 2, 3, 7, 8, 11});
    const SquareMatrix fast = cosine_kernel(t, pool);
    CHECK((fast - oracle::naive_cosine_kernel(t, pool)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(sym_eigenvalues(fast).eigenvalues.minCoeff() >= -1e-8);
    Eigen::SelfAdjointEigenSolver<Matrix> raw(fast, Eigen::EigenvaluesOnly);
    CHECK(raw.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("dpp picks") {
  const TokenMatrix unit = TokenMatrix::Identity(4, 4);
  CHECK(dpp_greedy_map(unit, IndexSet::range(4), 1).order == std::vector<Index>{0});

  const TokenMatrix e = rows_of({{1, 0}, {1, 0}, {0, 1}});
  const GreedyTrace t = dpp_greedy_map(e, IndexSet::range(3), 2);
  CHECK(t.selected == set_of({0, 2}));
  CHECK(t.fallback_picks == 0);

  // Pool positions differ from token indices.
  const GreedyTrace sub = dpp_greedy_map(e, set_of({1, 2}), 2);
  CHECK(sub.order == std::vector<Index>{1, 2});

  CHECK(dpp_greedy_map(e, IndexSet::range(3), 0).order.empty());
  CHECK_THROWS_AS(dpp_greedy_map(e, IndexSet::range(3), 4), Error);
  CHECK_THROWS_AS(dpp_greedy_map(e, set_of({0, 3}), 1), Error);
}

TEST_CASE("dpp matches naive greedy and brute force on 8 vectors") {
  std::mt19937_64 rng(71);
  const IndexSet pool = IndexSet::range(8);
  for (int trial = 0; trial < 30; ++trial) {
    const TokenMatrix t = l2_normalize_rows(testutil::gaussian(8, 4, rng));
    const GreedyTrace fast = dpp_greedy_map(t, pool, 3);
    check_trace(fast, pool, 3);
    CHECK(fast.order == oracle::naive_greedy_dpp(t, pool, 3));
    const oracle::SubsetOptimum best = oracle::brute_force_max_logdet(t, pool, 3);
    const double greedy = oracle::subset_log_det(t, pool, fast.selected);
    CHECK(best.value >= greedy - 1e-9);
    CHECK(oracle::binomial(8, 3) == 56);
  }
}

TEST_CASE("dpp matches naive greedy on varied instances") {
  std::mt19937_64 rng(73);
  std::uniform_int_distribution<Index> size(2, 16);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = size(rng);
    const Index d = 1 + trial % 6;
    TokenMatrix t = testutil::gaussian(n, d, rng);
    if (trial % 4 == 1) t.row(n - 1) = t.row(0);       // duplicate
    if (trial % 4 == 2) t.row(n / 2).setZero();        // zero row
    if (trial % 4 == 3) t.row(1) = -3.0 * t.row(0);    // antiparallel
    const Index k = 1 + trial % std::min<Index>(6, n);
    Vector sal = t.rowwise().norm();
    DppOptions opts;
    opts.fallback_scores = std::span<const double>(sal.data(), static_cast<size_t>(n));
    const IndexSet pool = IndexSet::range(n);
    const GreedyTrace fast = dpp_greedy_map(t, pool, k, opts);
    check_trace(fast, pool, k);
    CHECK(fast.order == oracle::naive_greedy_dpp(t, pool, k, opts));
  }
}

TEST_CASE("dpp gains never increase") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 20; ++trial) {
    const TokenMatrix t = testutil::gaussian(60, 20, rng);
    const GreedyTrace g = dpp_greedy_map(t, IndexSet::range(60), 20);
    REQUIRE(g.gains.size() == 20);
    for (size_t i = 1; i < g.gains.size(); ++i) {
      CHECK(g.gains[i] <= g.gains[i - 1] + 1e-12);
    }
  }
}

TEST_CASE("dpp fills past the numerical rank by score") {
  // Five tokens in a plane: rank 2.
  const TokenMatrix t = rows_of({{1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {2, 0, 0}, {1, -1, 0}});
  const std::vector<double> scores{0.1, 0.2, 0.9, 0.3, 0.8};
  DppOptions opts;
  opts.fallback_scores = scores;
  const GreedyTrace g = dpp_greedy_map(t, IndexSet::range(5), 4, opts);
  REQUIRE(g.order.size() == 4);
  CHECK(g.fallback_picks == 2);
  CHECK(g.gains.size() == 2);
  CHECK(g.order[0] == 0);
  CHECK(g.order[1] == 1);
  CHECK(g.order[2] == 2);
  CHECK(g.order[3] == 4);

  const GreedyTrace plain = dpp_greedy_map(t, IndexSet::range(5), 4);
  CHECK(plain.order == std::vector<Index>{0, 1, 2, 3});

  const GreedyTrace zeros = dpp_greedy_map(TokenMatrix::Zero(3, 2), IndexSet::range(3), 2);
  CHECK(zeros.order == std::vector<Index>{0, 1});
  CHECK(zeros.fallback_picks == 2);
}

TEST_CASE("dpp deterministic and insensitive to row scale") {
  std::mt19937_64 rng(83);
  TokenMatrix t = testutil::gaussian(40, 10, rng);
  const GreedyTrace a = dpp_greedy_map(t, IndexSet::range(40), 10);
  const GreedyTrace b = dpp_greedy_map(t, IndexSet::range(40), 10);
  CHECK(a.order == b.order);
  CHECK(a.gains == b.gains);
  t.row(3) *= 1000.0;
  CHECK(dpp_greedy_map(t, IndexSet::range(40), 10).order == a.order);
}

TEST_CASE("brute force optimum") {
  const IndexSet pool = IndexSet::range(5);
  const oracle::SubsetOptimum full =
      oracle::brute_force_max_logdet(TokenMatrix::Identity(5, 5), pool, 5);
  CHECK(full.subset == pool);
  const oracle::SubsetOptimum ortho =
      oracle::brute_force_max_logdet(TokenMatrix::Identity(5, 5), pool, 3);
  CHECK(ortho.subset == set_of({0, 1, 2}));
  CHECK(ortho.value == doctest::Approx(0.0).epsilon(1e-12));

  try {
    oracle::brute_force_max_logdet(TokenMatrix::Identity(40, 40), IndexSet::range(40), 20);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::instance_too_large);
  }
}

TEST_CASE("fps") {
  const double c = std::cos(std::numbers::pi / 2);
  const TokenMatrix angles = rows_of({{1, 0}, {c, 1}, {-1, 0}});
  const GreedyTrace g = fps_select(angles, IndexSet::range(3), 3);
  CHECK(g.order == std::vector<Index>{0, 2, 1});
  CHECK(g.gains[1] == doctest::Approx(2.0));
  CHECK(g.gains[2] == doctest::Approx(1.0));
  CHECK_FALSE(oracle::verify_fps(angles, IndexSet::range(3), g.order).has_value());

  const TokenMatrix dup = rows_of({{1, 0}, {1, 0}, {0.6, 0.8}, {0, 1}});
  const GreedyTrace d = fps_select(dup, IndexSet::range(4), 3);
  CHECK(d.order == std::vector<Index>{0, 3, 2});
  CHECK(fps_select(dup, IndexSet::range(4), 4).selected == IndexSet::range(4));

  const std::vector<double> sal{0.1, 0.2, 0.7, 0.3};
  FpsOptions opts;
  opts.start = FpsStart::highest_saliency;
  opts.saliency = sal;
  CHECK(fps_select(dup, IndexSet::range(4), 1).order == std::vector<Index>{0});
  CHECK(fps_select(dup, IndexSet::range(4), 1, opts).order == std::vector<Index>{2});
  opts.saliency = {};
  CHECK_THROWS_AS(fps_select(dup, IndexSet::range(4), 1, opts), Error);
}

TEST_CASE("fps verified by naive replay") {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 50; ++trial) {
    const TokenMatrix t = testutil::gaussian(25, 4, rng);
    const IndexSet pool = set_difference(IndexSet::range(25), set_of({3, 9}));
    const GreedyTrace g = fps_select(t, pool, 12);
    check_trace(g, pool, 12);
    const auto problem = oracle::verify_fps(t, pool, g.order);
    CHECK_MESSAGE(!problem.has_value(), problem.value_or(""));
  }
  // A wrong order is caught.
  const TokenMatrix angles = rows_of({{1, 0}, {0, 1}, {-1, 0}});
  CHECK(oracle::verify_fps(angles, IndexSet::range(3), {0, 1, 2}).has_value());
}

TEST_CASE("facility location") {
  const TokenMatrix e = rows_of({{1, 0}, {1, 0}, {0, 1}});
  const IndexSet pool = IndexSet::range(3);
  CHECK(oracle::facility_location_value(e, pool, set_of({0})) == doctest::Approx(2.5));
  CHECK(oracle::facility_location_value(e, pool, set_of({2})) == doctest::Approx(2.0));
  const GreedyTrace g = facility_location_select(e, pool, 1);
  CHECK(g.order == std::vector<Index>{0});
  CHECK(g.gains[0] == doctest::Approx(2.5));

  std::mt19937_64 rng(97);
  const TokenMatrix t = testutil::gaussian(7, 3, rng);
  const GreedyTrace all = facility_location_select(t, IndexSet::range(7), 7);
  CHECK(all.selected == IndexSet::range(7));
  CHECK(oracle::facility_location_value(t, IndexSet::range(7), all.selected) ==
        doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("facility location greedy bound and gains") {
  std::mt19937_64 rng(101);
  const double bound = 1.0 - 1.0 / std::numbers::e;
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 4 + trial % 7;
    const Index k = 1 + trial % 3;
    const TokenMatrix t = testutil::gaussian(n, 3, rng);
    const IndexSet pool = IndexSet::range(n);
    const GreedyTrace g = facility_location_select(t, pool, k);
    check_trace(g, pool, k);
    const double value = oracle::facility_location_value(t, pool, g.selected);
    CHECK(value >= bound * oracle::brute_force_facility_location(t, pool, k).value);
    double sum = 0.0;
    for (size_t i = 0; i < g.gains.size(); ++i) {
      sum += g.gains[i];
      if (i > 0) CHECK(g.gains[i] <= g.gains[i - 1] + 1e-12);
    }
    CHECK(sum == doctest::Approx(value).epsilon(1e-12));
  }
}

TEST_CASE("selectors reject bad arguments") {
  const TokenMatrix t = TokenMatrix::Identity(3, 3);
  CHECK_THROWS_AS(fps_select(t, IndexSet::range(3), 4), Error);
  CHECK_THROWS_AS(facility_location_select(t, IndexSet::range(4), 1), Error);
  CHECK(fps_select(t, IndexSet::range(3), 0).order.empty());
}
