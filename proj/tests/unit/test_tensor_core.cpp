#include "doctest.h"

#include "helpers.hpp"
#include "promprune/tensor_core.hpp"

using namespace promprune;

namespace {

Matrix triple_loop_gram(const TokenMatrix& e) {
  Matrix g = Matrix::Zero(e.cols(), e.cols());
  for (Index a = 0; a < e.cols(); ++a)
    for (Index b = 0; b < e.cols(); ++b)
      for (Index i = 0; i < e.rows(); ++i) g(a, b) += e(i, a) * e(i, b);
  return g;
}

}  // namespace

TEST_CASE("gram of identity and duplicate rows") {
  CHECK(gram_matrix(TokenMatrix::Identity(2, 2)) == Matrix::Identity(2, 2));

  TokenMatrix dup(2, 2);
  dup << 1, 0, 1, 0;
  Matrix expected(2, 2);
  expected << 2, 0, 0, 0;
  CHECK(gram_matrix(dup) == expected);
}

TEST_CASE("gram matches a triple loop") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const TokenMatrix e = testutil::gaussian(6, 3, rng);
    const Matrix g = gram_matrix(e);
    CHECK((g - triple_loop_gram(e)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(g == g.transpose());
  }
}

TEST_CASE("gram uses the smaller side") {
  std::mt19937_64 rng(3);
  const TokenMatrix wide = testutil::gaussian(3, 7, rng);
  const Matrix g = gram_matrix(wide);
  REQUIRE(g.rows() == 3);
  const Matrix direct = wide * wide.transpose();
  CHECK((g - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gram trace equals squared Frobenius norm") {
  std::mt19937_64 rng(5);
  for (Index n : {4, 17, 40}) {
    const TokenMatrix e = testutil::gaussian(n, 9, rng);
    CHECK(testutil::rel_diff(gram_matrix(e).trace(), e.squaredNorm()) < 1e-8);
  }
}

TEST_CASE("sym_eigenvalues small cases") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = 4;
  const auto s = sym_eigenvalues(d);
  CHECK(s.eigenvalues(0) == doctest::Approx(4.0));
  CHECK(s.eigenvalues(1) == doctest::Approx(1.0));

  Matrix r(2, 2);
  r << 2, 0, 0, 0;
  const auto t = sym_eigenvalues(r);
  CHECK(t.eigenvalues(0) == doctest::Approx(2.0));
  CHECK(t.eigenvalues(1) == 0.0);
  CHECK(t.rank_bound == 2);
}

TEST_CASE("sym_eigenvalues trace and determinant identities") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    // Positive definite so the zero clamp never engages.
    const TokenMatrix b = testutil::gaussian(5, 5, rng);
    const Matrix a = b.transpose() * b + 0.1 * Matrix::Identity(5, 5);
    const Vector ev = sym_eigenvalues(a).eigenvalues;
    CHECK(testutil::rel_diff(ev.sum(), a.trace()) < 1e-8);
    CHECK(std::abs(ev.prod() - a.determinant()) / std::abs(a.determinant()) < 1e-8);
    for (Index i = 1; i < ev.size(); ++i) CHECK(ev(i - 1) >= ev(i));
  }
}

TEST_CASE("sym_eigenvalues rejects bad input") {
  Matrix asym(2, 2);
  asym << 1, 2, 0, 1;
  CHECK_THROWS_AS(sym_eigenvalues(asym), Error);
  CHECK_THROWS_AS(sym_eigenvalues(Matrix(2, 3)), Error);
  Matrix nan = Matrix::Identity(2, 2);
  nan(0, 1) = nan(1, 0) = std::nan("");
  try {
    sym_eigenvalues(nan);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_input);
  }
}

TEST_CASE("blocked tridiagonal reduction matches the reference solver") {
  std::mt19937_64 rng(23);
  // Sizes below, at, and well above the panel width.
  for (Index n : {1, 2, 31, 33, 34, 70, 130}) {
    const TokenMatrix b = testutil::gaussian(n + 3, n, rng);
    const Matrix a = b.transpose() * b;
    Matrix work = a;
    const Vector ours = detail::eigenvalues_in_place(work).eigenvalues;
    Eigen::SelfAdjointEigenSolver<Matrix> ref(a, Eigen::EigenvaluesOnly);
    const Vector theirs = ref.eigenvalues().reverse();
    const double scale = theirs(0);
    CHECK((ours - theirs).cwiseAbs().maxCoeff() / scale < 1e-12);
  }
}

TEST_CASE("both Gram sides share the nonzero spectrum") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const TokenMatrix e = testutil::gaussian(12, 5, rng);
    const Vector small = sym_eigenvalues(Matrix(e.transpose() * e)).eigenvalues;
    const Vector big = sym_eigenvalues(Matrix(e * e.transpose())).eigenvalues;
    for (Index i = 0; i < small.size(); ++i) {
      CHECK(testutil::rel_diff(small(i), big(i)) < 1e-8);
    }
  }
}

TEST_CASE("spectrum is invariant to row permutation") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const TokenMatrix e = testutil::gaussian(15, 6, rng);
    const TokenMatrix p = testutil::permute_rows(e, testutil::permutation(15, rng));
    const Vector a = sym_eigenvalues(gram_matrix(e)).eigenvalues;
    const Vector b = sym_eigenvalues(gram_matrix(p)).eigenvalues;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8 * a(0));
  }
}

TEST_CASE("l2_normalize_rows") {
  TokenMatrix m(2, 2);
  m << 3, 4, 0, 0;
  const TokenMatrix out = l2_normalize_rows(m);
  CHECK(out(0, 0) == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(out(0, 1) == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(out.row(1).isZero(0.0));

  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  TokenMatrix r = testutil::gaussian(50, 7, rng);
  for (Index i = 0; i < r.rows(); ++i) r.row(i) *= scale(rng) / r.row(i).norm();
  const Vector norms = l2_normalize_rows(r).rowwise().norm();
  CHECK(norms.minCoeff() >= 1.0 - 1e-6);
  CHECK(norms.maxCoeff() <= 1.0 + 1e-15);
}

TEST_CASE("validate_tokens") {
  CHECK_THROWS_AS(validate_tokens(TokenMatrix(0, 3)), Error);
  TokenMatrix inf = TokenMatrix::Ones(2, 2);
  inf(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(validate_tokens(inf), Error);
  CHECK_NOTHROW(validate_tokens(TokenMatrix::Ones(1, 1)));
}

TEST_CASE("single precision instantiation") {
  Eigen::MatrixXf f(3, 2);
  f << 1, 0, 0, 2, 0, 0;
  const auto g = gram_matrix(f);
  CHECK(g(1, 1) == 4.0f);
  const auto s = sym_eigenvalues(g);
  CHECK(s.eigenvalues(0) == doctest::Approx(4.0f));
}
