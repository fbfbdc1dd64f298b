#pragma once

// Dense substrate for token-feature matrices. Everything here is templated on
// the scalar type and accepts arbitrary Eigen expressions.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "promprune/error.hpp"

namespace promprune {

using Index = Eigen::Index;

template <typename Scalar>
using TokenMatrixT =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using SquareMatrixT = MatrixT<Scalar>;
template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// N x d matrix of visual-token features, one token per row.
using TokenMatrix = TokenMatrixT<double>;
using Matrix = MatrixT<double>;
using SquareMatrix = SquareMatrixT<double>;
using Vector = VectorT<double>;

inline constexpr double kDefaultNormEpsilon = 1e-12;

template <typename Scalar>
struct SymmetricSpectrumT {
  VectorT<Scalar> eigenvalues;  // descending, clamped at zero
  Index rank_bound = 0;
};
using SymmetricSpectrum = SymmetricSpectrumT<double>;

/// Throws invalid_input unless the matrix is non-empty and finite.
template <typename Derived>
void validate_tokens(const Eigen::MatrixBase<Derived>& tokens) {
  if (tokens.rows() < 1 || tokens.cols() < 1) {
    throw Error(ErrorKind::invalid_input,
                "token matrix must have at least one row and one column");
  }
  if (!tokens.allFinite()) {
    throw Error(ErrorKind::invalid_input, "token matrix has non-finite entries");
  }
}

/// Gram matrix on the smaller side: E^T E when dim <= n_tokens, else E E^T.
/// Only the lower triangle is accumulated; the result is exactly symmetric.
template <typename Derived>
SquareMatrixT<typename Derived::Scalar> gram_matrix(
    const Eigen::MatrixBase<Derived>& tokens) {
  using Scalar = typename Derived::Scalar;
  validate_tokens(tokens);
  const Index side = std::min(tokens.rows(), tokens.cols());
  SquareMatrixT<Scalar> gram = SquareMatrixT<Scalar>::Zero(side, side);
  if (tokens.cols() <= tokens.rows()) {
    gram.template selfadjointView<Eigen::Lower>().rankUpdate(
        tokens.derived().transpose());
  } else {
    gram.template selfadjointView<Eigen::Lower>().rankUpdate(tokens.derived());
  }
  gram.template triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  return gram;
}

namespace detail {

/// Blocked Householder reduction of the lower triangle of `a` to tridiagonal
/// form (panel updates in the style of LAPACK's sytrd/latrd). Destroys `a`.
template <typename Scalar>
void tridiagonalize_lower(MatrixT<Scalar>& a, VectorT<Scalar>& diag,
                          VectorT<Scalar>& subdiag, Index panel = 32) {
  using Vec = VectorT<Scalar>;
  const Index n = a.rows();
  diag.resize(n);
  subdiag.resize(std::max<Index>(n - 1, 0));
  MatrixT<Scalar> w(n, panel);
  Vec tmp(panel);

  Index i = 0;
  for (; i + panel < n - 1; i += panel) {
    const Index m = n - i;
    auto A = a.bottomRightCorner(m, m);
    auto W = w.topRows(m);
    for (Index j = 0; j < panel; ++j) {
      if (j > 0) {
        // Apply the pending rank-2j update to column j.
        A.col(j).tail(m - j).noalias() -=
            A.block(j, 0, m - j, j) * W.row(j).head(j).transpose();
        A.col(j).tail(m - j).noalias() -=
            W.block(j, 0, m - j, j) * A.row(j).head(j).transpose();
      }
      const Index len = m - j - 1;
      auto v = A.col(j).tail(len);
      Scalar tau;
      Scalar beta;
      v.makeHouseholderInPlace(tau, beta);
      subdiag(i + j) = beta;
      v(0) = Scalar(1);

      auto wj = W.col(j).tail(len);
      wj.noalias() =
          A.bottomRightCorner(len, len).template selfadjointView<Eigen::Lower>() * v;
      if (j > 0) {
        tmp.head(j).noalias() = W.block(j + 1, 0, len, j).transpose() * v;
        wj.noalias() -= A.block(j + 1, 0, len, j) * tmp.head(j);
        tmp.head(j).noalias() = A.block(j + 1, 0, len, j).transpose() * v;
        wj.noalias() -= W.block(j + 1, 0, len, j) * tmp.head(j);
      }
      wj *= tau;
      const Scalar alpha = Scalar(-0.5) * tau * wj.dot(v);
      wj += alpha * v;
    }
    const Index rest = m - panel;
    auto trailing = A.bottomRightCorner(rest, rest);
    trailing.template triangularView<Eigen::Lower>() -=
        A.block(panel, 0, rest, panel) * W.block(panel, 0, rest, panel).transpose();
    trailing.template triangularView<Eigen::Lower>() -=
        W.block(panel, 0, rest, panel) * A.block(panel, 0, rest, panel).transpose();
    for (Index j = 0; j < panel; ++j) diag(i + j) = A(j, j);
  }

  const Index m = n - i;
  const MatrixT<Scalar> tail =
      a.bottomRightCorner(m, m).template selfadjointView<Eigen::Lower>();
  Eigen::Tridiagonalization<MatrixT<Scalar>> unblocked(tail);
  diag.tail(m) = unblocked.diagonal();
  if (m > 1) subdiag.tail(m - 1) = unblocked.subDiagonal();
}

/// Eigenvalues of the symmetric matrix stored in the lower triangle of
/// `work` (destroyed), descending, clamped at zero.
template <typename Scalar>
SymmetricSpectrumT<Scalar> eigenvalues_in_place(MatrixT<Scalar>& work) {
  VectorT<Scalar> diag;
  VectorT<Scalar> subdiag;
  tridiagonalize_lower(work, diag, subdiag);
  Eigen::SelfAdjointEigenSolver<MatrixT<Scalar>> solver;
  solver.computeFromTridiagonal(diag, subdiag, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::invalid_input, "eigenvalue solver did not converge");
  }
  SymmetricSpectrumT<Scalar> spectrum;
  spectrum.eigenvalues =
      solver.eigenvalues().reverse().cwiseMax(Scalar(0)).eval();
  spectrum.rank_bound = work.rows();
  return spectrum;
}

}  // namespace detail

/// All eigenvalues of a symmetric matrix, sorted descending, negatives set to 0.
template <typename Derived>
SymmetricSpectrumT<typename Derived::Scalar> sym_eigenvalues(
    const Eigen::MatrixBase<Derived>& matrix) {
  using Scalar = typename Derived::Scalar;
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) {
    throw Error(ErrorKind::invalid_input, "expected a non-empty square matrix");
  }
  if (!matrix.allFinite()) {
    throw Error(ErrorKind::invalid_input, "matrix has non-finite entries");
  }
  const Scalar scale = matrix.cwiseAbs().maxCoeff();
  const Scalar asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (asym > Scalar(1e-6) * scale) {
    throw Error(ErrorKind::invalid_input,
                "matrix is not symmetric (max asymmetry " +
                    std::to_string(static_cast<double>(asym)) + ")");
  }
  MatrixT<Scalar> work = (matrix + matrix.transpose()) / Scalar(2);
  return detail::eigenvalues_in_place(work);
}

/// Each row divided by (its l2 norm + epsilon). Zero rows stay zero.
template <typename Derived>
TokenMatrixT<typename Derived::Scalar> l2_normalize_rows(
    const Eigen::MatrixBase<Derived>& tokens,
    typename Derived::Scalar epsilon = kDefaultNormEpsilon) {
  using Scalar = typename Derived::Scalar;
  const VectorT<Scalar> norms = tokens.rowwise().norm();
  const VectorT<Scalar> inv =
      (norms.array() + epsilon).inverse().matrix();
  TokenMatrixT<Scalar> out = inv.asDiagonal() * tokens;
  for (Index i = 0; i < out.rows(); ++i) {
    if (norms(i) == Scalar(0)) out.row(i).setZero();
  }
  return out;
}

}  // namespace promprune
