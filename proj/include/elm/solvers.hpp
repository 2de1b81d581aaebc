#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SVD>

#include "elm/types.hpp"

namespace elm {

struct FitDiagnostics {
  double training_mse = 0.0;
  double coefficient_norm_sq = 0.0;  // omega(a)
  Index effective_rank = 0;
  double singular_value_cutoff = 0.0;
};

template <typename Scalar = double>
struct FitResult {
  Vector<Scalar> coefficients;
  FitDiagnostics diagnostics;
};

/// Solution paths for the ridge system (D^T D + m lambda I) a = D^T y.
enum class RidgeMethod {
  automatic,        // primal Cholesky, dual when n > 2000 and m < n
  primal_cholesky,  // LLT of the n x n regularized Gram matrix
  primal_ldlt,      // pivoted LDLT of the same matrix
  dual,             // a = D^T (D D^T + m lambda I)^{-1} y
};

inline constexpr Index kDualThreshold = 2000;

/// Sum of squared coefficients.
template <typename Derived>
typename Derived::Scalar omega(const Eigen::MatrixBase<Derived>& coefficients) {
  return coefficients.squaredNorm();
}

/// min{M, |v|} sgn(v).
template <typename Scalar>
Scalar truncate(Scalar value, Scalar level) {
  if (!(level > Scalar(0))) throw DomainError("truncate: level M must be positive");
  if (value > level) return level;
  if (value < -level) return -level;
  return value;
}

template <typename Derived>
auto truncate(const Eigen::ArrayBase<Derived>& values, typename Derived::Scalar level) {
  if (!(level > typename Derived::Scalar(0))) throw DomainError("truncate: level M must be positive");
  return values.max(-level).min(level);
}

namespace detail {

template <typename Scalar>
void check_fit_inputs(const Matrix<Scalar>& D, const Vector<Scalar>& y, const char* who) {
  if (D.rows() < 1 || D.cols() < 1) throw DomainError(std::string(who) + ": design matrix must be non-empty");
  if (D.rows() != y.size()) throw ShapeError(std::string(who) + ": target length must equal design row count");
  if (!all_finite(D) || !all_finite(y)) throw DomainError(std::string(who) + ": inputs must be finite");
}

template <typename Scalar>
FitDiagnostics diagnose(const Matrix<Scalar>& D, const Vector<Scalar>& y, const Vector<Scalar>& a) {
  if (!all_finite(a)) throw NumericalError("fit produced non-finite coefficients");
  FitDiagnostics diag;
  diag.training_mse = static_cast<double>((D * a - y).squaredNorm() / Scalar(D.rows()));
  diag.coefficient_norm_sq = static_cast<double>(omega(a));
  return diag;
}

}  // namespace detail

/// Minimum-norm least-squares coefficients argmin |D a - y|^2 via the SVD.
/// Singular values at or below eps * max(m, n) * sigma_max are treated as zero.
template <typename Scalar>
FitResult<Scalar> fit_least_squares(const Matrix<Scalar>& D, const Vector<Scalar>& y) {
  detail::check_fit_inputs(D, y, "fit_least_squares");
  const Index m = D.rows();
  const Index n = D.cols();

  Eigen::BDCSVD<Matrix<Scalar>> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector<Scalar>& sv = svd.singularValues();
  const Scalar cutoff = std::numeric_limits<Scalar>::epsilon() * Scalar(std::max(m, n)) * (sv.size() ? sv(0) : Scalar(0));

  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;

  Vector<Scalar> a = Vector<Scalar>::Zero(n);
  if (rank > 0) {
    Vector<Scalar> projected = svd.matrixU().leftCols(rank).transpose() * y;
    projected.array() /= sv.head(rank).array();
    a.noalias() = svd.matrixV().leftCols(rank) * projected;
  }

  FitResult<Scalar> out{std::move(a), {}};
  out.diagnostics = detail::diagnose(D, y, out.coefficients);
  out.diagnostics.effective_rank = rank;
  out.diagnostics.singular_value_cutoff = static_cast<double>(cutoff);
  return out;
}

/// Unique minimizer of (1/m) |D a - y|^2 + lambda |a|^2, i.e. the solution of
/// (D^T D + m lambda I) a = D^T y.
///
/// effective_rank reports the numerical rank of D estimated from the pivots of
/// a diagonal-pivoted LDLT of D^T D (resp. D D^T on the dual path), with the
/// Gram-level threshold eps * max(m, n) * max pivot; singular_value_cutoff is
/// its square root.
template <typename Scalar>
FitResult<Scalar> fit_ridge(const Matrix<Scalar>& D, const Vector<Scalar>& y, Scalar lambda,
                            RidgeMethod method = RidgeMethod::automatic) {
  detail::check_fit_inputs(D, y, "fit_ridge");
  using std::isfinite;
  if (!(lambda > Scalar(0)) || !isfinite(lambda))
    throw DomainError("fit_ridge: lambda must be positive and finite (use fit_least_squares for lambda = 0)");
  const Index m = D.rows();
  const Index n = D.cols();
  const Scalar shift = Scalar(m) * lambda;

  if (method == RidgeMethod::automatic) method = (n > kDualThreshold && m < n) ? RidgeMethod::dual : RidgeMethod::primal_cholesky;

  const bool dual = method == RidgeMethod::dual;
  Matrix<Scalar> gram = Matrix<Scalar>::Zero(dual ? m : n, dual ? m : n);
  if (dual)
    gram.template selfadjointView<Eigen::Lower>().rankUpdate(D);
  else
    gram.template selfadjointView<Eigen::Lower>().rankUpdate(D.transpose());

  Eigen::LDLT<Matrix<Scalar>, Eigen::Lower> pivoted(gram);
  const Vector<Scalar> pivots = pivoted.vectorD().cwiseAbs();
  const Scalar top = pivots.size() ? pivots.maxCoeff() : Scalar(0);
  const Scalar threshold = std::numeric_limits<Scalar>::epsilon() * Scalar(std::max(m, n)) * top;
  const Index rank = std::min<Index>((pivots.array() > threshold).count(), std::min(m, n));

  gram.diagonal().array() += shift;

  Vector<Scalar> a;
  switch (method) {
    case RidgeMethod::primal_ldlt: {
      Eigen::LDLT<Matrix<Scalar>, Eigen::Lower> ldlt(gram);
      a = ldlt.solve(D.transpose() * y);
      break;
    }
    case RidgeMethod::dual: {
      Eigen::LLT<Matrix<Scalar>, Eigen::Lower> llt(gram);
      if (llt.info() != Eigen::Success) throw NumericalError("fit_ridge: dual system is not positive definite");
      a = D.transpose() * llt.solve(y);
      break;
    }
    default: {
      Eigen::LLT<Matrix<Scalar>, Eigen::Lower> llt(gram);
      if (llt.info() != Eigen::Success) throw NumericalError("fit_ridge: regularized system is not positive definite");
      a = llt.solve(D.transpose() * y);
      break;
    }
  }

  FitResult<Scalar> out{std::move(a), {}};
  out.diagnostics = detail::diagnose(D, y, out.coefficients);
  out.diagnostics.effective_rank = rank;
  using std::sqrt;
  out.diagnostics.singular_value_cutoff = static_cast<double>(sqrt(threshold));
  return out;
}

}  // namespace elm
