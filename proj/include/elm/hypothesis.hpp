#pragma once

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "elm/kernel.hpp"
#include "elm/rng.hpp"
#include "elm/types.hpp"

namespace elm {

enum class CenterDistribution { uniform, weighted_grid };

/// Finite mixture over user-supplied grid points (one per row) with
/// nonnegative weights. Used to show that any fixed sampling law for the
/// hidden centers can be plugged in.
template <typename Scalar = double>
struct WeightedGrid {
  Matrix<Scalar> points;
  Vector<Scalar> weights;
};

/// n hidden centers (one per row) drawn i.i.d. on [-a, 1+a]^d.
template <typename Scalar = double>
struct CenterSet {
  Matrix<Scalar> centers;
  Scalar margin = Scalar(0);
  int dim = 1;
  std::uint64_t seed = 0;
  CenterDistribution distribution = CenterDistribution::uniform;

  Index size() const { return centers.rows(); }
};

namespace detail {

inline void check_center_args(Index n, double a, int d) {
  if (n < 1) throw DomainError("draw_centers: n must be >= 1");
  if (d < 1) throw DomainError("draw_centers: d must be >= 1");
  if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("draw_centers: margin a must be finite and >= 0");
}

}  // namespace detail

/// Uniform centers on [-a, 1+a]^d. Reproducible from (n, a, d, seed).
template <typename Scalar = double>
CenterSet<Scalar> draw_centers(Index n, Scalar a, int d, std::uint64_t seed) {
  detail::check_center_args(n, static_cast<double>(a), d);
  CounterRng rng(seed);
  CenterSet<Scalar> set;
  set.centers.resize(n, d);
  for (Index i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) {
      Scalar c = Scalar(-a) + (Scalar(1) + Scalar(2) * a) * Scalar(rng.uniform());
      set.centers(i, k) = std::min(c, Scalar(1) + a);
    }
  set.margin = a;
  set.dim = d;
  set.seed = seed;
  set.distribution = CenterDistribution::uniform;
  return set;
}

/// Centers drawn from a weighted grid; every grid point must lie in [-a, 1+a]^d.
template <typename Scalar = double>
CenterSet<Scalar> draw_centers(Index n, Scalar a, int d, std::uint64_t seed, const WeightedGrid<Scalar>& grid) {
  detail::check_center_args(n, static_cast<double>(a), d);
  const Index k = grid.points.rows();
  if (k == 0 || grid.points.cols() != d || grid.weights.size() != k)
    throw ShapeError("draw_centers: weighted grid must have d columns and one weight per point");
  if ((grid.points.array() < -a).any() || (grid.points.array() > Scalar(1) + a).any())
    throw DomainError("draw_centers: weighted grid points must lie in [-a, 1+a]^d");
  if ((grid.weights.array() < Scalar(0)).any() || !all_finite(grid.weights) || !(grid.weights.sum() > Scalar(0)))
    throw DomainError("draw_centers: grid weights must be finite, nonnegative and not all zero");

  std::vector<Scalar> cumulative(static_cast<std::size_t>(k));
  Scalar running(0);
  for (Index i = 0; i < k; ++i) cumulative[static_cast<std::size_t>(i)] = (running += grid.weights(i));

  CounterRng rng(seed);
  CenterSet<Scalar> set;
  set.centers.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    const Scalar u = Scalar(rng.uniform()) * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    set.centers.row(i) = grid.points.row(it - cumulative.begin());
  }
  set.margin = a;
  set.dim = d;
  set.seed = seed;
  set.distribution = CenterDistribution::weighted_grid;
  return set;
}

/// m x n matrix with entry (i, j) = K(theta_j, x_i). Samples are rows of X.
/// Inputs outside [0,1]^d are accepted with a warning on std::clog.
template <typename Scalar, typename Derived>
Matrix<Scalar> build_design_matrix(const Eigen::MatrixBase<Derived>& X, const CenterSet<Scalar>& centers,
                                   const GaussianTypeKernel<Scalar>& kernel) {
  if (X.cols() != kernel.dim() || centers.centers.cols() != kernel.dim())
    throw ShapeError("build_design_matrix: samples, centers and kernel must share dimension d");
  if ((X.array() < Scalar(0)).any() || (X.array() > Scalar(1)).any())
    std::clog << "warning: build_design_matrix: samples outside [0,1]^d\n";

  const Index m = X.rows();
  const Index n = centers.size();
  Matrix<Scalar> design(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) design(i, j) = kernel.pair(centers.centers.row(j), X.row(i));
  return design;
}

/// Kernel expansion sum_j a_j K(theta_j, x) with an optional truncation level.
template <typename Scalar = double>
struct ElmModel {
  CenterSet<Scalar> centers;
  GaussianTypeKernel<Scalar> kernel;
  Vector<Scalar> coefficients;
  std::optional<Scalar> truncation_level;

  ElmModel(CenterSet<Scalar> c, GaussianTypeKernel<Scalar> k, Vector<Scalar> a,
           std::optional<Scalar> level = std::nullopt)
      : centers(std::move(c)), kernel(k), coefficients(std::move(a)), truncation_level(level) {
    if (coefficients.size() != centers.size())
      throw ShapeError("ElmModel: coefficient count must equal center count");
    if (centers.centers.cols() != kernel.dim()) throw ShapeError("ElmModel: center and kernel dimension differ");
    if (!all_finite(coefficients)) throw NumericalError("ElmModel: coefficients must be finite");
    if (level && !(*level > Scalar(0))) throw DomainError("ElmModel: truncation level must be positive");
  }

  int dim() const { return kernel.dim(); }
};

/// Raw (untruncated) model value at x.
template <typename Scalar, typename Derived>
Scalar evaluate(const ElmModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != model.dim()) throw ShapeError("evaluate: point dimension mismatch");
  Scalar sum(0);
  for (Index j = 0; j < model.centers.size(); ++j)
    sum += model.coefficients(j) * model.kernel.pair(model.centers.centers.row(j), x);
  return sum;
}

/// Raw model values at every row of X. Uses the vectorized kernel path and
/// processes rows in blocks so memory stays O(block * n).
template <typename Scalar, typename Derived>
Vector<Scalar> predict(const ElmModel<Scalar>& model, const Eigen::MatrixBase<Derived>& X, Index block = 2048) {
  if (X.cols() != model.dim()) throw ShapeError("predict: point dimension mismatch");
  const Index m = X.rows();
  const Index n = model.centers.size();
  const auto& C = model.centers.centers;

  Vector<Scalar> out(m);
  for (Index start = 0; start < m; start += block) {
    const Index rows = std::min(block, m - start);
    const auto Xb = X.middleRows(start, rows);
    Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> sq =
        Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(rows, n);
    for (int k = 0; k < model.dim(); ++k)
      sq += (Xb.col(k).array().replicate(1, n) - C.col(k).transpose().array().replicate(rows, 1)).square();
    out.segment(start, rows).noalias() = model.kernel.apply_squared(sq).matrix() * model.coefficients;
  }
  return out;
}

}  // namespace elm
