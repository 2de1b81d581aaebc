#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "elm/types.hpp"

namespace elm {

/// Exact binomial coefficient C(n, k) for the small orders used here.
constexpr std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return c;
}

/// Gaussian-type activation of order s in dimension d:
///
///   K(t) = sum_{j=1}^{s} C(s,j) (-1)^{1-j} j^{-d} (2/(sigma^2 pi))^{d/2} exp(-2 t^2 / (j^2 sigma^2))
///
/// where t is the Euclidean distance between a center and an input. Every
/// j-term is a normalized Gaussian scaled by C(s,j)(-1)^{1-j}, so the kernel
/// integrates to 1 over R^d for every admissible (sigma, s, d).
///
/// Immutable after construction.
template <typename Scalar = double>
class GaussianTypeKernel {
 public:
  static constexpr int kMaxOrder = 16;

  GaussianTypeKernel(Scalar sigma, int order, int dim) : sigma_(sigma), order_(order), dim_(dim) {
    using std::isfinite;
    if (!(sigma > Scalar(0)) || !isfinite(sigma)) throw DomainError("kernel: sigma must be positive and finite");
    if (order < 1 || order > kMaxOrder)
      throw DomainError("kernel: order s must lie in [1, " + std::to_string(kMaxOrder) + "]");
    if (dim < 1) throw DomainError("kernel: dimension d must be >= 1");

    using std::pow;
    const Scalar normal = pow(Scalar(2) / (sigma * sigma * std::numbers::pi_v<Scalar>), Scalar(dim) / Scalar(2));
    for (int j = 1; j <= order; ++j) {
      const Scalar sign = (j % 2 == 1) ? Scalar(1) : Scalar(-1);  // (-1)^{1-j}
      const Scalar jd = pow(Scalar(j), Scalar(dim));
      weights_[j - 1] = sign * Scalar(binomial(order, j)) / jd * normal;
      rates_[j - 1] = Scalar(2) / (Scalar(j * j) * sigma * sigma);
    }
  }

  Scalar sigma() const { return sigma_; }
  int order() const { return order_; }
  int dim() const { return dim_; }

  /// Weight of the j-th term (1-based), including sign and normalization.
  Scalar term_weight(int j) const { return weights_[j - 1]; }
  /// Exponential rate of the j-th term: 2 / (j^2 sigma^2).
  Scalar term_rate(int j) const { return rates_[j - 1]; }

  /// K at Euclidean distance `dist`.
  Scalar value(Scalar dist) const {
    using std::isfinite;
    if (!(dist >= Scalar(0)) || !isfinite(dist)) throw DomainError("kernel: distance must be finite and >= 0");
    return value_at_squared(dist * dist);
  }

  Scalar operator()(Scalar dist) const { return value(dist); }

  /// K(|theta - x|_2). Symmetric and translation invariant.
  template <typename DerivedA, typename DerivedB>
  Scalar pair(const Eigen::MatrixBase<DerivedA>& theta, const Eigen::MatrixBase<DerivedB>& x) const {
    if (theta.size() != dim_ || x.size() != dim_)
      throw ShapeError("kernel: points must have dimension " + std::to_string(dim_));
    using std::sqrt;
    Scalar sq(0);
    for (Index k = 0; k < dim_; ++k) {
      const Scalar diff = theta(k) - x(k);
      sq += diff * diff;
    }
    return value(sqrt(sq));
  }

  /// K(0).
  Scalar peak() const { return value_at_squared(Scalar(0)); }

  /// sum_j C(s,j) j^{-d} (2/(sigma^2 pi))^{d/2}; bounds |K(t)| for all t.
  Scalar magnitude_bound() const {
    using std::abs;
    Scalar bound(0);
    for (int j = order_; j >= 1; --j) bound += abs(weights_[j - 1]);
    return bound;
  }

  /// Elementwise K over an array of squared distances. Terms are accumulated
  /// in descending j with Neumaier compensation, as in the scalar path.
  template <typename Derived>
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> apply_squared(const Eigen::ArrayBase<Derived>& squared) const {
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Array sum = Array::Zero(squared.rows(), squared.cols());
    Array comp = Array::Zero(squared.rows(), squared.cols());
    for (int j = order_; j >= 1; --j) {
      const Array term = weights_[j - 1] * (-rates_[j - 1] * squared).exp();
      const Array next = sum + term;
      comp += ((sum.abs() >= term.abs()).select((sum - next) + term, (term - next) + sum));
      sum = next;
    }
    return sum + comp;
  }

 private:
  Scalar value_at_squared(Scalar squared) const {
    using std::abs;
    using std::exp;
    Scalar sum(0);
    Scalar comp(0);
    for (int j = order_; j >= 1; --j) {
      const Scalar term = weights_[j - 1] * exp(-rates_[j - 1] * squared);
      const Scalar next = sum + term;
      comp += (abs(sum) >= abs(term)) ? (sum - next) + term : (term - next) + sum;
      sum = next;
    }
    return sum + comp;
  }

  Scalar sigma_;
  int order_;
  int dim_;
  std::array<Scalar, kMaxOrder> weights_{};
  std::array<Scalar, kMaxOrder> rates_{};
};

using Kernel = GaussianTypeKernel<double>;

template <typename Scalar>
Scalar kernel_value(const GaussianTypeKernel<Scalar>& k, Scalar dist) {
  return k.value(dist);
}

template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar kernel_pair(const GaussianTypeKernel<Scalar>& k, const Eigen::MatrixBase<DerivedA>& theta,
                   const Eigen::MatrixBase<DerivedB>& x) {
  return k.pair(theta, x);
}

}  // namespace elm
