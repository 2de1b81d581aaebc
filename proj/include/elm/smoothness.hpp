#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "elm/kernel.hpp"
#include "elm/rng.hpp"
#include "elm/types.hpp"

namespace elm {

enum class TargetId { holder_low, holder_high, sine_smooth, constant };

std::string to_string(TargetId id);
std::optional<TargetId> parse_target_id(std::string_view name);

/// Built-in regression targets on [0,1]^d with known smoothness r:
///
///   holder_low   (1/d) sum_k sgn(x_k - 1/2) |x_k - 1/2|^r,   r in (0, 1]
///   holder_high  (1/d) sum_k |x_k - 1/2|^r,                  r in (1, 2]
///   sine_smooth  prod_k sin(2 pi x_k),                        r in (0, 2]
///   constant     c,                                           r > 0
class TargetFunction {
 public:
  TargetFunction(TargetId id, double r, int dim, double constant_value = 0.0);

  TargetId id() const { return id_; }
  double smoothness() const { return r_; }
  int dim() const { return dim_; }
  double constant_value() const { return constant_; }
  /// Upper bound on |f| over [0,1]^d. Positive (a zero constant reports 1).
  double sup_norm() const { return sup_norm_; }

  double operator()(const Eigen::Ref<const VectorXd>& x) const;
  /// f at every row of X.
  VectorXd evaluate_rows(const Eigen::Ref<const MatrixXd>& X) const;

 private:
  TargetId id_;
  double r_;
  int dim_;
  double constant_;
  double sup_norm_;
};

TargetFunction make_target(TargetId id, double r, int dim, double constant_value = 0.0);

/// r-th forward difference sum_{j=0}^r C(r,j) (-1)^{r-j} f(x + j h), or 0 when
/// the segment x + [0, r] h leaves the unit cube.
template <typename F>
double rth_difference(const F& f, const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& h, int r) {
  if (r < 1) throw DomainError("rth_difference: order r must be >= 1");
  if (x.size() != h.size()) throw ShapeError("rth_difference: x and h must have the same dimension");
  const VectorXd last = x + double(r) * h;
  // The cube is convex, so both segment endpoints inside is enough.
  if ((x.array() < 0.0).any() || (x.array() > 1.0).any() || (last.array() < 0.0).any() || (last.array() > 1.0).any())
    return 0.0;
  double sum = 0.0;
  VectorXd point(x.size());
  for (int j = 0; j <= r; ++j) {
    point = x + double(j) * h;
    point = point.cwiseMax(0.0).cwiseMin(1.0);
    const double sign = ((r - j) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * double(binomial(r, j)) * f(point);
  }
  return sum;
}

/// Sampling design for the modulus-of-smoothness estimator.
///
/// Steps are direction x magnitude, with magnitudes t * k / magnitudes for
/// k = 1..magnitudes (so t itself is always probed) plus every entry of
/// extra_magnitudes that does not exceed t. Directions are +-1 for d = 1,
/// evenly spaced angles for d = 2 and seeded random unit vectors beyond.
/// Half of the base points form a regular grid, the rest are seeded uniform.
struct ProbeSpec {
  int directions = 32;
  int magnitudes = 8;
  int base_points = 4096;
  std::uint64_t seed = 0;
  std::vector<double> extra_magnitudes;
};

struct ModulusEstimate {
  int order = 1;
  double step_bound = 0.0;
  double value = 0.0;
  int directions = 0;
  int magnitudes = 0;
  int base_points = 0;
};

namespace detail {

MatrixXd probe_directions(int dim, const ProbeSpec& probes);
MatrixXd probe_base_points(int dim, const ProbeSpec& probes);
std::vector<double> probe_magnitudes(double t, const ProbeSpec& probes);

}  // namespace detail

/// Sampled lower bound on the r-th modulus of smoothness
/// sup_{|h|_2 <= t} sup_x |rth_difference(f, x, h, r)|.
template <typename F>
ModulusEstimate estimate_modulus(const F& f, int dim, int r, double t, const ProbeSpec& probes = {}) {
  if (r < 1) throw DomainError("estimate_modulus: order r must be >= 1");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("estimate_modulus: t must be positive and finite");
  if (dim < 1) throw DomainError("estimate_modulus: dimension must be >= 1");
  if (probes.directions < 1 || probes.magnitudes < 1 || probes.base_points < 1)
    throw DomainError("estimate_modulus: probe spec must be non-empty");

  const MatrixXd dirs = detail::probe_directions(dim, probes);
  const MatrixXd base = detail::probe_base_points(dim, probes);
  const std::vector<double> mags = detail::probe_magnitudes(t, probes);

  double best = 0.0;
  VectorXd h(dim);
  for (Index i = 0; i < dirs.rows(); ++i)
    for (double mag : mags) {
      h = mag * dirs.row(i).transpose();
      for (Index b = 0; b < base.rows(); ++b) {
        const double v = std::abs(rth_difference(f, base.row(b).transpose(), h, r));
        if (v > best) best = v;
      }
    }

  ModulusEstimate est;
  est.order = r;
  est.step_bound = t;
  est.value = best;
  est.directions = static_cast<int>(dirs.rows());
  est.magnitudes = static_cast<int>(mags.size());
  est.base_points = static_cast<int>(base.rows());
  return est;
}

inline ModulusEstimate estimate_modulus(const TargetFunction& f, int r, double t, const ProbeSpec& probes = {}) {
  return estimate_modulus(f, f.dim(), r, t, probes);
}

}  // namespace elm
