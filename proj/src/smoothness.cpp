#include "elm/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace elm {

std::string to_string(TargetId id) {
  switch (id) {
    case TargetId::holder_low: return "holder_low";
    case TargetId::holder_high: return "holder_high";
    case TargetId::sine_smooth: return "sine_smooth";
    case TargetId::constant: return "constant";
  }
  return "unknown";
}

std::optional<TargetId> parse_target_id(std::string_view name) {
  if (name == "holder_low") return TargetId::holder_low;
  if (name == "holder_high") return TargetId::holder_high;
  if (name == "sine_smooth") return TargetId::sine_smooth;
  if (name == "constant") return TargetId::constant;
  return std::nullopt;
}

TargetFunction::TargetFunction(TargetId id, double r, int dim, double constant_value)
    : id_(id), r_(r), dim_(dim), constant_(constant_value) {
  if (dim < 1) throw DomainError("make_target: dimension d must be >= 1");
  if (!std::isfinite(r) || !(r > 0.0)) throw DomainError("make_target: smoothness r must be positive");
  if (!std::isfinite(constant_value)) throw DomainError("make_target: constant must be finite");
  switch (id) {
    case TargetId::holder_low:
      if (r > 1.0) throw DomainError("make_target: holder_low requires r in (0, 1]");
      sup_norm_ = std::pow(0.5, r);
      break;
    case TargetId::holder_high:
      if (!(r > 1.0) || r > 2.0) throw DomainError("make_target: holder_high requires r in (1, 2]");
      sup_norm_ = std::pow(0.5, r);
      break;
    case TargetId::sine_smooth:
      if (r > 2.0) throw DomainError("make_target: sine_smooth requires r in (0, 2]");
      sup_norm_ = 1.0;
      break;
    case TargetId::constant:
      sup_norm_ = constant_value != 0.0 ? std::abs(constant_value) : 1.0;
      break;
  }
}

double TargetFunction::operator()(const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != dim_) throw ShapeError("target: point dimension mismatch");
  switch (id_) {
    case TargetId::holder_low: {
      double sum = 0.0;
      for (Index k = 0; k < dim_; ++k) {
        const double u = x(k) - 0.5;
        sum += (u < 0.0 ? -1.0 : (u > 0.0 ? 1.0 : 0.0)) * std::pow(std::abs(u), r_);
      }
      return sum / dim_;
    }
    case TargetId::holder_high: {
      double sum = 0.0;
      for (Index k = 0; k < dim_; ++k) sum += std::pow(std::abs(x(k) - 0.5), r_);
      return sum / dim_;
    }
    case TargetId::sine_smooth: {
      double prod = 1.0;
      for (Index k = 0; k < dim_; ++k) prod *= std::sin(2.0 * std::numbers::pi * x(k));
      return prod;
    }
    case TargetId::constant: return constant_;
  }
  return 0.0;
}

VectorXd TargetFunction::evaluate_rows(const Eigen::Ref<const MatrixXd>& X) const {
  if (X.cols() != dim_) throw ShapeError("target: point dimension mismatch");
  VectorXd out(X.rows());
  for (Index i = 0; i < X.rows(); ++i) out(i) = (*this)(X.row(i).transpose());
  return out;
}

TargetFunction make_target(TargetId id, double r, int dim, double constant_value) {
  return TargetFunction(id, r, dim, constant_value);
}

namespace detail {

MatrixXd probe_directions(int dim, const ProbeSpec& probes) {
  if (dim == 1) {
    MatrixXd dirs(2, 1);
    dirs << 1.0, -1.0;
    return dirs;
  }
  const int count = probes.directions;
  MatrixXd dirs(count, dim);
  if (dim == 2) {
    for (int i = 0; i < count; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / count;
      dirs(i, 0) = std::cos(angle);
      dirs(i, 1) = std::sin(angle);
    }
    return dirs;
  }
  CounterRng rng(derive_seed(probes.seed, "modulus/directions"));
  for (int i = 0; i < count; ++i) {
    if (i < 2 * dim) {
      dirs.row(i).setZero();
      dirs(i, i / 2) = (i % 2 == 0) ? 1.0 : -1.0;
      continue;
    }
    double norm = 0.0;
    do {
      for (int k = 0; k < dim; ++k) dirs(i, k) = rng.normal();
      norm = dirs.row(i).norm();
    } while (norm == 0.0);
    dirs.row(i) /= norm;
  }
  return dirs;
}

MatrixXd probe_base_points(int dim, const ProbeSpec& probes) {
  const int total = probes.base_points;
  const int grid_budget = total / 2;
  int per_dim = 1;
  while (std::pow(double(per_dim + 1), dim) <= grid_budget) ++per_dim;
  Index grid_count = 1;
  for (int k = 0; k < dim; ++k) grid_count *= per_dim;
  if (per_dim < 2) grid_count = 0;
  const Index random_count = total - grid_count;

  MatrixXd points(grid_count + random_count, dim);
  for (Index i = 0; i < grid_count; ++i) {
    Index rest = i;
    for (int k = 0; k < dim; ++k) {
      points(i, k) = double(rest % per_dim) / double(per_dim - 1);
      rest /= per_dim;
    }
  }
  CounterRng rng(derive_seed(probes.seed, "modulus/base"));
  for (Index i = grid_count; i < points.rows(); ++i)
    for (int k = 0; k < dim; ++k) points(i, k) = rng.uniform();
  return points;
}

std::vector<double> probe_magnitudes(double t, const ProbeSpec& probes) {
  std::vector<double> mags;
  for (int k = 1; k <= probes.magnitudes; ++k)
    mags.push_back(k == probes.magnitudes ? t : t * double(k) / double(probes.magnitudes));
  for (double e : probes.extra_magnitudes)
    if (e > 0.0 && e <= t) mags.push_back(e);
  std::sort(mags.begin(), mags.end());
  mags.erase(std::unique(mags.begin(), mags.end()), mags.end());
  return mags;
}

}  // namespace detail

}  // namespace elm
