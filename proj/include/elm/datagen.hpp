#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "elm/rng.hpp"
#include "elm/smoothness.hpp"
#include "elm/types.hpp"

namespace elm {

enum class NoiseKind { none, uniform };

std::string to_string(NoiseKind kind);
std::optional<NoiseKind> parse_noise_kind(std::string_view name);

/// Additive output noise; uniform on [-tau, tau].
struct NoiseSpec {
  NoiseKind kind = NoiseKind::uniform;
  double tau = 0.2;

  double half_width() const { return kind == NoiseKind::none ? 0.0 : tau; }
};

/// m samples with inputs uniform on [0,1]^d and outputs in [-M, M].
struct Dataset {
  MatrixXd X;
  VectorXd y;
  double M = 1.0;
  std::uint64_t seed = 0;
  NoiseSpec noise;

  Index size() const { return X.rows(); }
  int dim() const { return static_cast<int>(X.cols()); }
};

/// y_i = clamp(f(x_i) + e_i, -M, M) with M = f.sup_norm() + tau. The clamp can
/// never be active for a valid target; if it would be, this throws.
Dataset sample_dataset(const TargetFunction& f, Index m, const NoiseSpec& noise, std::uint64_t seed);

/// Rows [begin, begin + count) of a dataset.
Dataset slice_rows(const Dataset& data, Index begin, Index count);

/// Shortest round-trip CSV: header x_1..x_d,y then one row per sample.
void write_dataset_csv(std::ostream& os, const Dataset& data);

struct L2Estimate {
  double value = 0.0;           // (1/N) sum (g(u_k) - f(u_k))^2
  double standard_error = 0.0;  // sample std of the squared errors / sqrt(N)
  Index probes = 0;
};

/// Probe points u_k ~ U[0,1]^d drawn in row order from the seed.
MatrixXd draw_probe_points(Index count, int dim, std::uint64_t seed);

/// Monte Carlo estimate of |g - f|^2 in L2(U[0,1]^d) for a batch predictor
/// (points-as-rows matrix -> vector). Probes are generated and evaluated in
/// blocks; the stream is independent of the block size.
L2Estimate estimate_l2_error(const std::function<VectorXd(const MatrixXd&)>& predict_rows, const TargetFunction& f,
                             Index probes, std::uint64_t seed, Index block = 8192);

/// Pointwise-predictor convenience returning only the estimate.
double empirical_l2_error(const std::function<double(const VectorXd&)>& predict, const TargetFunction& f, Index probes,
                          std::uint64_t seed);

/// max |g - f| over the regular grid with `points_per_dim` nodes per axis
/// (cube corners included). Lower bound on the sup-norm distance; d <= 3.
double sup_error_on_grid(const std::function<double(const VectorXd&)>& g,
                         const std::function<double(const VectorXd&)>& f, int dim, int points_per_dim);

/// Batched variant: both callables map a points-as-rows matrix to values.
double sup_error_on_grid_rows(const std::function<VectorXd(const MatrixXd&)>& g,
                              const std::function<VectorXd(const MatrixXd&)>& f, int dim, int points_per_dim);

/// The grid used by sup_error_on_grid, one node per row.
MatrixXd regular_grid(int dim, int points_per_dim);

}  // namespace elm
