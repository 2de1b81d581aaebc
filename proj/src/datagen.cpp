#include "elm/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "elm/report.hpp"

namespace elm {

std::string to_string(NoiseKind kind) { return kind == NoiseKind::none ? "none" : "uniform"; }

std::optional<NoiseKind> parse_noise_kind(std::string_view name) {
  if (name == "none") return NoiseKind::none;
  if (name == "uniform") return NoiseKind::uniform;
  return std::nullopt;
}

Dataset sample_dataset(const TargetFunction& f, Index m, const NoiseSpec& noise, std::uint64_t seed) {
  if (m < 1) throw DomainError("sample_dataset: m must be >= 1");
  if (!(noise.tau >= 0.0) || !std::isfinite(noise.tau)) throw DomainError("sample_dataset: tau must be finite and >= 0");

  const int d = f.dim();
  const double tau = noise.half_width();
  Dataset data;
  data.M = f.sup_norm() + tau;
  data.seed = seed;
  data.noise = noise;
  data.X.resize(m, d);
  data.y.resize(m);

  CounterRng input_rng(derive_seed(seed, "data/x"));
  CounterRng noise_rng(derive_seed(seed, "data/noise"));
  for (Index i = 0; i < m; ++i)
    for (int k = 0; k < d; ++k) data.X(i, k) = input_rng.uniform();

  for (Index i = 0; i < m; ++i) {
    const double clean = f(data.X.row(i).transpose());
    const double value = clean + (tau > 0.0 ? noise_rng.uniform(-tau, tau) : 0.0);
    if (std::abs(value) > data.M)
      throw DomainError("sample_dataset: target exceeds its declared sup-norm bound; clamping would bias f_rho");
    data.y(i) = std::clamp(value, -data.M, data.M);
  }
  return data;
}

Dataset slice_rows(const Dataset& data, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > data.size())
    throw ShapeError("slice_rows: row range exceeds the dataset");
  Dataset out;
  out.X = data.X.middleRows(begin, count);
  out.y = data.y.segment(begin, count);
  out.M = data.M;
  out.seed = data.seed;
  out.noise = data.noise;
  return out;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  CsvWriter csv(os);
  std::vector<std::string> header;
  for (int k = 1; k <= data.dim(); ++k) header.push_back("x_" + std::to_string(k));
  header.emplace_back("y");
  csv.header(header);
  for (Index i = 0; i < data.size(); ++i) {
    std::vector<std::string> row;
    for (int k = 0; k < data.dim(); ++k) row.push_back(format_real(data.X(i, k)));
    row.push_back(format_real(data.y(i)));
    csv.row(row);
  }
}

MatrixXd draw_probe_points(Index count, int dim, std::uint64_t seed) {
  CounterRng rng(seed);
  MatrixXd U(count, dim);
  for (Index i = 0; i < count; ++i)
    for (int k = 0; k < dim; ++k) U(i, k) = rng.uniform();
  return U;
}

L2Estimate estimate_l2_error(const std::function<VectorXd(const MatrixXd&)>& predict_rows, const TargetFunction& f,
                             Index probes, std::uint64_t seed, Index block) {
  if (probes < 1) throw DomainError("empirical_l2_error: probe count N must be >= 1");
  const int d = f.dim();
  CounterRng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  MatrixXd U;
  for (Index start = 0; start < probes; start += block) {
    const Index rows = std::min(block, probes - start);
    U.resize(rows, d);
    for (Index i = 0; i < rows; ++i)
      for (int k = 0; k < d; ++k) U(i, k) = rng.uniform();
    const VectorXd g = predict_rows(U);
    const VectorXd ref = f.evaluate_rows(U);
    const Eigen::ArrayXd err = (g - ref).array().square();
    if (!err.isFinite().all()) throw NumericalError("empirical_l2_error: non-finite prediction");
    sum += err.sum();
    sum_sq += err.square().sum();
  }
  L2Estimate est;
  est.probes = probes;
  est.value = sum / double(probes);
  const double var = probes > 1 ? std::max(0.0, (sum_sq - sum * sum / double(probes)) / double(probes - 1)) : 0.0;
  est.standard_error = std::sqrt(var / double(probes));
  return est;
}

double empirical_l2_error(const std::function<double(const VectorXd&)>& predict, const TargetFunction& f, Index probes,
                          std::uint64_t seed) {
  auto rows = [&](const MatrixXd& U) {
    VectorXd out(U.rows());
    for (Index i = 0; i < U.rows(); ++i) out(i) = predict(U.row(i).transpose());
    return out;
  };
  return estimate_l2_error(rows, f, probes, seed).value;
}

MatrixXd regular_grid(int dim, int points_per_dim) {
  if (dim < 1) throw DomainError("sup_error_on_grid: dimension must be >= 1");
  if (dim > 3) throw UnsupportedDimensionError("sup_error_on_grid: grid evaluation supports d <= 3");
  if (points_per_dim < 2) throw DomainError("sup_error_on_grid: need at least 2 points per dimension");
  Index total = 1;
  for (int k = 0; k < dim; ++k) total *= points_per_dim;
  MatrixXd grid(total, dim);
  for (Index i = 0; i < total; ++i) {
    Index rest = i;
    for (int k = 0; k < dim; ++k) {
      grid(i, k) = double(rest % points_per_dim) / double(points_per_dim - 1);
      rest /= points_per_dim;
    }
  }
  return grid;
}

double sup_error_on_grid(const std::function<double(const VectorXd&)>& g,
                         const std::function<double(const VectorXd&)>& f, int dim, int points_per_dim) {
  const MatrixXd grid = regular_grid(dim, points_per_dim);
  double worst = 0.0;
  for (Index i = 0; i < grid.rows(); ++i) {
    const VectorXd x = grid.row(i).transpose();
    const double diff = std::abs(g(x) - f(x));
    if (!std::isfinite(diff)) throw NumericalError("sup_error_on_grid: non-finite value");
    worst = std::max(worst, diff);
  }
  return worst;
}

double sup_error_on_grid_rows(const std::function<VectorXd(const MatrixXd&)>& g,
                              const std::function<VectorXd(const MatrixXd&)>& f, int dim, int points_per_dim) {
  const MatrixXd grid = regular_grid(dim, points_per_dim);
  const Eigen::ArrayXd diff = (g(grid) - f(grid)).array().abs();
  if (!diff.isFinite().all()) throw NumericalError("sup_error_on_grid: non-finite value");
  return diff.size() ? diff.maxCoeff() : 0.0;
}

}  // namespace elm
